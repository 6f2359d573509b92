#pragma once

// Elementary composites with symbolically generated derivatives (value, d/dx, d/dy, d2/dx2, d2/dy2).

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "cdnn/jet.hpp"

namespace cdnn::testing {

using std::cos;
using std::cosh;
using std::exp;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

inline constexpr double kPi = std::numbers::pi;

struct CompositeCase {
    const char* name;
    std::function<Jet(const Jet&, const Jet&)> jet;
    std::function<std::array<double, 5>(double, double)> exact;
};

// Oracle derivatives generated symbolically.
inline const std::vector<CompositeCase>& composite_table() {
    static const std::vector<CompositeCase> table{
    {"sin(x*y)", [](const Jet& X, const Jet& Y) { return sin(X * Y); },
     [](double x, double y) { return std::array<double, 5>{sin(x*y), y*cos(x*y), x*cos(x*y), -pow(y, 2)*sin(x*y), -pow(x, 2)*sin(x*y)}; }},
    {"cos(x + 2y)", [](const Jet& X, const Jet& Y) { return cos(X + 2.0 * Y); },
     [](double x, double y) { return std::array<double, 5>{cos(x + 2*y), -sin(x + 2*y), -2*sin(x + 2*y), -cos(x + 2*y), -4*cos(x + 2*y)}; }},
    {"exp(x*x - y)", [](const Jet& X, const Jet& Y) { return exp(X * X - Y); },
     [](double x, double y) { return std::array<double, 5>{exp(pow(x, 2) - y), 2*x*exp(pow(x, 2) - y), -exp(pow(x, 2) - y), (4*pow(x, 2) + 2)*exp(pow(x, 2) - y), exp(pow(x, 2) - y)}; }},
    {"tanh(3x - y)", [](const Jet& X, const Jet& Y) { return tanh(3.0 * X - Y); },
     [](double x, double y) { return std::array<double, 5>{tanh(3*x - y), 3 - 3*pow(tanh(3*x - y), 2), pow(tanh(3*x - y), 2) - 1, 18*(pow(tanh(3*x - y), 2) - 1)*tanh(3*x - y), 2*(pow(tanh(3*x - y), 2) - 1)*tanh(3*x - y)}; }},
    {"sin(x)*cos(y)", [](const Jet& X, const Jet& Y) { return sin(X) * cos(Y); },
     [](double x, double y) { return std::array<double, 5>{sin(x)*cos(y), cos(x)*cos(y), -sin(x)*sin(y), -sin(x)*cos(y), -sin(x)*cos(y)}; }},
    {"exp(sin(x))", [](const Jet& X, const Jet&) { return exp(sin(X)); },
     [](double x, double) { return std::array<double, 5>{exp(sin(x)), exp(sin(x))*cos(x), 0, (-sin(x) + pow(cos(x), 2))*exp(sin(x)), 0}; }},
    {"tanh(x*y*y)", [](const Jet& X, const Jet& Y) { return tanh(X * Y * Y); },
     [](double x, double y) { return std::array<double, 5>{tanh(x*pow(y, 2)), pow(y, 2)/pow(cosh(x*pow(y, 2)), 2), 2*x*y/pow(cosh(x*pow(y, 2)), 2), -2*pow(y, 4)*tanh(x*pow(y, 2))/pow(cosh(x*pow(y, 2)), 2), -(8*pow(x, 2)*pow(y, 2)*tanh(x*pow(y, 2)) - 2*x)/pow(cosh(x*pow(y, 2)), 2)}; }},
    {"x/(1+y*y)", [](const Jet& X, const Jet& Y) { return X / (1.0 + Y * Y); },
     [](double x, double y) { return std::array<double, 5>{x/(pow(y, 2) + 1), 1.0/(pow(y, 2) + 1), -2*x*y/pow(pow(y, 2) + 1, 2), 0, 2*x*(3*pow(y, 2) - 1)/pow(pow(y, 2) + 1, 3)}; }},
    {"sin(x)/exp(y)", [](const Jet& X, const Jet& Y) { return sin(X) / exp(Y); },
     [](double x, double y) { return std::array<double, 5>{exp(-y)*sin(x), exp(-y)*cos(x), -exp(-y)*sin(x), -exp(-y)*sin(x), exp(-y)*sin(x)}; }},
    {"pow(x*x+y*y+1, 1.5)", [](const Jet& X, const Jet& Y) { return pow(X * X + Y * Y + 1.0, 1.5); },
     [](double x, double y) { return std::array<double, 5>{pow(pow(x, 2) + pow(y, 2) + 1, 3.0/2.0), 3*x*sqrt(pow(x, 2) + pow(y, 2) + 1), 3*y*sqrt(pow(x, 2) + pow(y, 2) + 1), 3*(2*pow(x, 2) + pow(y, 2) + 1)/sqrt(pow(x, 2) + pow(y, 2) + 1), 3*(pow(x, 2) + 2*pow(y, 2) + 1)/sqrt(pow(x, 2) + pow(y, 2) + 1)}; }},
    {"pow(x+2, -2)", [](const Jet& X, const Jet&) { return pow(X + 2.0, -2.0); },
     [](double x, double) { return std::array<double, 5>{pow(x + 2, -2), -2/pow(x + 2, 3), 0, 6/pow(x + 2, 4), 0}; }},
    {"cos(exp(x*y))", [](const Jet& X, const Jet& Y) { return cos(exp(X * Y)); },
     [](double x, double y) { return std::array<double, 5>{cos(exp(x*y)), -y*exp(x*y)*sin(exp(x*y)), -x*exp(x*y)*sin(exp(x*y)), -pow(y, 2)*(exp(x*y)*cos(exp(x*y)) + sin(exp(x*y)))*exp(x*y), -pow(x, 2)*(exp(x*y)*cos(exp(x*y)) + sin(exp(x*y)))*exp(x*y)}; }},
    {"sin(pi x)^2 sin(2 pi y)", [](const Jet& X, const Jet& Y) { return sin(kPi * X) * sin(kPi * X) * sin(2.0 * kPi * Y); },
     [](double x, double y) { return std::array<double, 5>{pow(sin(kPi*x), 2)*sin(2*kPi*y), (1.0/2.0)*kPi*(cos(kPi*(2*x - 2*y)) - cos(kPi*(2*x + 2*y))), 2*kPi*pow(sin(kPi*x), 2)*cos(2*kPi*y), 2*pow(kPi, 2)*sin(2*kPi*y)*cos(2*kPi*x), -4*pow(kPi, 2)*pow(sin(kPi*x), 2)*sin(2*kPi*y)}; }},
    {"tanh(sin(x) + cos(y))", [](const Jet& X, const Jet& Y) { return tanh(sin(X) + cos(Y)); },
     [](double x, double y) { return std::array<double, 5>{tanh(sin(x) + cos(y)), -(pow(tanh(sin(x) + cos(y)), 2) - 1)*cos(x), (pow(tanh(sin(x) + cos(y)), 2) - 1)*sin(y), (sin(x) + 2*pow(cos(x), 2)*tanh(sin(x) + cos(y)))*(pow(tanh(sin(x) + cos(y)), 2) - 1), (2*pow(sin(y), 2)*tanh(sin(x) + cos(y)) + cos(y))*(pow(tanh(sin(x) + cos(y)), 2) - 1)}; }},
    {"exp(-x*x-y*y)", [](const Jet& X, const Jet& Y) { return exp(-(X * X) - Y * Y); },
     [](double x, double y) { return std::array<double, 5>{exp(-pow(x, 2) - pow(y, 2)), -2*x*exp(-pow(x, 2) - pow(y, 2)), -2*y*exp(-pow(x, 2) - pow(y, 2)), (4*pow(x, 2) - 2)*exp(-pow(x, 2) - pow(y, 2)), (4*pow(y, 2) - 2)*exp(-pow(x, 2) - pow(y, 2))}; }},
    {"(x-y)/(x+y+3)", [](const Jet& X, const Jet& Y) { return (X - Y) / (X + Y + 3.0); },
     [](double x, double y) { return std::array<double, 5>{(x - y)/(x + y + 3), (2*y + 3)/pow(x + y + 3, 2), (-2*x - 3)/pow(x + y + 3, 2), 2*(-2*y - 3)/pow(x + y + 3, 3), 2*(2*x + 3)/pow(x + y + 3, 3)}; }},
    {"pow(exp(x)+y*y, 0.5)", [](const Jet& X, const Jet& Y) { return pow(exp(X) + Y * Y, 0.5); },
     [](double x, double y) { return std::array<double, 5>{sqrt(pow(y, 2) + exp(x)), (1.0/2.0)*exp(x)/sqrt(pow(y, 2) + exp(x)), y/sqrt(pow(y, 2) + exp(x)), (1.0/4.0)*(2*pow(y, 2) + exp(x))*exp(x)/pow(pow(y, 2) + exp(x), 3.0/2.0), exp(x)/pow(pow(y, 2) + exp(x), 3.0/2.0)}; }},
    {"x*sin(y) - y*cos(x)", [](const Jet& X, const Jet& Y) { return X * sin(Y) - Y * cos(X); },
     [](double x, double y) { return std::array<double, 5>{x*sin(y) - y*cos(x), y*sin(x) + sin(y), x*cos(y) - cos(x), y*cos(x), -x*sin(y)}; }},
    {"sin(tanh(x*y) + 1)", [](const Jet& X, const Jet& Y) { return sin(tanh(X * Y) + 1.0); },
     [](double x, double y) { return std::array<double, 5>{sin(tanh(x*y) + 1), y*cos(tanh(x*y) + 1)/pow(cosh(x*y), 2), x*cos(tanh(x*y) + 1)/pow(cosh(x*y), 2), -4*pow(y, 2)*(sin(tanh(x*y) + 1) + cos(tanh(x*y) + 1)*sinh(2*x*y))/pow(cosh(2*x*y) + 1, 2), -4*pow(x, 2)*(sin(tanh(x*y) + 1) + cos(tanh(x*y) + 1)*sinh(2*x*y))/pow(cosh(2*x*y) + 1, 2)}; }},
    {"cos(pi x / 2) (sin(pi y) + pi y)", [](const Jet& X, const Jet& Y) { return cos(kPi * X / 2.0) * (sin(kPi * Y) + kPi * Y); },
     [](double x, double y) { return std::array<double, 5>{(kPi*y + sin(kPi*y))*cos((1.0/2.0)*kPi*x), -1.0/2.0*kPi*(kPi*y + sin(kPi*y))*sin((1.0/2.0)*kPi*x), kPi*(cos(kPi*y) + 1)*cos((1.0/2.0)*kPi*x), -1.0/4.0*pow(kPi, 2)*(kPi*y + sin(kPi*y))*cos((1.0/2.0)*kPi*x), -pow(kPi, 2)*sin(kPi*y)*cos((1.0/2.0)*kPi*x)}; }},
    };
    return table;
}

}  // namespace cdnn::testing
