#pragma once

// Registry of the benchmark problems "test1" ... "test5".

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cdnn/physics.hpp"

namespace cdnn {

namespace problems {

inline constexpr double pi = std::numbers::pi;

/// Test 1: manufactured solution on (0,1)^2 | (0,1)x(1,2) that violates the homogeneous interface
/// conditions, so g1 and g2 are nonzero.
inline ClosedFormSolution test1_solution() {
    ClosedFormSolution s;
    s.u_stokes = [](const Jet& x, const Jet& y) {
        const Jet sy = sin(pi * y);
        return std::array<Jet, 2>{x * x * pi * sin(2.0 * pi * y) * (x - 1.0) * (x - 1.0),
                                  -2.0 * x * sy * sy * (2.0 * x - 1.0) * (x - 1.0)};
    };
    s.p_stokes = [](const Jet& x, const Jet& y) { return (std::cos(1.0) - 1.0) * std::sin(1.0) + cos(y) * sin(x); };
    s.u_darcy = [](const Jet& x, const Jet& y) {
        const Jet sy = sin(pi * y);
        return std::array<Jet, 2>{sin(pi * x) * sin(pi * y), -2.0 * x * sy * sy * (2.0 * x - 1.0)};
    };
    s.p_darcy = [](const Jet& x, const Jet& y) { return sin(pi * x) * cos(pi * y); };
    return s;
}

inline ClosedFormSolution test2_solution() {
    ClosedFormSolution s;
    s.u_stokes = [](const Jet& x, const Jet& y) {
        const Jet cy = cos(pi * y / 2.0);
        return std::array<Jet, 2>{-cy * cy * sin(pi * x / 2.0), 0.25 * cos(pi * x / 2.0) * (sin(pi * y) + pi * y)};
    };
    s.p_stokes = [](const Jet& x, const Jet& y) {
        const Jet cy = cos(pi * y / 2.0);
        return (pi / 4.0) * cos(pi * x / 2.0) * (y - 2.0 * cy * cy);
    };
    s.u_darcy = [](const Jet& x, const Jet&) {
        return std::array<Jet, 2>{-0.125 * sin(pi * x / 2.0), (pi / 4.0) * cos(pi * x / 2.0)};
    };
    s.p_darcy = [](const Jet& x, const Jet& y) { return -(pi / 4.0) * cos(pi * x / 2.0) * y; };
    return s;
}

inline ClosedFormSolution test3_solution() {
    ClosedFormSolution s;
    s.u_stokes = [](const Jet& x, const Jet& y) {
        const Jet cx = cos(pi * x);
        const Jet q = y * y - 0.25;
        return std::array<Jet, 2>{16.0 * y * cx * cx * q, 8.0 * pi * cx * sin(pi * x) * q * q};
    };
    s.p_stokes = [](const Jet& x, const Jet&) { return x * x; };
    s.u_darcy = [](const Jet& x, const Jet& y) {
        return std::array<Jet, 2>{sin(2.0 * pi * x) * cos(2.0 * pi * y), -cos(2.0 * pi * x) * sin(2.0 * pi * y)};
    };
    s.p_darcy = [](const Jet& x, const Jet& y) { return cos(2.0 * pi * x) * cos(2.0 * pi * y); };
    return s;
}

/// Oscillatory inverse permeability of Test 3 (K^-1 = rho(x, y) I).
inline double test3_varrho(Point p, double eps = 1.0 / 16.0) {
    const double a = 2.0 + 1.8 * std::sin(2.0 * pi * p.x / eps);
    const double b = 2.0 + 1.8 * std::sin(2.0 * pi * p.y / eps);
    return a / b + b / a;
}

inline double kovasznay_lambda() { return -8.0 * pi * pi / (1.0 + std::sqrt(1.0 + 64.0 * pi * pi)); }

/// Kovasznay velocity used as inflow/outflow data in Test 4.
inline Vec2 kovasznay_velocity(Point p) {
    const double lam = kovasznay_lambda();
    const double e = std::exp(lam * p.x);
    return {1.0 - e * std::cos(2.0 * pi * p.y), lam / (2.0 * pi) * e * std::sin(2.0 * pi * p.y)};
}

inline ProblemSpec manufactured(std::string name, Rect stokes, Rect darcy, ClosedFormSolution exact,
                                PhysicalConstants constants) {
    CoupledGeometry geom(stokes, darcy);
    ProblemSpec spec{std::move(name), geom, constants, derive_forcing(exact, constants, geom),
                     exact_dirichlet_segments(exact, geom), exact};
    spec.validate();
    return spec;
}

inline ProblemSpec test1() {
    return manufactured("test1", {0.0, 1.0, 0.0, 1.0}, {0.0, 1.0, 1.0, 2.0}, test1_solution(), PhysicalConstants{});
}

inline ProblemSpec test2() {
    return manufactured("test2", {0.0, 1.0, 0.0, 1.0}, {0.0, 1.0, 1.0, 2.0}, test2_solution(), PhysicalConstants{});
}

inline ProblemSpec test3() {
    PhysicalConstants c;
    c.k_inverse = [](Point p) {
        const double r = test3_varrho(p);
        return Mat2{r, 0.0, 0.0, r};
    };
    return manufactured("test3", {0.0, 1.0, 0.0, 0.5}, {0.0, 1.0, 0.5, 1.0}, test3_solution(), c);
}

inline ProblemSpec test4() {
    PhysicalConstants c;
    c.k_inverse = PhysicalConstants::isotropic_inverse(1.0 / 1.0e4);
    CoupledGeometry geom({-0.5, 1.5, 0.0, 2.0}, {-0.5, 1.5, -2.0, 0.0});
    std::vector<BoundarySegment> segs;
    for (Edge e : {Edge::right, Edge::top, Edge::left})
        segs.push_back({Region::stokes, e, BoundaryCondition::dirichlet_velocity, kovasznay_velocity, {}});
    segs.push_back({Region::darcy, Edge::bottom, BoundaryCondition::dirichlet_pressure, {}, [](Point) { return 0.0; }});
    for (Edge e : {Edge::right, Edge::left})
        segs.push_back({Region::darcy, e, BoundaryCondition::neumann_flux, {}, [](Point) { return 0.0; }});
    ProblemSpec spec{"test4", geom, c, Forcing{}, std::move(segs), std::nullopt};
    spec.validate();
    return spec;
}

inline ProblemSpec test5() {
    CoupledGeometry geom({0.0, 1.0, 1.0, 2.0}, {0.0, 1.0, 0.0, 1.0});
    const auto wall = [](Point) { return Vec2{0.0, 0.0}; };
    const auto zero = [](Point) { return 0.0; };
    std::vector<BoundarySegment> segs{
        {Region::stokes, Edge::top, BoundaryCondition::dirichlet_velocity, [](Point) { return Vec2{1.0, 0.0}; }, {}},
        {Region::stokes, Edge::right, BoundaryCondition::dirichlet_velocity, wall, {}},
        {Region::stokes, Edge::left, BoundaryCondition::dirichlet_velocity, wall, {}},
        {Region::darcy, Edge::left, BoundaryCondition::neumann_flux, {}, zero},
        {Region::darcy, Edge::bottom, BoundaryCondition::neumann_flux, {}, zero},
        {Region::darcy, Edge::right, BoundaryCondition::dirichlet_pressure, {}, zero},
    };
    ProblemSpec spec{"test5", geom, PhysicalConstants{}, Forcing{}, std::move(segs), std::nullopt};
    spec.validate();
    return spec;
}

}  // namespace problems

struct ProblemInfo {
    std::string name;
    std::string description;
};

inline std::vector<ProblemInfo> list_problems() {
    return {
        {"test1", "manufactured solution, K = I, inhomogeneous interface data g1, g2"},
        {"test2", "manufactured solution, K = I, smooth trigonometric fields"},
        {"test3", "manufactured solution, highly oscillatory permeability (eps = 1/16)"},
        {"test4", "Kovasznay inflow, K = 1e4 I, no exact solution"},
        {"test5", "lid-driven cavity over a porous bed, no exact solution"},
    };
}

/// Builds a registered benchmark by name. Throws ConfigError for unknown names.
inline ProblemSpec make_problem(const std::string& name) {
    if (name == "test1") return problems::test1();
    if (name == "test2") return problems::test2();
    if (name == "test3") return problems::test3();
    if (name == "test4") return problems::test4();
    if (name == "test5") return problems::test5();
    throw ConfigError("unknown problem '" + name + "' (see list-problems)");
}

/// Closed-form solution of a registered manufactured benchmark.
inline ClosedFormSolution exact_solution(const std::string& name) {
    if (name == "test1") return problems::test1_solution();
    if (name == "test2") return problems::test2_solution();
    if (name == "test3") return problems::test3_solution();
    throw ConfigError("no closed-form solution named '" + name + "' (available: test1, test2, test3)");
}

}  // namespace cdnn
