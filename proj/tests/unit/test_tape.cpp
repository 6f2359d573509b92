#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cdnn/tape.hpp"

using namespace cdnn;

namespace {

using ScalarFn = std::function<Var(const std::vector<Var>&)>;

struct OpCase {
    const char* name;
    int arity;
    ScalarFn fn;
    double lo, hi;  // sampling range of the inputs
};

// One case per recorded operation kind, each mixing in a second parameter where the op allows it.
const std::vector<OpCase>& op_cases() {
    static const std::vector<OpCase> cases{
        {"add", 2, [](const auto& p) { return p[0] + p[1]; }, -2, 2},
        {"sub", 2, [](const auto& p) { return p[0] - p[1]; }, -2, 2},
        {"mul", 2, [](const auto& p) { return p[0] * p[1]; }, -2, 2},
        {"div", 2, [](const auto& p) { return p[0] / p[1]; }, 0.5, 2},
        {"norm2", 2, [](const auto& p) { return norm2(p[0], p[1]); }, 0.2, 2},
        {"norm2_const", 1, [](const auto& p) { return norm2(p[0], Var(0.7)); }, -2, 2},
        {"neg", 1, [](const auto& p) { return -p[0]; }, -2, 2},
        {"add_const", 1, [](const auto& p) { return p[0] + 1.25; }, -2, 2},
        {"mul_const", 1, [](const auto& p) { return 3.5 * p[0]; }, -2, 2},
        {"rsub_const", 1, [](const auto& p) { return 1.5 - p[0]; }, -2, 2},
        {"rdiv_const", 1, [](const auto& p) { return 2.0 / p[0]; }, 0.5, 2},
        {"div_const", 1, [](const auto& p) { return p[0] / 3.0; }, -2, 2},
        {"sin", 1, [](const auto& p) { return sin(p[0]); }, -3, 3},
        {"cos", 1, [](const auto& p) { return cos(p[0]); }, -3, 3},
        {"exp", 1, [](const auto& p) { return exp(p[0]); }, -2, 2},
        {"tanh", 1, [](const auto& p) { return tanh(p[0]); }, -2, 2},
        {"sqrt", 1, [](const auto& p) { return sqrt(p[0]); }, 0.3, 3},
        {"pow_const", 1, [](const auto& p) { return pow(p[0], 2.5); }, 0.3, 3},
        {"chain", 2, [](const auto& p) { return tanh(p[0] * sin(p[1])) / (1.0 + exp(p[0] - p[1])); }, -1, 1},
    };
    return cases;
}

double eval_plain(const OpCase& c, const std::vector<double>& x) {
    std::vector<Var> v(x.begin(), x.end());
    return c.fn(v).value();
}

}  // namespace

TEST(Tape, SumOfSquaresGradient) {
    Tape tape;
    const Var a = tape.parameter(0, 1.0);
    const Var b = tape.parameter(1, -2.0);
    const auto g = gradient_of(a * a + b * b, 2);
    EXPECT_EQ(g[0], 2.0);
    EXPECT_EQ(g[1], -4.0);
}

TEST(Tape, UnusedParameterHasZeroGradient) {
    Tape tape;
    const Var a = tape.parameter(0, 0.3);
    tape.parameter(1, 5.0);
    const auto g = gradient_of(sin(a) * 2.0, 3);
    EXPECT_DOUBLE_EQ(g[0], 2.0 * std::cos(0.3));
    EXPECT_EQ(g[1], 0.0);
    EXPECT_EQ(g[2], 0.0);
}

TEST(TapeProperty, EveryOpMatchesCentralDifferences) {
    std::mt19937_64 gen(2024);
    for (const auto& c : op_cases()) {
        std::uniform_real_distribution<double> u(c.lo, c.hi);
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<double> x(c.arity);
            for (double& xi : x) xi = u(gen);
            Tape tape;
            std::vector<Var> p;
            for (int k = 0; k < c.arity; ++k) p.push_back(tape.parameter(k, x[k]));
            const auto g = gradient_of(c.fn(p), c.arity);
            for (int k = 0; k < c.arity; ++k) {
                const double h = 1e-6;
                auto xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                const double fd = (eval_plain(c, xp) - eval_plain(c, xm)) / (2 * h);
                EXPECT_LE(std::abs(g[k] - fd), 1e-5 * std::max(1.0, std::abs(fd))) << c.name << " d/dx" << k;
            }
        }
    }
}

TEST(TapeProperty, ReplayIsBitExact) {
    std::mt19937_64 gen(5);
    for (const auto& c : op_cases()) {
        std::uniform_real_distribution<double> u(c.lo, c.hi);
        Tape tape;
        std::vector<Var> p;
        for (int k = 0; k < c.arity; ++k) p.push_back(tape.parameter(k, u(gen)));
        const Var r = c.fn(p);
        EXPECT_EQ(tape.replay(r), r.value()) << c.name;
    }
}

TEST(TapeProperty, IdenticalTapesGiveIdenticalGradients) {
    auto run = [] {
        Tape tape;
        std::vector<Var> p;
        for (int k = 0; k < 8; ++k) p.push_back(tape.parameter(k, 0.1 * k - 0.35));
        Var s = 0.0;
        for (int k = 0; k < 8; ++k) s += tanh(p[k] * p[(k + 3) % 8]) + exp(p[k]) / (2.0 + sin(p[(k + 1) % 8]));
        return gradient_of(s, 8);
    };
    const auto a = run();
    const auto b = run();
    for (int k = 0; k < 8; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Tape, Norm2SubgradientAtOrigin) {
    Tape tape;
    const Var a = tape.parameter(0, 0.0);
    const Var b = tape.parameter(1, 0.0);
    const auto g = gradient_of(norm2(a, b) + a, 2);
    EXPECT_EQ(g[0], 1.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(Tape, BlockBackwardReceivesOutputAdjoints) {
    Tape tape;
    const Var w = tape.parameter(0, 2.0);
    const std::vector<double> outs{3.0, 4.0};
    // Block computing (x * theta1, x^2 * theta1) at x = 1.5 with theta1 = 2.
    const std::uint32_t first = tape.record_block(outs, [](std::span<const double> adj, std::span<double> grad) {
        grad[1] += adj[0] * 1.5 + adj[1] * 2.25;
    });
    const Var y = w * tape.at(first) + 5.0 * tape.at(first + 1);
    const auto g = gradient_of(y, 2);
    EXPECT_EQ(g[0], 3.0);
    EXPECT_DOUBLE_EQ(g[1], 2.0 * 1.5 + 5.0 * 2.25);
}

TEST(Tape, UsageErrors) {
    EXPECT_THROW(gradient_of(Var(3.0), 1), UsageError);
    Tape t1, t2;
    const Var a = t1.parameter(0, 1.0);
    const Var b = t2.parameter(0, 1.0);
    EXPECT_THROW(a + b, UsageError);
    EXPECT_THROW(t1.at(99), UsageError);
    EXPECT_THROW(t2.gradient(a, 1), UsageError);
}

TEST(Tape, DomainErrors) {
    Tape tape;
    const Var a = tape.parameter(0, 0.0);
    EXPECT_THROW(1.0 / a, DomainError);
    EXPECT_THROW(sqrt(a - 1.0), DomainError);
    EXPECT_THROW(sqrt(a), DomainError);
}

TEST(Tape, NonFiniteAdjointReportsOpIndex) {
    Tape tape;
    const Var a = tape.parameter(0, 1e-310);
    const Var s = sqrt(a);
    const Var r = s * 1e200;
    try {
        gradient_of(r, 1);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.op_index(), static_cast<std::ptrdiff_t>(a.index()));
        EXPECT_EQ(e.exit_code(), 3);
    }
}
