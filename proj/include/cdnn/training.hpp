#pragma once

// Composite residual loss as Monte Carlo means over a collocation batch, and the stochastic
// gradient loop that minimizes it.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"
#include "cdnn/geometry.hpp"
#include "cdnn/network.hpp"
#include "cdnn/physics.hpp"
#include "cdnn/tape.hpp"

namespace cdnn {

enum class LossTerm : int {
    stokes_momentum,
    stokes_div,
    stokes_bc,
    darcy_forch,
    darcy_mass,
    darcy_bc,
    iface_normal,
    iface_force,
    iface_bjs,
};

inline constexpr int kLossTerms = 9;

inline constexpr std::array<const char*, kLossTerms> kLossTermNames{
    "stokes_momentum", "stokes_div", "stokes_bc", "darcy_forch", "darcy_mass",
    "darcy_bc",        "iface_normal", "iface_force", "iface_bjs"};

using LossWeights = std::array<double, kLossTerms>;

inline LossWeights unit_weights() {
    LossWeights w;
    w.fill(1.0);
    return w;
}

/// Unweighted value of every loss term plus the weighted total.
struct LossBreakdown {
    std::array<double, kLossTerms> terms{};
    double total = 0.0;

    double operator[](LossTerm t) const { return terms[static_cast<int>(t)]; }
};

namespace detail {

template <class Outputs>
auto velocity_jets(const Outputs& out, Eigen::Index i) {
    return std::array{out.jet(i, 0), out.jet(i, 1)};
}

inline std::vector<Point> points_of(const std::vector<BoundarySample>& samples) {
    std::vector<Point> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples) pts.push_back(s.point);
    return pts;
}

inline std::string where(const char* group, Point p) {
    std::ostringstream os;
    os.precision(17);
    os << group << " point (" << p.x << ", " << p.y << ")";
    return os.str();
}

template <class T>
void check_finite(const T& r, const char* group, Point p) {
    if (!std::isfinite(scalar_value(r))) throw NumericalError("non-finite residual at " + where(group, p));
}

/// Shared loss assembly. `eval(subnet, points, order)` returns BatchJets of the subnetwork. Each
/// group is evaluated at the lowest derivative order its residuals read.
template <class T, class Eval>
std::pair<std::array<T, kLossTerms>, T> assemble_terms(Eval&& eval, const SampleBatch& batch, const ProblemSpec& spec,
                                                       const LossWeights& weights) {
    std::array<T, kLossTerms> terms;
    terms.fill(T(0.0));
    auto need = [&](LossTerm t, std::size_t n) {
        if (n == 0 && weights[static_cast<int>(t)] != 0.0)
            throw ConfigError(std::string("empty point group for loss term ") + kLossTermNames[static_cast<int>(t)] +
                              " with nonzero weight");
        return n > 0;
    };
    auto set_mean = [&](LossTerm t, const T& sum, std::size_t n) {
        terms[static_cast<int>(t)] = sum / static_cast<double>(n);
    };

    const auto& is = batch.interior_stokes;
    const bool want_sm = need(LossTerm::stokes_momentum, is.size());
    const bool want_sd = need(LossTerm::stokes_div, is.size());
    if (want_sm || want_sd) {
        const auto u = eval(Subnet::stokes_velocity, std::span<const Point>(is), JetOrder::second);
        const auto p = eval(Subnet::stokes_pressure, std::span<const Point>(is), JetOrder::first);
        T mom(0.0), div(0.0);
        for (std::size_t i = 0; i < is.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto r = stokes_residuals<T>(velocity_jets(u, ii), p.jet(ii, 0), is[i], spec);
            check_finite(r.momentum[0], "Stokes interior", is[i]);
            check_finite(r.momentum[1], "Stokes interior", is[i]);
            check_finite(r.divergence, "Stokes interior", is[i]);
            mom = mom + (r.momentum[0] * r.momentum[0] + r.momentum[1] * r.momentum[1]);
            div = div + r.divergence * r.divergence;
        }
        set_mean(LossTerm::stokes_momentum, mom, is.size());
        set_mean(LossTerm::stokes_div, div, is.size());
    }

    const auto& id = batch.interior_darcy;
    const bool want_df = need(LossTerm::darcy_forch, id.size());
    const bool want_dm = need(LossTerm::darcy_mass, id.size());
    if (want_df || want_dm) {
        const auto u = eval(Subnet::darcy_velocity, std::span<const Point>(id), JetOrder::first);
        const auto p = eval(Subnet::darcy_pressure, std::span<const Point>(id), JetOrder::first);
        T forch(0.0), mass(0.0);
        for (std::size_t i = 0; i < id.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto r = darcy_residuals<T>(velocity_jets(u, ii), p.jet(ii, 0), id[i], spec);
            check_finite(r.forchheimer[0], "Darcy interior", id[i]);
            check_finite(r.forchheimer[1], "Darcy interior", id[i]);
            check_finite(r.mass, "Darcy interior", id[i]);
            forch = forch + (r.forchheimer[0] * r.forchheimer[0] + r.forchheimer[1] * r.forchheimer[1]);
            mass = mass + r.mass * r.mass;
        }
        set_mean(LossTerm::darcy_forch, forch, id.size());
        set_mean(LossTerm::darcy_mass, mass, id.size());
    }

    const auto& bs = batch.boundary_stokes;
    if (need(LossTerm::stokes_bc, bs.size())) {
        const auto pts = points_of(bs);
        const auto u = eval(Subnet::stokes_velocity, std::span<const Point>(pts), JetOrder::value);
        T sum(0.0);
        for (std::size_t i = 0; i < bs.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const RegionJets<T> fields{velocity_jets(u, ii), Jet2<T>{}};
            const auto r = boundary_residuals<T>(fields, Region::stokes, bs[i].point,
                                                 spec.segment_for(Region::stokes, bs[i].edge));
            const T sq = r.squared_norm();
            check_finite(sq, "Stokes boundary", bs[i].point);
            sum = sum + sq;
        }
        set_mean(LossTerm::stokes_bc, sum, bs.size());
    }

    const auto& bd = batch.boundary_darcy;
    if (need(LossTerm::darcy_bc, bd.size())) {
        const auto pts = points_of(bd);
        const auto u = eval(Subnet::darcy_velocity, std::span<const Point>(pts), JetOrder::value);
        const auto p = eval(Subnet::darcy_pressure, std::span<const Point>(pts), JetOrder::value);
        T sum(0.0);
        for (std::size_t i = 0; i < bd.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const RegionJets<T> fields{velocity_jets(u, ii), p.jet(ii, 0)};
            const auto r = boundary_residuals<T>(fields, Region::darcy, bd[i].point,
                                                 spec.segment_for(Region::darcy, bd[i].edge));
            const T sq = r.squared_norm();
            check_finite(sq, "Darcy boundary", bd[i].point);
            sum = sum + sq;
        }
        set_mean(LossTerm::darcy_bc, sum, bd.size());
    }

    const auto& ip = batch.interface;
    const bool want_in = need(LossTerm::iface_normal, ip.size());
    const bool want_if = need(LossTerm::iface_force, ip.size());
    const bool want_ib = need(LossTerm::iface_bjs, ip.size());
    if (want_in || want_if || want_ib) {
        const std::span<const Point> pts(ip);
        const auto us = eval(Subnet::stokes_velocity, pts, JetOrder::first);
        const auto ps = eval(Subnet::stokes_pressure, pts, JetOrder::value);
        const auto ud = eval(Subnet::darcy_velocity, pts, JetOrder::value);
        const auto pd = eval(Subnet::darcy_pressure, pts, JetOrder::value);
        T s1(0.0), s2(0.0), s3(0.0);
        for (std::size_t i = 0; i < ip.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const RegionJets<T> st{velocity_jets(us, ii), ps.jet(ii, 0)};
            const RegionJets<T> da{velocity_jets(ud, ii), pd.jet(ii, 0)};
            const auto r = interface_residuals<T>(st, da, ip[i], spec);
            check_finite(r.normal_velocity, "interface", ip[i]);
            check_finite(r.normal_stress, "interface", ip[i]);
            check_finite(r.bjs, "interface", ip[i]);
            s1 = s1 + r.normal_velocity * r.normal_velocity;
            s2 = s2 + r.normal_stress * r.normal_stress;
            s3 = s3 + r.bjs * r.bjs;
        }
        set_mean(LossTerm::iface_normal, s1, ip.size());
        set_mean(LossTerm::iface_force, s2, ip.size());
        set_mean(LossTerm::iface_bjs, s3, ip.size());
    }

    T total(0.0);
    for (int k = 0; k < kLossTerms; ++k)
        if (weights[k] != 0.0) total = total + weights[k] * terms[k];
    return {terms, total};
}

}  // namespace detail

/// Loss value without recording a tape.
inline LossBreakdown assemble_loss(const CoupledParams& params, const SampleBatch& batch, const ProblemSpec& spec,
                                   const LossWeights& weights = unit_weights()) {
    auto eval = [&](Subnet s, std::span<const Point> pts, JetOrder order) { return evaluate_batch(params[s], pts, order); };
    const auto [terms, total] = detail::assemble_terms<double>(eval, batch, spec, weights);
    LossBreakdown out;
    out.terms = terms;
    out.total = total;
    return out;
}

/// Records the loss on `tape` and returns its total as a tape variable.
inline Var record_loss(Tape& tape, const CoupledParams& params, const SampleBatch& batch, const ProblemSpec& spec,
                       const LossWeights& weights, LossBreakdown* breakdown = nullptr) {
    auto eval = [&](Subnet s, std::span<const Point> pts, JetOrder order) {
        return record_forward(tape, params, s, pts, order);
    };
    const auto [terms, total] = detail::assemble_terms<Var>(eval, batch, spec, weights);
    if (breakdown) {
        for (int k = 0; k < kLossTerms; ++k) breakdown->terms[k] = terms[k].value();
        breakdown->total = total.value();
    }
    if (total.is_constant()) {
        // Every weight is zero: anchor the constant on the tape so it has a (zero) gradient.
        return tape.parameter(0, 0.0) * 0.0;
    }
    return total;
}

struct LossAndGradient {
    LossBreakdown loss;
    std::vector<double> gradient;
};

inline LossAndGradient loss_and_gradient(const CoupledParams& params, const SampleBatch& batch, const ProblemSpec& spec,
                                         const LossWeights& weights = unit_weights()) {
    Tape tape;
    LossAndGradient r;
    const Var total = record_loss(tape, params, batch, spec, weights, &r.loss);
    r.gradient = gradient_of(total, params.size());
    return r;
}

// ---------------------------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr_decay = 0.5;            // multiplicative factor ...
    std::uint64_t lr_decay_every = 10000;  // ... applied every this many steps (0 = never)

    double rate_at(std::uint64_t steps_taken) const {
        if (lr_decay_every == 0) return learning_rate;
        return learning_rate * std::pow(lr_decay, static_cast<double>(steps_taken / lr_decay_every));
    }

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
        if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
        if (!(lr_decay > 0.0)) throw ConfigError("learning-rate decay must be positive");
    }
};

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t steps = 0;
};

/// One descent step on the flat parameter vector. A non-finite gradient entry refuses the step
/// and leaves `theta` and `state` untouched.
inline void step(std::span<double> theta, std::span<const double> grad, const OptimizerConfig& config,
                 OptimizerState& state) {
    if (grad.size() != theta.size()) throw UsageError("gradient length differs from parameter count");
    for (std::size_t k = 0; k < grad.size(); ++k)
        if (!std::isfinite(grad[k])) throw NumericalError("non-finite gradient entry " + std::to_string(k));
    const double lr = config.rate_at(state.steps);
    if (config.kind == OptimizerKind::sgd) {
        for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= lr * grad[k];
        ++state.steps;
        return;
    }
    if (state.m.size() != theta.size()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    ++state.steps;
    const double t = static_cast<double>(state.steps);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grad[k];
        state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
        const double mhat = state.m[k] / c1;
        const double vhat = state.v[k] / c2;
        theta[k] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
}

inline void step(CoupledParams& params, std::span<const double> grad, const OptimizerConfig& config,
                 OptimizerState& state) {
    std::vector<double> theta = params.flatten();
    step(std::span<double>(theta), grad, config, state);
    params.assign(theta);
}

// ---------------------------------------------------------------------------------------------
// Training loop

struct TrainConfig {
    std::array<MLPArch, 4> archs = coupled_archs(3, 16);
    std::uint64_t max_iters = 20000;
    OptimizerConfig optimizer;
    BatchSizes batch;
    LossWeights weights = unit_weights();
    double grad_norm_tol = 0.0;  // 0 disables the gradient-norm stop
    std::uint64_t seed = 0;
    std::uint64_t log_every = 100;
    bool record_wall_clock = true;

    void validate() const {
        if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
        if (log_every < 1) throw ConfigError("log_every must be >= 1");
        if (!(grad_norm_tol >= 0.0)) throw ConfigError("grad_norm_tol must be >= 0");
        for (double w : weights)
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("loss weights must be finite and >= 0");
        for (const auto& a : archs) a.validate();
        optimizer.validate();
    }
};

struct TrainRecord {
    std::uint64_t iteration = 0;
    LossBreakdown loss;
    double grad_norm = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<TrainRecord> records;
    std::vector<double> loss_trace;  // total loss of every iteration

    double best_loss() const {
        double best = std::numeric_limits<double>::infinity();
        for (double v : loss_trace) best = std::min(best, v);
        return best;
    }
};

struct TrainResult {
    CoupledParams params;
    TrainHistory history;
    std::uint64_t updates = 0;
    bool converged = false;            // stopped on the gradient-norm tolerance
    std::optional<std::string> error;  // numerical failure that ended the run early
};

/// Seed of the collocation stream, derived from the master seed.
inline std::uint64_t sampler_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

using TrainCallback = std::function<void(const TrainRecord&, const CoupledParams&)>;

inline double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Fresh batch -> loss -> exact gradient -> update, until max_iters or the gradient-norm tolerance.
inline TrainResult train(const ProblemSpec& spec, const TrainConfig& config, const TrainCallback& on_log = {},
                         std::optional<CoupledParams> initial = std::nullopt) {
    config.validate();
    TrainResult result{initial ? std::move(*initial) : init_params(config.archs, config.seed), {}, 0, false, {}};
    Rng rng(sampler_seed(config.seed));
    OptimizerState state;
    const auto start = std::chrono::steady_clock::now();

    for (std::uint64_t it = 1; it <= config.max_iters; ++it) {
        const SampleBatch batch = draw_batch(spec.geometry, config.batch, rng);
        LossAndGradient lg;
        try {
            lg = loss_and_gradient(result.params, batch, spec, config.weights);
        } catch (const NumericalError& e) {
            result.error = "iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
        const double gnorm = l2_norm(lg.gradient);
        result.history.loss_trace.push_back(lg.loss.total);

        const bool stop = config.grad_norm_tol > 0.0 && gnorm <= config.grad_norm_tol;
        if (it == 1 || it % config.log_every == 0 || it == config.max_iters || stop) {
            TrainRecord rec{it, lg.loss, gnorm, 0.0};
            if (config.record_wall_clock)
                rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            result.history.records.push_back(rec);
            if (on_log) on_log(rec, result.params);
        }
        if (stop) {
            result.converged = true;
            break;
        }
        try {
            step(result.params, lg.gradient, config.optimizer, state);
        } catch (const NumericalError& e) {
            result.error = "iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
        ++result.updates;
    }
    return result;
}

/// Moving average of `trace` over trailing windows of `window` entries, evaluated at index `end - 1`.
inline double smoothed(std::span<const double> trace, std::size_t end, std::size_t window) {
    if (end == 0 || end > trace.size()) throw UsageError("smoothing window out of range");
    const std::size_t begin = end > window ? end - window : 0;
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += trace[k];
    return s / static_cast<double>(end - begin);
}

inline std::string history_csv_header() {
    std::string h = "iteration";
    for (const char* n : kLossTermNames) h += std::string(",") + n;
    h += ",total,grad_norm,seconds";
    return h;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string history_csv_row(const TrainRecord& r) {
    std::string s = std::to_string(r.iteration);
    for (double t : r.loss.terms) s += "," + format_double(t);
    s += "," + format_double(r.loss.total) + "," + format_double(r.grad_norm) + "," + format_double(r.seconds);
    return s;
}

inline void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open history file '" + path + "' for writing");
    out << history_csv_header() << '\n';
    for (const auto& r : history.records) out << history_csv_row(r) << '\n';
    if (!out) throw IoError("failed writing history file '" + path + "'");
}

}  // namespace cdnn
