#pragma once

// Self-checks behind the `verify` command: residuals of closed-form solutions under their derived
// forcing, and reverse-mode gradients against central differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cdnn/geometry.hpp"
#include "cdnn/network.hpp"
#include "cdnn/physics.hpp"
#include "cdnn/rng.hpp"
#include "cdnn/training.hpp"

namespace cdnn {

struct ForcingCheck {
    double stokes = 0.0;     // max |momentum|, |div| over Stokes interior points
    double darcy = 0.0;      // max |forchheimer|, |mass| over Darcy interior points
    double interface = 0.0;  // max over the three interface residuals
    double boundary = 0.0;   // max boundary residual norm

    double max() const { return std::max({stokes, darcy, interface, boundary}); }
};

/// Residuals of `spec.exact` at `n` random points per group. Requires an exact solution.
inline ForcingCheck forcing_consistency(const ProblemSpec& spec, int n, std::uint64_t seed) {
    if (!spec.exact) throw UsageError("problem '" + spec.name + "' has no closed-form solution");
    const ClosedFormSolution& ex = *spec.exact;
    Rng rng(seed);
    const BatchSizes sizes{static_cast<std::size_t>(n), static_cast<std::size_t>(n), static_cast<std::size_t>(n),
                           static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    const SampleBatch b = draw_batch(spec.geometry, sizes, rng);
    ForcingCheck c;
    for (Point p : b.interior_stokes) {
        const auto f = exact_jets(ex, Region::stokes, p);
        const auto r = stokes_residuals<double>(f.velocity, f.pressure, p, spec);
        c.stokes = std::max({c.stokes, std::abs(r.momentum[0]), std::abs(r.momentum[1]), std::abs(r.divergence)});
    }
    for (Point p : b.interior_darcy) {
        const auto f = exact_jets(ex, Region::darcy, p);
        const auto r = darcy_residuals<double>(f.velocity, f.pressure, p, spec);
        c.darcy = std::max({c.darcy, std::abs(r.forchheimer[0]), std::abs(r.forchheimer[1]), std::abs(r.mass)});
    }
    for (Point p : b.interface) {
        const auto r = interface_residuals<double>(exact_jets(ex, Region::stokes, p), exact_jets(ex, Region::darcy, p),
                                                   p, spec);
        c.interface = std::max({c.interface, std::abs(r.normal_velocity), std::abs(r.normal_stress), std::abs(r.bjs)});
    }
    for (const auto* group : {&b.boundary_stokes, &b.boundary_darcy}) {
        const Region region = group == &b.boundary_stokes ? Region::stokes : Region::darcy;
        for (const auto& s : *group) {
            const auto r = boundary_residuals<double>(exact_jets(ex, region, s.point), region, s.point,
                                                      spec.segment_for(region, s.edge));
            c.boundary = std::max(c.boundary, std::sqrt(r.squared_norm()));
        }
    }
    return c;
}

struct GradientCheck {
    double max_rel_error = 0.0;
    std::vector<std::size_t> coordinates;
};

/// Compares the reverse-mode gradient of the total loss on `batch` with a fourth-order central
/// difference on `count` random coordinates. Relative errors use max(|g|, |fd|, floor) as
/// denominator so that near-zero partials are judged on absolute error.
inline GradientCheck gradient_check(const ProblemSpec& spec, const CoupledParams& params, const SampleBatch& batch,
                                    const LossWeights& weights, int count, std::uint64_t seed, double h = 1e-3,
                                    double floor = 1e-3) {
    const auto lg = loss_and_gradient(params, batch, spec, weights);
    std::vector<double> theta = params.flatten();
    CoupledParams probe = params;
    Rng rng(seed);
    GradientCheck out;
    for (int k = 0; k < count; ++k) {
        const auto idx = static_cast<std::size_t>(rng.next() % theta.size());
        out.coordinates.push_back(idx);
        const double saved = theta[idx];
        auto loss_at = [&](double v) {
            theta[idx] = v;
            probe.assign(theta);
            return assemble_loss(probe, batch, spec, weights).total;
        };
        const double d1 = loss_at(saved + h) - loss_at(saved - h);
        const double d2 = loss_at(saved + 2.0 * h) - loss_at(saved - 2.0 * h);
        const double fd = (8.0 * d1 - d2) / (12.0 * h);
        theta[idx] = saved;
        const double g = lg.gradient[idx];
        const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), floor});
        out.max_rel_error = std::max(out.max_rel_error, rel);
    }
    return out;
}

}  // namespace cdnn
