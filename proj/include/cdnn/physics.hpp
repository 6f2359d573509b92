#pragma once

// Residual operators of the coupled Stokes / Darcy-Forchheimer system.
//
// Stokes (free flow):         -nu Lap(u_S) + grad p_S = f_S,   div u_S = 0
// Darcy-Forchheimer (porous): (mu/rho) K^-1 u_D + (beta/rho)|u_D| u_D + grad p_D = g_D,   div u_D = f_D
// Interface:                  (u_S - u_D).n_S = 0
//                             p_S - nu n_S.(du_S/dn_S) - p_D = g1
//                             -nu t.(du_S/dn_S) - G u_S.t = g2
//
// Every operator is templated on the scalar type so the same code runs on plain doubles (evaluation)
// and on tape variables (training).

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"
#include "cdnn/geometry.hpp"
#include "cdnn/jet.hpp"
#include "cdnn/point.hpp"
#include "cdnn/tape.hpp"

namespace cdnn {

using ScalarField = std::function<double(Point)>;
using VectorField = std::function<Vec2(Point)>;

struct Mat2 {
    double xx = 1.0, xy = 0.0, yx = 0.0, yy = 1.0;

    bool finite() const { return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yx) && std::isfinite(yy); }
};

struct PhysicalConstants {
    double mu = 1.0;
    double rho = 1.0;
    double beta = 1.0;
    double nu = 1.0;
    double G = 1.0;
    /// Inverse permeability K^-1 as a function of position.
    std::function<Mat2(Point)> k_inverse = [](Point) { return Mat2{}; };

    void validate() const {
        if (!(mu > 0.0) || !(rho > 0.0) || !(nu > 0.0) || !(G > 0.0))
            throw ConfigError("mu, rho, nu and G must be positive");
        if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
        if (!k_inverse) throw ConfigError("permeability is not set");
    }

    static std::function<Mat2(Point)> isotropic_inverse(double k_inv) {
        return [k_inv](Point) { return Mat2{k_inv, 0.0, 0.0, k_inv}; };
    }
};

/// Closed-form fields evaluated on coordinate jets, so every derivative comes out exactly.
struct ClosedFormSolution {
    using VectorJetFn = std::function<std::array<Jet, 2>(const Jet& x, const Jet& y)>;
    using ScalarJetFn = std::function<Jet(const Jet& x, const Jet& y)>;

    VectorJetFn u_stokes;
    ScalarJetFn p_stokes;
    VectorJetFn u_darcy;
    ScalarJetFn p_darcy;

    static std::pair<Jet, Jet> seeds(Point p) { return {jet_var(p.x, Axis::x), jet_var(p.y, Axis::y)}; }

    std::array<Jet, 2> velocity_stokes(Point p) const {
        const auto [x, y] = seeds(p);
        return u_stokes(x, y);
    }
    Jet pressure_stokes(Point p) const {
        const auto [x, y] = seeds(p);
        return p_stokes(x, y);
    }
    std::array<Jet, 2> velocity_darcy(Point p) const {
        const auto [x, y] = seeds(p);
        return u_darcy(x, y);
    }
    Jet pressure_darcy(Point p) const {
        const auto [x, y] = seeds(p);
        return p_darcy(x, y);
    }
};

enum class BoundaryCondition { dirichlet_velocity, dirichlet_pressure, neumann_flux };

inline std::string to_string(BoundaryCondition c) {
    switch (c) {
    case BoundaryCondition::dirichlet_velocity: return "dirichlet_velocity";
    case BoundaryCondition::dirichlet_pressure: return "dirichlet_pressure";
    case BoundaryCondition::neumann_flux: return "neumann_flux";
    }
    return "?";
}

inline BoundaryCondition boundary_condition_from_string(const std::string& s) {
    if (s == "dirichlet_velocity") return BoundaryCondition::dirichlet_velocity;
    if (s == "dirichlet_pressure") return BoundaryCondition::dirichlet_pressure;
    if (s == "neumann_flux") return BoundaryCondition::neumann_flux;
    throw ConfigError("unknown boundary condition '" + s + "'");
}

/// One full outer edge of a subdomain with its condition. Velocity data feeds dirichlet_velocity;
/// scalar data feeds dirichlet_pressure (p_D) and neumann_flux (u_D.n_D).
struct BoundarySegment {
    Region region = Region::stokes;
    Edge edge = Edge::bottom;
    BoundaryCondition condition = BoundaryCondition::dirichlet_velocity;
    VectorField velocity = [](Point) { return Vec2{}; };
    ScalarField scalar = [](Point) { return 0.0; };
};

/// Source terms and inhomogeneous interface data.
struct Forcing {
    VectorField f_stokes = [](Point) { return Vec2{}; };
    ScalarField f_darcy = [](Point) { return 0.0; };
    VectorField g_darcy = [](Point) { return Vec2{}; };
    ScalarField g1 = [](Point) { return 0.0; };
    ScalarField g2 = [](Point) { return 0.0; };
};

struct ProblemSpec {
    std::string name;
    CoupledGeometry geometry;
    PhysicalConstants constants;
    Forcing forcing;
    std::vector<BoundarySegment> segments;
    std::optional<ClosedFormSolution> exact;

    /// Index of the segment owning `edge` of `region`.
    std::size_t segment_index(Region region, Edge edge) const {
        for (std::size_t k = 0; k < segments.size(); ++k)
            if (segments[k].region == region && segments[k].edge == edge) return k;
        throw ConfigError("no boundary segment for " + to_string(region) + "/" + to_string(edge));
    }

    const BoundarySegment& segment_for(Region region, Edge edge) const { return segments[segment_index(region, edge)]; }

    /// Segments must cover every outer edge exactly once with a condition valid for the region.
    void validate() const {
        constants.validate();
        for (Region region : {Region::stokes, Region::darcy}) {
            for (Edge e : kAllEdges) {
                int count = 0;
                for (const auto& s : segments)
                    if (s.region == region && s.edge == e) ++count;
                const bool outer = e != geometry.interface_edge(region);
                if (outer && count != 1)
                    throw ConfigError("edge " + to_string(region) + "/" + to_string(e) +
                                      " needs exactly one boundary segment");
                if (!outer && count != 0)
                    throw ConfigError("the interface edge cannot carry a boundary segment");
            }
        }
        for (const auto& s : segments) {
            const bool ok = s.region == Region::stokes ? s.condition == BoundaryCondition::dirichlet_velocity
                                                       : s.condition != BoundaryCondition::dirichlet_velocity;
            if (!ok)
                throw ConfigError("condition " + to_string(s.condition) + " is not valid on region " +
                                  to_string(s.region));
        }
    }
};

// ---------------------------------------------------------------------------------------------
// Residual operators

template <class T>
struct StokesResidual {
    std::array<T, 2> momentum;
    T divergence;
};

template <class T>
struct DarcyResidual {
    std::array<T, 2> forchheimer;
    T mass;
};

template <class T>
struct InterfaceResidual {
    T normal_velocity;  // continuity of normal velocity
    T normal_stress;    // balance of normal forces, minus g1
    T bjs;              // Beavers-Joseph-Saffman slip, minus g2
};

template <class T>
struct BoundaryResidual {
    std::array<T, 2> value;
    int dim = 1;

    T squared_norm() const { return dim == 2 ? value[0] * value[0] + value[1] * value[1] : value[0] * value[0]; }
};

/// Velocity (two components) and pressure jets of one subdomain at one point.
template <class T>
struct RegionJets {
    std::array<Jet2<T>, 2> velocity;
    Jet2<T> pressure;
};

template <class T>
StokesResidual<T> stokes_residuals(const std::array<Jet2<T>, 2>& u, const Jet2<T>& p, Point at,
                                   const ProblemSpec& spec) {
    const Vec2 f = spec.forcing.f_stokes(at);
    const double nu = spec.constants.nu;
    return {{f.x + nu * u[0].laplacian() - p.gx, f.y + nu * u[1].laplacian() - p.gy}, u[0].gx + u[1].gy};
}

template <class T>
DarcyResidual<T> darcy_residuals(const std::array<Jet2<T>, 2>& u, const Jet2<T>& p, Point at, const ProblemSpec& spec) {
    const auto& c = spec.constants;
    const Mat2 k = c.k_inverse(at);
    if (!k.finite()) throw NumericalError("non-finite inverse permeability");
    const Vec2 g = spec.forcing.g_darcy(at);
    const double lin = c.mu / c.rho;
    const double quad = c.beta / c.rho;
    // |u_D| enters at value level only; its parameter adjoint uses the subgradient 0 at the origin.
    const T speed = norm2(u[0].v, u[1].v);
    const T r0 = lin * (k.xx * u[0].v + k.xy * u[1].v) + quad * (speed * u[0].v) + p.gx - g.x;
    const T r1 = lin * (k.yx * u[0].v + k.yy * u[1].v) + quad * (speed * u[1].v) + p.gy - g.y;
    return {{r0, r1}, spec.forcing.f_darcy(at) - (u[0].gx + u[1].gy)};
}

/// Interface residuals with an explicit frame (n_S, t).
template <class T>
InterfaceResidual<T> interface_residuals(const RegionJets<T>& stokes, const RegionJets<T>& darcy, Point at,
                                         const ProblemSpec& spec, Vec2 n, Vec2 t) {
    if (!spec.geometry.on_interface(at)) throw UsageError("interface residual requested off the interface");
    const double nu = spec.constants.nu;
    const double G = spec.constants.G;
    const auto& us = stokes.velocity;
    const auto& ud = darcy.velocity;
    // du_S/dn_S per component
    const T dn0 = n.x * us[0].gx + n.y * us[0].gy;
    const T dn1 = n.x * us[1].gx + n.y * us[1].gy;
    const T r1 = n.x * (us[0].v - ud[0].v) + n.y * (us[1].v - ud[1].v);
    const T r2 = stokes.pressure.v - nu * (n.x * dn0 + n.y * dn1) - darcy.pressure.v - spec.forcing.g1(at);
    const T r3 = -nu * (t.x * dn0 + t.y * dn1) - G * (t.x * us[0].v + t.y * us[1].v) - spec.forcing.g2(at);
    return {r1, r2, r3};
}

template <class T>
InterfaceResidual<T> interface_residuals(const RegionJets<T>& stokes, const RegionJets<T>& darcy, Point at,
                                         const ProblemSpec& spec) {
    return interface_residuals(stokes, darcy, at, spec, spec.geometry.normal_stokes(), spec.geometry.tangent());
}

/// Residual of one boundary condition. `fields` are the jets of the subdomain `region`.
template <class T>
BoundaryResidual<T> boundary_residuals(const RegionJets<T>& fields, Region region, Point at,
                                       const BoundarySegment& segment) {
    if (segment.region != region) throw UsageError("boundary segment belongs to the other subdomain");
    switch (segment.condition) {
    case BoundaryCondition::dirichlet_velocity: {
        if (region != Region::stokes) throw UsageError("velocity Dirichlet data applies to the Stokes region");
        const Vec2 g = segment.velocity(at);
        return {{fields.velocity[0].v - g.x, fields.velocity[1].v - g.y}, 2};
    }
    case BoundaryCondition::dirichlet_pressure:
        if (region != Region::darcy) throw UsageError("pressure Dirichlet data applies to the Darcy region");
        return {{fields.pressure.v - segment.scalar(at), T(0.0)}, 1};
    case BoundaryCondition::neumann_flux: {
        if (region != Region::darcy) throw UsageError("flux data applies to the Darcy region");
        const Vec2 n = outward_normal(segment.edge);
        return {{n.x * fields.velocity[0].v + n.y * fields.velocity[1].v - segment.scalar(at), T(0.0)}, 1};
    }
    }
    throw UsageError("unknown boundary condition");
}

// ---------------------------------------------------------------------------------------------
// Manufactured forcing

/// Source terms and interface data that make `exact` satisfy the system, computed through jets.
inline Forcing derive_forcing(const ClosedFormSolution& exact, const PhysicalConstants& constants,
                              const CoupledGeometry& geometry) {
    Forcing f;
    const auto c = constants;
    f.f_stokes = [exact, c](Point p) {
        const auto u = exact.velocity_stokes(p);
        const Jet ps = exact.pressure_stokes(p);
        return Vec2{-c.nu * u[0].laplacian() + ps.gx, -c.nu * u[1].laplacian() + ps.gy};
    };
    f.f_darcy = [exact](Point p) {
        const auto u = exact.velocity_darcy(p);
        return u[0].gx + u[1].gy;
    };
    f.g_darcy = [exact, c](Point p) {
        const auto u = exact.velocity_darcy(p);
        const Jet pd = exact.pressure_darcy(p);
        const Mat2 k = c.k_inverse(p);
        const double lin = c.mu / c.rho;
        const double quad = c.beta / c.rho;
        const double speed = norm2(u[0].v, u[1].v);
        return Vec2{lin * (k.xx * u[0].v + k.xy * u[1].v) + quad * (speed * u[0].v) + pd.gx,
                    lin * (k.yx * u[0].v + k.yy * u[1].v) + quad * (speed * u[1].v) + pd.gy};
    };
    const Vec2 n = geometry.normal_stokes();
    const Vec2 t = geometry.tangent();
    f.g1 = [exact, c, n](Point p) {
        const auto u = exact.velocity_stokes(p);
        const double dn0 = n.x * u[0].gx + n.y * u[0].gy;
        const double dn1 = n.x * u[1].gx + n.y * u[1].gy;
        return exact.pressure_stokes(p).v - c.nu * (n.x * dn0 + n.y * dn1) - exact.pressure_darcy(p).v;
    };
    f.g2 = [exact, c, n, t](Point p) {
        const auto u = exact.velocity_stokes(p);
        const double dn0 = n.x * u[0].gx + n.y * u[0].gy;
        const double dn1 = n.x * u[1].gx + n.y * u[1].gy;
        return -c.nu * (t.x * dn0 + t.y * dn1) - c.G * (t.x * u[0].v + t.y * u[1].v);
    };
    return f;
}

/// Boundary segments on every outer edge carrying the exact solution as data: velocity Dirichlet on
/// the Stokes side, pressure Dirichlet on the Darcy side.
inline std::vector<BoundarySegment> exact_dirichlet_segments(const ClosedFormSolution& exact,
                                                             const CoupledGeometry& geometry) {
    std::vector<BoundarySegment> segs;
    for (Edge e : geometry.outer_edges(Region::stokes)) {
        BoundarySegment s;
        s.region = Region::stokes;
        s.edge = e;
        s.condition = BoundaryCondition::dirichlet_velocity;
        s.velocity = [exact](Point p) {
            const auto u = exact.velocity_stokes(p);
            return Vec2{u[0].v, u[1].v};
        };
        segs.push_back(std::move(s));
    }
    for (Edge e : geometry.outer_edges(Region::darcy)) {
        BoundarySegment s;
        s.region = Region::darcy;
        s.edge = e;
        s.condition = BoundaryCondition::dirichlet_pressure;
        s.scalar = [exact](Point p) { return exact.pressure_darcy(p).v; };
        segs.push_back(std::move(s));
    }
    return segs;
}

/// Jets of the exact fields of one subdomain.
inline RegionJets<double> exact_jets(const ClosedFormSolution& exact, Region region, Point p) {
    if (region == Region::stokes) return {exact.velocity_stokes(p), exact.pressure_stokes(p)};
    return {exact.velocity_darcy(p), exact.pressure_darcy(p)};
}

}  // namespace cdnn
