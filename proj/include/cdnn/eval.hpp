#pragma once

// Relative error metrics against exact solutions, interface residual norms, and CSV field export.

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"
#include "cdnn/geometry.hpp"
#include "cdnn/network.hpp"
#include "cdnn/parallel.hpp"
#include "cdnn/physics.hpp"
#include "cdnn/training.hpp"

namespace cdnn {

/// Uniform nx x ny tensor grid covering a closed rectangle.
struct EvalGrid {
    int nx = 101;
    int ny = 101;

    void validate() const {
        if (nx < 2 || ny < 2) throw ConfigError("evaluation grid needs at least 2 points per axis");
    }

    /// Row-major points: y index outer, x index inner.
    std::vector<Point> points(const Rect& r) const {
        validate();
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>(nx) * ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                pts.push_back({r.xmin + r.width() * i / (nx - 1), r.ymin + r.height() * j / (ny - 1)});
        return pts;
    }
};

enum class Norm { L1, L2 };

/// Discrete relative error of `approx` against `exact`; both hold `components` values per point and
/// vector values enter through their pointwise Euclidean magnitude.
inline double rel_error(std::span<const double> approx, std::span<const double> exact, int components, Norm norm) {
    if (approx.size() != exact.size() || components < 1 || exact.size() % components != 0)
        throw UsageError("rel_error: field sizes do not match");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < exact.size(); i += components) {
        double d2 = 0.0;
        double e2 = 0.0;
        for (int c = 0; c < components; ++c) {
            const double d = approx[i + c] - exact[i + c];
            d2 += d * d;
            e2 += exact[i + c] * exact[i + c];
        }
        if (norm == Norm::L1) {
            num += std::sqrt(d2);
            den += std::sqrt(e2);
        } else {
            num += d2;
            den += e2;
        }
    }
    if (den == 0.0)
        throw DomainError("relative error undefined: exact field is zero on the grid (use an absolute norm)");
    return norm == Norm::L1 ? num / den : std::sqrt(num) / std::sqrt(den);
}

/// Velocity (2 per point) and pressure (1 per point) of one subdomain.
struct FieldValues {
    std::vector<double> velocity;
    std::vector<double> pressure;
};

inline FieldValues evaluate_network(const CoupledParams& params, Region region, std::span<const Point> points) {
    const Subnet us = region == Region::stokes ? Subnet::stokes_velocity : Subnet::darcy_velocity;
    const Subnet ps = region == Region::stokes ? Subnet::stokes_pressure : Subnet::darcy_pressure;
    FieldValues f;
    f.velocity.resize(2 * points.size());
    f.pressure.resize(points.size());
    parallel_chunks(points.size(), [&](std::size_t b, std::size_t e) {
        const auto chunk = points.subspan(b, e - b);
        const Eigen::MatrixXd u = forward_batch(params[us], chunk, JetOrder::value);
        const Eigen::MatrixXd p = forward_batch(params[ps], chunk, JetOrder::value);
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            f.velocity[2 * (b + i)] = u(0, ii);
            f.velocity[2 * (b + i) + 1] = u(1, ii);
            f.pressure[b + i] = p(0, ii);
        }
    });
    return f;
}

inline FieldValues evaluate_exact(const ClosedFormSolution& exact, Region region, std::span<const Point> points) {
    FieldValues f;
    f.velocity.resize(2 * points.size());
    f.pressure.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto j = exact_jets(exact, region, points[i]);
        f.velocity[2 * i] = j.velocity[0].v;
        f.velocity[2 * i + 1] = j.velocity[1].v;
        f.pressure[i] = j.pressure.v;
    }
    return f;
}

struct ErrorMetrics {
    double l1 = 0.0;
    double l2 = 0.0;
};

/// Unknowns in table order.
enum class Unknown : int { stokes_velocity = 0, stokes_pressure = 1, darcy_velocity = 2, darcy_pressure = 3 };

inline constexpr std::array<const char*, 4> kUnknownNames{"U_S", "P_S", "U_D", "P_D"};

struct ErrorReport {
    std::optional<std::array<ErrorMetrics, 4>> errors;  // present iff the problem has an exact solution
    std::array<double, 3> interface_rms{};

    const ErrorMetrics& operator[](Unknown u) const { return errors.value()[static_cast<int>(u)]; }
};

/// Root-mean-square of the three interface residuals at n uniformly spaced points on the interface
/// (endpoints included), using the frame (n_S, t).
inline std::array<double, 3> interface_error(const CoupledParams& params, const ProblemSpec& spec, int n_points,
                                             Vec2 normal, Vec2 tangent) {
    if (n_points < 2) throw ConfigError("interface error needs at least 2 points");
    std::vector<Point> pts;
    for (int k = 0; k < n_points; ++k) pts.push_back(spec.geometry.interface_point(static_cast<double>(k) / (n_points - 1)));
    const auto us = forward_jets(params[Subnet::stokes_velocity], pts, JetOrder::first);
    const auto ps = forward_jets(params[Subnet::stokes_pressure], pts, JetOrder::value);
    const auto ud = forward_jets(params[Subnet::darcy_velocity], pts, JetOrder::value);
    const auto pd = forward_jets(params[Subnet::darcy_pressure], pts, JetOrder::value);
    std::array<double, 3> sums{};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const RegionJets<double> st{{us[i][0], us[i][1]}, ps[i][0]};
        const RegionJets<double> da{{ud[i][0], ud[i][1]}, pd[i][0]};
        const auto r = interface_residuals(st, da, pts[i], spec, normal, tangent);
        sums[0] += r.normal_velocity * r.normal_velocity;
        sums[1] += r.normal_stress * r.normal_stress;
        sums[2] += r.bjs * r.bjs;
    }
    for (double& s : sums) s = std::sqrt(s / n_points);
    return sums;
}

inline std::array<double, 3> interface_error(const CoupledParams& params, const ProblemSpec& spec, int n_points) {
    return interface_error(params, spec, n_points, spec.geometry.normal_stokes(), spec.geometry.tangent());
}

/// RMS of one boundary segment's residual at n uniformly spaced points along its edge.
inline double boundary_rms(const CoupledParams& params, const ProblemSpec& spec, Region region, Edge edge,
                           int n_points) {
    if (n_points < 2) throw ConfigError("boundary RMS needs at least 2 points");
    const BoundarySegment& seg = spec.segment_for(region, edge);
    std::vector<Point> pts;
    for (int k = 0; k < n_points; ++k)
        pts.push_back(edge_point(spec.geometry.rect(region), edge, static_cast<double>(k) / (n_points - 1)));
    const Subnet vs = region == Region::stokes ? Subnet::stokes_velocity : Subnet::darcy_velocity;
    const Subnet ps = region == Region::stokes ? Subnet::stokes_pressure : Subnet::darcy_pressure;
    const auto u = forward_jets(params[vs], pts, JetOrder::value);
    const auto p = forward_jets(params[ps], pts, JetOrder::value);
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const RegionJets<double> f{{u[i][0], u[i][1]}, p[i][0]};
        sum += boundary_residuals(f, region, pts[i], seg).squared_norm();
    }
    return std::sqrt(sum / n_points);
}

/// Relative errors on the grid (when an exact solution exists) and interface residual RMS.
inline ErrorReport evaluate(const CoupledParams& params, const ProblemSpec& spec, const EvalGrid& grid,
                            int interface_points) {
    ErrorReport report;
    report.interface_rms = interface_error(params, spec, interface_points);
    if (!spec.exact) return report;
    std::array<ErrorMetrics, 4> errs{};
    for (Region region : {Region::stokes, Region::darcy}) {
        const auto pts = grid.points(spec.geometry.rect(region));
        const FieldValues net = evaluate_network(params, region, pts);
        const FieldValues ex = evaluate_exact(*spec.exact, region, pts);
        const int u = region == Region::stokes ? 0 : 2;
        errs[u] = {rel_error(net.velocity, ex.velocity, 2, Norm::L1), rel_error(net.velocity, ex.velocity, 2, Norm::L2)};
        errs[u + 1] = {rel_error(net.pressure, ex.pressure, 1, Norm::L1),
                       rel_error(net.pressure, ex.pressure, 1, Norm::L2)};
    }
    report.errors = errs;
    return report;
}

inline std::string export_header(bool with_exact) {
    return with_exact ? "region,x,y,u1,u2,p,eu1,eu2,ep" : "region,x,y,u1,u2,p";
}

/// CSV of network (and exact, when available) fields on the grid: Stokes block, then Darcy block.
inline void export_fields(const CoupledParams& params, const ProblemSpec& spec, const EvalGrid& grid,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open export file '" + path + "' for writing");
    const bool with_exact = spec.exact.has_value();
    out << export_header(with_exact) << '\n';
    for (Region region : {Region::stokes, Region::darcy}) {
        const auto pts = grid.points(spec.geometry.rect(region));
        const FieldValues net = evaluate_network(params, region, pts);
        FieldValues ex;
        if (with_exact) ex = evaluate_exact(*spec.exact, region, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out << to_string(region) << ',' << format_double(pts[i].x) << ',' << format_double(pts[i].y) << ','
                << format_double(net.velocity[2 * i]) << ',' << format_double(net.velocity[2 * i + 1]) << ','
                << format_double(net.pressure[i]);
            if (with_exact)
                out << ',' << format_double(ex.velocity[2 * i]) << ',' << format_double(ex.velocity[2 * i + 1]) << ','
                    << format_double(ex.pressure[i]);
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing export file '" + path + "'");
}

}  // namespace cdnn
