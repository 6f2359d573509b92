#pragma once

// Two axis-aligned rectangles sharing one full edge (the interface), and uniform samplers for
// interiors, outer boundaries and the interface.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cdnn/errors.hpp"
#include "cdnn/point.hpp"
#include "cdnn/rng.hpp"

namespace cdnn {

struct Rect {
    double xmin = 0.0;
    double xmax = 1.0;
    double ymin = 0.0;
    double ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }

    bool contains(Point p, double tol = 0.0) const {
        return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
    }
};

enum class Region { stokes, darcy };

/// Edges in counter-clockwise order; this is also the priority order for corner ownership.
enum class Edge { bottom = 0, right = 1, top = 2, left = 3 };

inline constexpr std::array<Edge, 4> kAllEdges{Edge::bottom, Edge::right, Edge::top, Edge::left};

inline std::string to_string(Edge e) {
    switch (e) {
    case Edge::bottom: return "bottom";
    case Edge::right: return "right";
    case Edge::top: return "top";
    case Edge::left: return "left";
    }
    return "?";
}

inline Edge edge_from_string(const std::string& s) {
    if (s == "bottom") return Edge::bottom;
    if (s == "right") return Edge::right;
    if (s == "top") return Edge::top;
    if (s == "left") return Edge::left;
    throw ConfigError("unknown edge '" + s + "' (expected bottom, right, top, left)");
}

inline std::string to_string(Region r) { return r == Region::stokes ? "S" : "D"; }

inline Edge opposite(Edge e) { return static_cast<Edge>((static_cast<int>(e) + 2) % 4); }

inline Vec2 outward_normal(Edge e) {
    switch (e) {
    case Edge::bottom: return {0.0, -1.0};
    case Edge::right: return {1.0, 0.0};
    case Edge::top: return {0.0, 1.0};
    case Edge::left: return {-1.0, 0.0};
    }
    return {};
}

inline double edge_length(const Rect& r, Edge e) {
    return (e == Edge::bottom || e == Edge::top) ? r.width() : r.height();
}

/// Point at arc-length fraction s in [0, 1) along edge `e`, walking counter-clockwise.
/// s = 0 is the edge's start corner, which the edge owns.
inline Point edge_point(const Rect& r, Edge e, double s) {
    switch (e) {
    case Edge::bottom: return {r.xmin + s * r.width(), r.ymin};
    case Edge::right: return {r.xmax, r.ymin + s * r.height()};
    case Edge::top: return {r.xmax - s * r.width(), r.ymax};
    case Edge::left: return {r.xmin, r.ymax - s * r.height()};
    }
    return {};
}

class CoupledGeometry {
public:
    /// Throws ConfigError unless the rectangles have positive area and share exactly one full edge.
    CoupledGeometry(const Rect& stokes, const Rect& darcy) : stokes_(stokes), darcy_(darcy) {
        if (!(stokes.area() > 0.0) || !(darcy.area() > 0.0)) throw ConfigError("subdomains must have positive area");
        int shared = 0;
        for (Edge e : kAllEdges) {
            if (shares_full_edge(e)) {
                iface_edge_ = e;
                ++shared;
            }
        }
        if (shared != 1) throw ConfigError("Stokes and Darcy rectangles must share exactly one full edge");
        n_s_ = outward_normal(iface_edge_);
        t_ = {-n_s_.y, n_s_.x};
    }

    const Rect& rect(Region r) const { return r == Region::stokes ? stokes_ : darcy_; }
    const Rect& stokes() const { return stokes_; }
    const Rect& darcy() const { return darcy_; }

    /// Unit normal on the interface pointing from the Stokes into the Darcy region.
    Vec2 normal_stokes() const { return n_s_; }
    Vec2 normal_darcy() const { return -n_s_; }
    /// Unit tangent: the Stokes normal rotated by +90 degrees.
    Vec2 tangent() const { return t_; }

    /// Edge of `region` that coincides with the interface.
    Edge interface_edge(Region region) const {
        return region == Region::stokes ? iface_edge_ : opposite(iface_edge_);
    }

    /// Edges of `region` other than the interface, in priority order.
    std::vector<Edge> outer_edges(Region region) const {
        std::vector<Edge> edges;
        for (Edge e : kAllEdges)
            if (e != interface_edge(region)) edges.push_back(e);
        return edges;
    }

    double outer_length(Region region) const {
        double len = 0.0;
        for (Edge e : outer_edges(region)) len += edge_length(rect(region), e);
        return len;
    }

    double interface_length() const { return edge_length(stokes_, iface_edge_); }

    /// Point at fraction s in [0, 1] along the interface.
    Point interface_point(double s) const { return edge_point(stokes_, iface_edge_, s); }

    bool on_interface(Point p, double tol = 1e-12) const {
        const Rect& r = stokes_;
        switch (iface_edge_) {
        case Edge::bottom: return std::abs(p.y - r.ymin) <= tol && p.x >= r.xmin - tol && p.x <= r.xmax + tol;
        case Edge::top: return std::abs(p.y - r.ymax) <= tol && p.x >= r.xmin - tol && p.x <= r.xmax + tol;
        case Edge::left: return std::abs(p.x - r.xmin) <= tol && p.y >= r.ymin - tol && p.y <= r.ymax + tol;
        case Edge::right: return std::abs(p.x - r.xmax) <= tol && p.y >= r.ymin - tol && p.y <= r.ymax + tol;
        }
        return false;
    }

private:
    bool shares_full_edge(Edge e) const {
        const Rect& s = stokes_;
        const Rect& d = darcy_;
        switch (e) {
        case Edge::top: return s.ymax == d.ymin && s.xmin == d.xmin && s.xmax == d.xmax;
        case Edge::bottom: return s.ymin == d.ymax && s.xmin == d.xmin && s.xmax == d.xmax;
        case Edge::right: return s.xmax == d.xmin && s.ymin == d.ymin && s.ymax == d.ymax;
        case Edge::left: return s.xmin == d.xmax && s.ymin == d.ymin && s.ymax == d.ymax;
        }
        return false;
    }

    Rect stokes_;
    Rect darcy_;
    Edge iface_edge_ = Edge::top;
    Vec2 n_s_;
    Vec2 t_;
};

/// (n_S, t) of the interface.
inline std::pair<Vec2, Vec2> interface_frame(const CoupledGeometry& geom) {
    return {geom.normal_stokes(), geom.tangent()};
}

struct BoundarySample {
    Point point;
    Edge edge;
};

struct SampleBatch {
    std::vector<Point> interior_stokes;
    std::vector<Point> interior_darcy;
    std::vector<BoundarySample> boundary_stokes;
    std::vector<BoundarySample> boundary_darcy;
    std::vector<Point> interface;
};

struct BatchSizes {
    std::size_t interior_stokes = 400;
    std::size_t interior_darcy = 400;
    std::size_t boundary_stokes = 100;
    std::size_t boundary_darcy = 100;
    std::size_t interface = 100;
};

namespace detail {

inline Point sample_interior(const Rect& r, Rng& rng) {
    const double x = rng.uniform(r.xmin, r.xmax);
    const double y = rng.uniform(r.ymin, r.ymax);
    return {x, y};
}

inline BoundarySample sample_outer_boundary(const CoupledGeometry& g, Region region, Rng& rng) {
    const auto edges = g.outer_edges(region);
    const Rect& r = g.rect(region);
    double s = rng.uniform() * g.outer_length(region);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const double len = edge_length(r, edges[k]);
        if (s < len || k + 1 == edges.size()) {
            const double frac = std::min(s / len, std::nextafter(1.0, 0.0));
            return {edge_point(r, edges[k], frac), edges[k]};
        }
        s -= len;
    }
    return {};  // unreachable: a region always has three outer edges
}

}  // namespace detail

/// Uniform i.i.d. collocation points. Draw order: Stokes interior, Darcy interior, Stokes boundary,
/// Darcy boundary, interface.
inline SampleBatch draw_batch(const CoupledGeometry& geom, const BatchSizes& sizes, Rng& rng) {
    SampleBatch b;
    b.interior_stokes.reserve(sizes.interior_stokes);
    b.interior_darcy.reserve(sizes.interior_darcy);
    b.boundary_stokes.reserve(sizes.boundary_stokes);
    b.boundary_darcy.reserve(sizes.boundary_darcy);
    b.interface.reserve(sizes.interface);
    for (std::size_t i = 0; i < sizes.interior_stokes; ++i) b.interior_stokes.push_back(detail::sample_interior(geom.stokes(), rng));
    for (std::size_t i = 0; i < sizes.interior_darcy; ++i) b.interior_darcy.push_back(detail::sample_interior(geom.darcy(), rng));
    for (std::size_t i = 0; i < sizes.boundary_stokes; ++i)
        b.boundary_stokes.push_back(detail::sample_outer_boundary(geom, Region::stokes, rng));
    for (std::size_t i = 0; i < sizes.boundary_darcy; ++i)
        b.boundary_darcy.push_back(detail::sample_outer_boundary(geom, Region::darcy, rng));
    for (std::size_t i = 0; i < sizes.interface; ++i) b.interface.push_back(geom.interface_point(rng.uniform()));
    return b;
}

}  // namespace cdnn
