#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cdnn/geometry.hpp"

using namespace cdnn;

namespace {

const CoupledGeometry kTest1({0, 1, 0, 1}, {0, 1, 1, 2});
const CoupledGeometry kTest5({0, 1, 1, 2}, {0, 1, 0, 1});

// Upper 0.999 quantile of the chi-square distribution with 99 degrees of freedom.
constexpr double kChi2Crit99 = 148.2304;

double chi_square(const std::vector<Point>& pts, const Rect& r) {
    std::array<int, 100> counts{};
    for (Point p : pts) {
        const int i = std::min(9, static_cast<int>((p.x - r.xmin) / r.width() * 10));
        const int j = std::min(9, static_cast<int>((p.y - r.ymin) / r.height() * 10));
        ++counts[j * 10 + i];
    }
    const double expected = static_cast<double>(pts.size()) / 100.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    return chi2;
}

}  // namespace

TEST(Geometry, InterfaceFrameOfTest1) {
    const auto [n, t] = interface_frame(kTest1);
    EXPECT_EQ(n, (Vec2{0, 1}));
    EXPECT_EQ(t, (Vec2{-1, 0}));
    EXPECT_EQ(kTest1.normal_darcy(), (Vec2{0, -1}));
}

TEST(Geometry, InterfaceFrameOfTest5) {
    EXPECT_EQ(kTest5.normal_stokes(), (Vec2{0, -1}));
    EXPECT_EQ(kTest5.interface_edge(Region::stokes), Edge::bottom);
    EXPECT_EQ(kTest5.interface_edge(Region::darcy), Edge::top);
}

TEST(Geometry, FrameIsOrthonormalForEveryAdjacency) {
    const Rect s{0, 1, 0, 1};
    const std::vector<Rect> neighbours{{0, 1, 1, 3}, {0, 1, -2, 0}, {1, 4, 0, 1}, {-0.5, 0, 0, 1}};
    for (const Rect& d : neighbours) {
        const CoupledGeometry g(s, d);
        const Vec2 n = g.normal_stokes(), t = g.tangent();
        EXPECT_EQ(dot(n, t), 0.0);
        EXPECT_EQ(dot(n, n), 1.0);
        EXPECT_EQ(dot(t, t), 1.0);
        EXPECT_EQ(g.normal_darcy(), -n);
        // n_S points into the Darcy rectangle.
        const Point mid = g.interface_point(0.5);
        EXPECT_TRUE(d.contains({mid.x + 0.1 * n.x, mid.y + 0.1 * n.y}));
        EXPECT_FALSE(s.contains({mid.x + 0.1 * n.x, mid.y + 0.1 * n.y}));
    }
}

TEST(Geometry, RejectsRectanglesWithoutSharedFullEdge) {
    EXPECT_THROW(CoupledGeometry({0, 1, 0, 1}, {0, 2, 1, 2}), ConfigError);
    EXPECT_THROW(CoupledGeometry({0, 1, 0, 1}, {2, 3, 0, 1}), ConfigError);
    EXPECT_THROW(CoupledGeometry({0, 1, 0, 1}, {0.5, 1.5, 0.5, 1.5}), ConfigError);
    EXPECT_THROW(CoupledGeometry({0, 1, 0, 0}, {0, 1, 0, 1}), ConfigError);
}

TEST(Geometry, OuterEdgesExcludeInterface) {
    const auto s = kTest1.outer_edges(Region::stokes);
    EXPECT_EQ(s, (std::vector<Edge>{Edge::bottom, Edge::right, Edge::left}));
    const auto d = kTest1.outer_edges(Region::darcy);
    EXPECT_EQ(d, (std::vector<Edge>{Edge::right, Edge::top, Edge::left}));
    EXPECT_DOUBLE_EQ(kTest1.outer_length(Region::stokes), 3.0);
}

TEST(Geometry, EdgeStringsRoundTrip) {
    for (Edge e : kAllEdges) EXPECT_EQ(edge_from_string(to_string(e)), e);
    EXPECT_THROW(edge_from_string("diagonal"), ConfigError);
}

TEST(Sampling, EmptySizesGiveEmptyBatch) {
    Rng rng(1);
    const auto b = draw_batch(kTest1, BatchSizes{0, 0, 0, 0, 0}, rng);
    EXPECT_TRUE(b.interior_stokes.empty());
    EXPECT_TRUE(b.interior_darcy.empty());
    EXPECT_TRUE(b.boundary_stokes.empty());
    EXPECT_TRUE(b.boundary_darcy.empty());
    EXPECT_TRUE(b.interface.empty());
}

TEST(Sampling, SameSeedSameBatch) {
    Rng r1(77), r2(77);
    const auto a = draw_batch(kTest5, BatchSizes{}, r1);
    const auto b = draw_batch(kTest5, BatchSizes{}, r2);
    ASSERT_EQ(a.interior_stokes.size(), 400u);
    for (std::size_t i = 0; i < a.interior_stokes.size(); ++i) EXPECT_EQ(a.interior_stokes[i], b.interior_stokes[i]);
    for (std::size_t i = 0; i < a.boundary_darcy.size(); ++i) {
        EXPECT_EQ(a.boundary_darcy[i].point, b.boundary_darcy[i].point);
        EXPECT_EQ(a.boundary_darcy[i].edge, b.boundary_darcy[i].edge);
    }
    for (std::size_t i = 0; i < a.interface.size(); ++i) EXPECT_EQ(a.interface[i], b.interface[i]);
}

TEST(Sampling, CountsAndContainment) {
    const CoupledGeometry g({-0.5, 1.5, 0, 2}, {-0.5, 1.5, -2, 0});
    Rng rng(3);
    const BatchSizes sizes{123, 45, 67, 89, 10};
    const auto b = draw_batch(g, sizes, rng);
    ASSERT_EQ(b.interior_stokes.size(), 123u);
    ASSERT_EQ(b.interior_darcy.size(), 45u);
    ASSERT_EQ(b.boundary_stokes.size(), 67u);
    ASSERT_EQ(b.boundary_darcy.size(), 89u);
    ASSERT_EQ(b.interface.size(), 10u);
    for (Point p : b.interior_stokes) EXPECT_TRUE(g.stokes().contains(p));
    for (Point p : b.interior_darcy) EXPECT_TRUE(g.darcy().contains(p));
    for (Point p : b.interface) {
        EXPECT_EQ(p.y, 0.0);
        EXPECT_TRUE(g.on_interface(p, 0.0));
    }
    for (const auto* group : {&b.boundary_stokes, &b.boundary_darcy}) {
        const Region region = group == &b.boundary_stokes ? Region::stokes : Region::darcy;
        const Rect& r = g.rect(region);
        for (const auto& s : *group) {
            EXPECT_NE(s.edge, g.interface_edge(region));
            EXPECT_TRUE(r.contains(s.point));
            switch (s.edge) {
            case Edge::bottom: EXPECT_EQ(s.point.y, r.ymin); break;
            case Edge::top: EXPECT_EQ(s.point.y, r.ymax); break;
            case Edge::left: EXPECT_EQ(s.point.x, r.xmin); break;
            case Edge::right: EXPECT_EQ(s.point.x, r.xmax); break;
            }
        }
    }
}

TEST(Sampling, CornersBelongToExactlyOneEdge) {
    const Rect r{0, 1, 0, 1};
    EXPECT_EQ(edge_point(r, Edge::bottom, 0.0), (Point{0, 0}));
    EXPECT_EQ(edge_point(r, Edge::right, 0.0), (Point{1, 0}));
    EXPECT_EQ(edge_point(r, Edge::top, 0.0), (Point{1, 1}));
    EXPECT_EQ(edge_point(r, Edge::left, 0.0), (Point{0, 1}));
}

TEST(Sampling, InteriorMeanWithinCltBound) {
    Rng rng(12345);
    const auto b = draw_batch(kTest1, BatchSizes{100000, 0, 0, 0, 0}, rng);
    double mx = 0.0, my = 0.0;
    for (Point p : b.interior_stokes) {
        mx += p.x;
        my += p.y;
    }
    mx /= 1e5;
    my /= 1e5;
    EXPECT_NEAR(mx, 0.5, 0.005);
    EXPECT_NEAR(my, 0.5, 0.005);
}

TEST(Sampling, ChiSquareUniformityOnBothRectangles) {
    Rng rng(2718);
    const CoupledGeometry g({0, 1, 0, 0.5}, {0, 1, 0.5, 1});
    const auto b = draw_batch(g, BatchSizes{100000, 100000, 0, 0, 0}, rng);
    EXPECT_LT(chi_square(b.interior_stokes, g.stokes()), kChi2Crit99);
    EXPECT_LT(chi_square(b.interior_darcy, g.darcy()), kChi2Crit99);
}

TEST(Sampling, BoundaryIsUniformInArcLength) {
    // Stokes outer boundary of test 1 has three unit edges: each should get about a third.
    Rng rng(8);
    const auto b = draw_batch(kTest1, BatchSizes{0, 0, 30000, 0, 0}, rng);
    std::array<int, 4> per_edge{};
    for (const auto& s : b.boundary_stokes) ++per_edge[static_cast<int>(s.edge)];
    EXPECT_EQ(per_edge[static_cast<int>(Edge::top)], 0);
    for (Edge e : {Edge::bottom, Edge::right, Edge::left}) EXPECT_NEAR(per_edge[static_cast<int>(e)], 10000, 400);
}
