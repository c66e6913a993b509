#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "roadsearch/geometry.hpp"
#include "roadsearch/road.hpp"
#include "test_support.hpp"

using namespace roadsearch;

namespace {

// Catmull-Rom as an explicit basis matrix product [1 t t^2 t^3] M [P0..P3].
Vec2 basis_oracle(const std::array<Vec2, 4>& p, double t) {
  static constexpr double M[4][4] = {
      {0.0, 1.0, 0.0, 0.0},
      {-0.5, 0.0, 0.5, 0.0},
      {1.0, -2.5, 2.0, -0.5},
      {-0.5, 1.5, -1.5, 0.5},
  };
  const double tp[4] = {1.0, t, t * t, t * t * t};
  Vec2 out;
  for (int col = 0; col < 4; ++col) {
    double w = 0.0;
    for (int row = 0; row < 4; ++row) w += tp[row] * M[row][col];
    out += p[col] * w;
  }
  return out;
}

constexpr double kTol = 1e-9;

void expect_near(Vec2 a, Vec2 b, double tol = kTol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
}

RoadSpec loose_spec() {
  RoadSpec s;
  s.map_size = 200.0;
  return s;
}

}  // namespace

TEST(CatmullRom, MatchesBasisMatrix) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(0.0, 200.0), t01(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<Vec2, 4> p{};
    for (auto& v : p) v = {c(rng), c(rng)};
    const double t = t01(rng);
    expect_near(catmull_rom_point(p[0], p[1], p[2], p[3], t), basis_oracle(p, t), 1e-9);
  }
}

TEST(CatmullRom, EndpointsAreKnots) {
  const Vec2 a{1, 2}, b{5, 3}, c{9, -1}, d{12, 4};
  EXPECT_EQ(catmull_rom_point(a, b, c, d, 0.0), b);
  expect_near(catmull_rom_point(a, b, c, d, 1.0), c, 1e-12);
}

TEST(CatmullRom, SampleCountAndKnotsOnRandomChromosomes) {
  std::mt19937_64 rng(2);
  const RoadSpec spec = loose_spec();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cp = rs_test::random_chromosome(rng);
    const auto road = catmull_rom_sample(cp, spec);
    const std::size_t m = cp.size();
    const auto per = static_cast<std::size_t>(spec.samples_per_segment);
    ASSERT_EQ(road.samples.size(), (m - 3) * (per - 1) + 1);
    // Interior knots P1..P_{m-2} appear verbatim.
    for (std::size_t k = 1; k + 1 < m; ++k) {
      EXPECT_EQ(road.samples[(k - 1) * (per - 1)], cp.points[k]);
    }
    for (std::size_t s = 0; s + 3 < m; ++s) {
      const std::array<Vec2, 4> p{cp.points[s], cp.points[s + 1], cp.points[s + 2], cp.points[s + 3]};
      for (std::size_t k = 0; k < per - 1; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(per - 1);
        expect_near(road.samples[s * (per - 1) + k], basis_oracle(p, t), 1e-9);
      }
    }
  }
}

TEST(CatmullRom, CollinearControlPointsGiveCollinearSamples) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RoadSpec spec = loose_spec();
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 origin{20.0 + 20.0 * u(rng), 20.0 + 20.0 * u(rng)};
    const double angle = 0.5 * std::numbers::pi * u(rng);
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    std::vector<Vec2> pts;
    double s = 0.0;
    const int m = 4 + static_cast<int>(u(rng) * 6.0);
    for (int i = 0; i < m; ++i) {
      s += 5.0 + 10.0 * u(rng);
      pts.push_back(origin + dir * s);
    }
    const auto road = catmull_rom_sample(ControlPolyline::in_map(pts, 400.0), spec);
    for (const Vec2 q : road.samples) {
      EXPECT_NEAR(cross(dir, q - origin), 0.0, 1e-9);
    }
  }
}

TEST(CatmullRom, MirrorSymmetry) {
  std::mt19937_64 rng(4);
  const RoadSpec spec = loose_spec();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cp = rs_test::random_chromosome(rng);
    auto mirrored = cp;
    for (auto& p : mirrored.points) p.x = 200.0 - p.x;
    const auto a = catmull_rom_sample(cp, spec);
    const auto b = catmull_rom_sample(mirrored, spec);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      expect_near(b.samples[i], {200.0 - a.samples[i].x, a.samples[i].y});
    }
  }
}

TEST(CatmullRom, Locality) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(0.0, 200.0);
  const RoadSpec spec = loose_spec();
  const auto per = static_cast<std::size_t>(spec.samples_per_segment - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cp = rs_test::random_chromosome(rng);
    std::uniform_int_distribution<std::size_t> pick(0, cp.size() - 1);
    const std::size_t k = pick(rng);
    auto moved = cp;
    moved.points[k] = {c(rng), c(rng)};
    const auto a = catmull_rom_sample(cp, spec);
    const auto b = catmull_rom_sample(moved, spec);
    // Segment s spans samples [s*per, (s+1)*per] and depends on P_s..P_{s+3}.
    for (std::size_t s = 0; s + 3 < cp.size(); ++s) {
      if (k >= s && k <= s + 3) continue;
      for (std::size_t i = s * per; i <= (s + 1) * per; ++i) {
        EXPECT_EQ(a.samples[i], b.samples[i]) << "segment " << s << " moved point " << k;
      }
    }
  }
}

TEST(TurnRadius, ExactCircles) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> radius(1.0, 500.0), phase(0.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = radius(rng);
    const double p = phase(rng);
    const int n = 8 + trial % 40;
    Polyline pts;
    for (int k = 0; k < n; ++k) {
      const double a = p + 1.5 * std::numbers::pi * k / (n - 1);
      pts.push_back({300.0 + r * std::cos(a), -40.0 + r * std::sin(a)});
    }
    EXPECT_NEAR(min_turn_radius(pts) / r, 1.0, 1e-6);
  }
}

TEST(TurnRadius, CollinearIsInfinite) {
  EXPECT_TRUE(std::isinf(circumradius({0, 0}, {1, 1}, {2, 2})));
  EXPECT_DOUBLE_EQ(circumradius({1, 0}, {0, 1}, {-1, 0}), 1.0);
}

TEST(TurnRadius, NeedsThreeSamples) {
  const Polyline two{{0, 0}, {1, 0}};
  EXPECT_THROW(min_turn_radius(two), std::invalid_argument);
}

TEST(Geometry, SignedAreaOrientation) {
  const Polygon ccw{{0, 0}, {2, 0}, {2, 3}, {0, 3}};
  EXPECT_DOUBLE_EQ(signed_area(ccw), 6.0);
  const Polygon cw(ccw.rbegin(), ccw.rend());
  EXPECT_DOUBLE_EQ(signed_area(cw), -6.0);
}

TEST(Geometry, CumulativeLengths) {
  const Polyline p{{0, 0}, {3, 4}, {3, 10}};
  const auto arcs = cumulative_lengths(p);
  ASSERT_EQ(arcs.size(), 3u);
  EXPECT_DOUBLE_EQ(arcs[0], 0.0);
  EXPECT_DOUBLE_EQ(arcs[1], 5.0);
  EXPECT_DOUBLE_EQ(arcs[2], 11.0);
}

TEST(Geometry, SegmentIntersection) {
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 0}, {2, 0}, {3, 5}));  // touching
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));  // overlapping
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 1}, {0, 1}, {0.4, 0.8}));
}

TEST(Geometry, PolygonSelfIntersection) {
  const Polygon square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_FALSE(polygon_self_intersects(square));
  const Polygon bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_TRUE(polygon_self_intersects(bowtie));
}

TEST(Geometry, ClipToConvexArea) {
  const Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const Polygon window{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_DOUBLE_EQ(std::abs(signed_area(clip_to_convex(square, window))), 1.0);
  const Polygon cw_window(window.rbegin(), window.rend());
  EXPECT_DOUBLE_EQ(std::abs(signed_area(clip_to_convex(square, cw_window))), 1.0);
  const Polygon far{{10, 10}, {11, 10}, {11, 11}, {10, 11}};
  EXPECT_DOUBLE_EQ(std::abs(signed_area(clip_to_convex(square, far))), 0.0);
}

TEST(Geometry, ClipConcaveSubject) {
  // L-shape of area 3 clipped by a window covering its notch.
  const Polygon ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  const Polygon window{{0.5, 0.5}, {2, 0.5}, {2, 2}, {0.5, 2}};
  EXPECT_NEAR(std::abs(signed_area(clip_to_convex(ell, window))), 1.25, 1e-12);
}

TEST(Geometry, ProjectionOntoPolyline) {
  const Polyline p{{0, 0}, {10, 0}, {10, 10}};
  const auto a = project_to_polyline({4, 3}, p);
  EXPECT_DOUBLE_EQ(a.arc_length, 4.0);
  EXPECT_DOUBLE_EQ(a.distance, 3.0);
  EXPECT_EQ(a.segment, 0u);
  const auto b = project_to_polyline({12, 6}, p);
  EXPECT_DOUBLE_EQ(b.arc_length, 16.0);
  EXPECT_DOUBLE_EQ(b.distance, 2.0);
  EXPECT_EQ(b.segment, 1u);
  EXPECT_THROW(project_to_polyline({0, 0}, Polyline{{1, 1}}), std::invalid_argument);
}

TEST(Geometry, PointAtArcClamps) {
  const Polyline p{{0, 0}, {10, 0}, {10, 10}};
  const auto arcs = cumulative_lengths(p);
  EXPECT_EQ(point_at_arc(p, arcs, -5.0), (Vec2{0, 0}));
  EXPECT_EQ(point_at_arc(p, arcs, 15.0), (Vec2{10, 5}));
  EXPECT_EQ(point_at_arc(p, arcs, 99.0), (Vec2{10, 10}));
}

TEST(Geometry, ClipPolylineInterpolatesEnds) {
  const Polyline p{{0, 0}, {10, 0}, {10, 10}};
  const auto arcs = cumulative_lengths(p);
  const auto piece = clip_polyline(p, arcs, 5.0, 12.0);
  ASSERT_EQ(piece.size(), 3u);
  EXPECT_EQ(piece.front(), (Vec2{5, 0}));
  EXPECT_EQ(piece[1], (Vec2{10, 0}));
  EXPECT_EQ(piece.back(), (Vec2{10, 2}));
}

TEST(Geometry, OrientedRectangle) {
  const auto r = oriented_rectangle({1, 1}, 0.0, 4.0, 2.0);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(signed_area(r), 8.0);
  for (const Vec2 v : r) {
    EXPECT_DOUBLE_EQ(std::abs(v.x - 1.0), 2.0);
    EXPECT_DOUBLE_EQ(std::abs(v.y - 1.0), 1.0);
  }
  const auto turned = oriented_rectangle({0, 0}, std::numbers::pi / 2, 4.0, 2.0);
  EXPECT_NEAR(signed_area(turned), 8.0, 1e-12);
}
