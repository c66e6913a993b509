#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "roadsearch/road.hpp"
#include "roadsearch/scenario.hpp"
#include "roadsearch/serialization.hpp"
#include "test_support.hpp"

using namespace roadsearch;

namespace {

std::vector<Constraint> constraints_of(const ValidityReport& r) {
  std::vector<Constraint> out;
  for (const auto& v : r.violations) out.push_back(v.constraint_id);
  return out;
}

ControlPolyline straight() {
  return ControlPolyline::in_map({{20, 100}, {60, 100}, {100, 100}, {140, 100}, {180, 100}}, 200);
}

ControlPolyline along_edge() {
  return ControlPolyline::in_map({{20, 2}, {60, 2}, {100, 2}, {140, 2}, {180, 2}}, 200);
}

// U-turn of radius 15 between two straights.
ControlPolyline hairpin() {
  std::vector<Vec2> pts{{60, 40}, {60, 80}, {60, 110}};
  for (int k = 1; k <= 6; ++k) {
    const double th = std::numbers::pi * k / 6.0;
    pts.push_back({75.0 - 15.0 * std::cos(th), 110.0 + 15.0 * std::sin(th)});
  }
  pts.push_back({90, 80});
  pts.push_back({90, 40});
  return ControlPolyline::in_map(std::move(pts), 200);
}

// Lemniscate of Bernoulli, gentle enough to pass the radius check.
ControlPolyline figure_eight() {
  std::vector<Vec2> pts;
  const int n = 26;
  for (int k = -1; k <= n - 1; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n + 0.3;
    const double d = 1.0 + std::sin(t) * std::sin(t);
    pts.push_back({250.0 + 210.0 * std::cos(t) / d, 250.0 + 210.0 * std::sin(t) * std::cos(t) / d});
  }
  return ControlPolyline::in_map(std::move(pts), 500);
}

}  // namespace

TEST(Validity, StraightRoadIsValid) {
  const auto r = check_road(straight(), RoadSpec{});
  EXPECT_TRUE(r.is_valid);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Validity, RoadAlongMapEdgeLeavesMap) {
  const auto r = check_road(along_edge(), RoadSpec{});
  EXPECT_FALSE(r.is_valid);
  EXPECT_EQ(constraints_of(r), std::vector<Constraint>{Constraint::kOutOfMap});
}

TEST(Validity, FigureEightSelfIntersects) {
  RoadSpec spec;
  spec.map_size = 500;
  SampledRoad road;
  const auto r = check_road(figure_eight(), spec, &road);
  EXPECT_EQ(constraints_of(r), std::vector<Constraint>{Constraint::kSelfIntersect});
  EXPECT_GE(min_turn_radius(road), spec.min_radius);
}

TEST(Validity, HairpinTooSharp) {
  SampledRoad road;
  const RoadSpec spec;
  const auto r = check_road(hairpin(), spec, &road);
  EXPECT_EQ(constraints_of(r), std::vector<Constraint>{Constraint::kTooSharpTurn});
  EXPECT_LT(min_turn_radius(road), spec.min_radius);
}

TEST(Validity, HairpinPassesWithLowerMinimum) {
  RoadSpec spec;
  spec.min_radius = 3.0;
  EXPECT_TRUE(check_road(hairpin(), spec).is_valid);
}

TEST(Validity, StartEqualsEnd) {
  // Diamond loop: the sampled road runs from P1 back to P5 == P1.
  const auto cp = ControlPolyline::in_map(
      {{50, 100}, {100, 50}, {150, 100}, {100, 150}, {50, 100}, {100, 50}, {150, 100}}, 200);
  RoadSpec spec;
  spec.min_radius = 1.0;
  const auto r = check_road(cp, spec);
  EXPECT_TRUE(r.has(Constraint::kStartEqualsEnd));
}

TEST(Validity, MalformedChromosomes) {
  const RoadSpec spec;
  const auto short_cp = ControlPolyline::in_map({{10, 10}, {20, 20}, {30, 30}}, 200);
  EXPECT_EQ(constraints_of(check_road(short_cp, spec)),
            std::vector<Constraint>{Constraint::kMalformed});

  auto outside = straight();
  outside.points[2].x = 250;
  EXPECT_EQ(constraints_of(check_road(outside, spec)),
            std::vector<Constraint>{Constraint::kMalformed});

  auto dup = straight();
  dup.points[2] = dup.points[1];
  EXPECT_TRUE(dup.defect().has_value());

  auto nan = straight();
  nan.points[0].y = std::nan("");
  EXPECT_FALSE(nan.well_formed());
  EXPECT_THROW(catmull_rom_sample(nan, spec), std::invalid_argument);
}

TEST(Validity, ConstraintNames) {
  EXPECT_EQ(to_string(Constraint::kOutOfMap), "out_of_map");
  EXPECT_EQ(to_string(Constraint::kSelfIntersect), "self_intersect");
  EXPECT_EQ(to_string(Constraint::kTooSharpTurn), "too_sharp_turn");
  EXPECT_EQ(to_string(Constraint::kStartEqualsEnd), "start_equals_end");
  EXPECT_EQ(to_string(Constraint::kMalformed), "malformed");
}

TEST(Validity, RoadSpecCheck) {
  RoadSpec s;
  EXPECT_NO_THROW(s.check());
  s.lane_width = 0;
  EXPECT_THROW(s.check(), std::invalid_argument);
  s = {};
  s.num_lanes = 3;
  EXPECT_THROW(s.check(), std::invalid_argument);
  s = {};
  s.samples_per_segment = 1;
  EXPECT_THROW(s.check(), std::invalid_argument);
}

TEST(SampledRoad, LanesFollowTravelDirection) {
  const auto road = catmull_rom_sample(straight(), RoadSpec{});
  // Travel is +x, so the right lane center sits 2 m below the centerline.
  for (const Vec2 p : road.center_polyline_right_lane) EXPECT_DOUBLE_EQ(p.y, 98.0);
  EXPECT_DOUBLE_EQ(road.length(), 80.0);
  EXPECT_DOUBLE_EQ(std::abs(signed_area(road.lane_polygon_right)), 80.0 * 4.0);
  EXPECT_DOUBLE_EQ(std::abs(signed_area(road.road_polygon)), 80.0 * 8.0);
  EXPECT_EQ(road.start(), (Vec2{60, 100}));
  EXPECT_EQ(road.goal(), (Vec2{140, 100}));
}

TEST(SampledRoad, LocalRadiusOnCircle) {
  Polyline circle;
  for (int k = 0; k <= 100; ++k) {
    const double a = std::numbers::pi * k / 100.0;
    circle.push_back({100 + 60 * std::cos(a), 100 + 60 * std::sin(a)});
  }
  const auto road = make_sampled_road(circle, RoadSpec{});
  ASSERT_EQ(road.local_radius.size(), circle.size());
  for (double r : road.local_radius) EXPECT_NEAR(r, 60.0, 1e-9);
  EXPECT_THROW(make_sampled_road(Polyline{{0, 0}}, RoadSpec{}), std::invalid_argument);
}

TEST(Serialization, RoadRoundTrip) {
  RoadSpec spec;
  spec.map_size = 300;
  spec.min_radius = 20;
  const auto cp = ControlPolyline::in_map({{1.25, 2.5}, {30, 40}, {60, 70.125}, {90, 100}}, 300);
  const auto [back, back_spec] = road_from_json(road_to_json(cp, spec));
  EXPECT_EQ(back, cp);
  EXPECT_EQ(back_spec, spec);
  EXPECT_THROW(road_from_json(Json{{"control_points", Json::array()}}), std::invalid_argument);
}

TEST(Serialization, OutcomeRoundTrip) {
  ScenarioOutcome o;
  o.scenario_id = "s000004";
  o.valid = true;
  o.executed = true;
  o.failures.push_back({12.5, 0.75, "EEFG", 31});
  o.max_oob_fraction = 0.75;
  o.fitness = -0.4;
  o.triage = "note";
  EXPECT_EQ(outcome_from_json(outcome_to_json(o)), o);
  ScenarioOutcome invalid;
  invalid.scenario_id = "s1";
  EXPECT_EQ(outcome_from_json(outcome_to_json(invalid)), invalid);
}

TEST(Serialization, ScenarioRoundTrip) {
  IdSource ids("run-");
  ScenarioSettings settings;
  settings.speed_limit_kmh = 70;
  settings.tolerance_threshold = 0.85;
  const auto s = new_scenario(straight(), settings, ids);
  EXPECT_EQ(s.id, "run-000000");
  EXPECT_EQ(scenario_from_json(scenario_to_json(s)), s);
  EXPECT_EQ(ids.next(), "run-000001");
}

TEST(Scenario, CheckRanges) {
  TestScenario s;
  EXPECT_NO_THROW(s.check());
  s.tolerance_threshold = 0.0;
  EXPECT_THROW(s.check(), std::invalid_argument);
  s.tolerance_threshold = 1.0;
  EXPECT_NO_THROW(s.check());
  s.driving.speed_limit_kmh = -5;
  EXPECT_THROW(s.check(), std::invalid_argument);
}

TEST(Fixtures, FailureRoadIsValid) {
  EXPECT_TRUE(check_road(rs_test::load_road("failure_road.json"), RoadSpec{}).is_valid);
}
