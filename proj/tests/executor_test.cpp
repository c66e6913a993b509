#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "roadsearch/executor.hpp"
#include "roadsearch/scenario.hpp"
#include "test_support.hpp"

using namespace roadsearch;

namespace {

TestScenario scenario_for(ControlPolyline cp, std::optional<double> limit = std::nullopt,
                          double tolerance = 0.5) {
  TestScenario s;
  s.id = "t";
  s.road = std::move(cp);
  s.driving.speed_limit_kmh = limit;
  s.tolerance_threshold = tolerance;
  return s;
}

ControlPolyline straight_x() {
  return ControlPolyline::in_map({{10, 100}, {40, 100}, {100, 100}, {160, 100}, {190, 100}}, 200);
}

// Steady-state radius of the reference point on a circular lane of radius R,
// solved in the rotating frame: the car at (r, 0) moving counter-clockwise.
double steady_radius(double R, double lookahead, const DriverParams& p) {
  const double lr = p.rear_to_center;
  auto commanded_minus_needed = [&](double r) {
    const double needed = std::asin(lr / r);
    const double heading = std::numbers::pi / 2 - needed;
    const Vec2 car{r, 0.0};
    const double phi = lookahead / R;
    const Vec2 target{R * std::cos(phi), R * std::sin(phi)};
    const Vec2 d = target - car;
    const double alpha = std::atan2(d.y, d.x) - heading;
    const double kappa = 2.0 * std::sin(alpha) / norm(d);
    return std::atan(lr * kappa) - needed;
  };
  double lo = R - 3.0, hi = R + 1.0;
  double flo = commanded_minus_needed(lo);
  EXPECT_LT(flo * commanded_minus_needed(hi), 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = commanded_minus_needed(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Executor, StraightRoadStaysCentered) {
  BuiltinExecutor ex;
  const auto run = ex.execute(scenario_for(straight_x()));
  ASSERT_TRUE(run.outcome.valid);
  ASSERT_TRUE(run.outcome.executed);
  EXPECT_TRUE(run.outcome.failures.empty());
  EXPECT_EQ(run.outcome.max_oob_fraction, 0.0);
  ASSERT_TRUE(run.outcome.fitness.has_value());
  EXPECT_EQ(*run.outcome.fitness, 2.0);
  for (double f : run.trace.oob_fractions) EXPECT_EQ(f, 0.0);
  for (double d : run.trace.center_distances) EXPECT_EQ(d, 0.0);
  EXPECT_TRUE(run.outcome.triage.empty());
}

TEST(Executor, StartsWholeCarOnTheLaneAtCruiseSpeed) {
  BuiltinExecutor ex;
  const auto run = ex.execute(scenario_for(straight_x(), 50.0));
  ASSERT_FALSE(run.trace.empty());
  const auto& s0 = run.trace.states.front();
  EXPECT_DOUBLE_EQ(s0.position.x, 40.0 + 0.5 * kCarLength);
  EXPECT_DOUBLE_EQ(s0.position.y, 98.0);
  EXPECT_DOUBLE_EQ(s0.speed, 50.0 / 3.6);
  EXPECT_EQ(run.trace.oob_fractions.front(), 0.0);
}

TEST(Executor, HalfStraddleIsHalfOut) {
  const auto road = catmull_rom_sample(straight_x(), RoadSpec{});
  // Right lane spans y in [96, 100]; a box centered on y = 96 is half out.
  for (double x : {60.0, 100.0, 133.3}) {
    const auto box = oriented_rectangle({x, 96.0}, 0.0, kCarLength, kCarWidth);
    EXPECT_NEAR(oob_fraction(box, road.lane_polygon_right), 0.5, 1e-9);
    const auto across = oriented_rectangle({x, 100.0}, std::numbers::pi / 2, kCarLength, kCarWidth);
    EXPECT_NEAR(oob_fraction(across, road.lane_polygon_right), 0.5, 1e-9);
  }
  const auto inside = oriented_rectangle({100, 98}, 0.0, kCarLength, kCarWidth);
  EXPECT_EQ(oob_fraction(inside, road.lane_polygon_right), 0.0);
  const auto gone = oriented_rectangle({100, 50}, 0.0, kCarLength, kCarWidth);
  EXPECT_EQ(oob_fraction(gone, road.lane_polygon_right), 1.0);
  const Polygon flat{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(oob_fraction(flat, road.lane_polygon_right), std::invalid_argument);
}

TEST(Executor, PurePursuitSteadyStateOnCircle) {
  const double Rc = 60.0;
  Polyline center;
  const int n = 4000;
  for (int k = 0; k <= n; ++k) {
    const double a = 1.5 * std::numbers::pi * k / n;
    center.push_back({100 + Rc * std::cos(a), 100 + Rc * std::sin(a)});
  }
  const RoadSpec spec;
  const auto road = make_sampled_road(center, spec);
  double R = 0.0;
  for (const Vec2 p : road.center_polyline_right_lane) R += distance(p, {100, 100});
  R /= static_cast<double>(road.center_polyline_right_lane.size());
  ASSERT_NEAR(R, Rc + 2.0, 1e-9);

  DriverParams params;
  params.max_speed = 10.0;
  params.start_speed = 10.0;
  const BuiltinExecutor ex(params);
  TestScenario s;
  const auto run = ex.run(s, road);
  ASSERT_GT(run.trace.size(), 400u);

  const double r = steady_radius(R, params.lookahead(10.0), params);
  EXPECT_LT(r, R);  // pure pursuit cuts the corner
  const double expected = R - r;
  // The lookahead clamps at the lane end, so skip the final 2 s.
  for (std::size_t i = run.trace.size() - 190; i < run.trace.size() - 40; ++i) {
    EXPECT_NEAR(run.trace.center_distances[i], expected, 1e-3) << "step " << i;
    EXPECT_DOUBLE_EQ(run.trace.states[i].speed, 10.0);
  }
}

TEST(Executor, SpeedLimitRespectedOnRandomRoads) {
  const auto preset_limit = 70.0;
  const double cap = preset_limit / 3.6;
  BuiltinExecutor ex;
  for (const auto& cp : rs_test::valid_roads(100, 77)) {
    const auto run = ex.execute(scenario_for(cp, preset_limit, 0.5));
    ASSERT_TRUE(run.outcome.executed);
    for (const auto& st : run.trace.states) EXPECT_LE(st.speed, cap + 1e-6);
  }
}

TEST(Executor, TopSpeedWithoutLimit) {
  BuiltinExecutor ex;
  for (const auto& cp : rs_test::valid_roads(20, 78)) {
    const auto run = ex.execute(scenario_for(cp));
    for (const auto& st : run.trace.states) EXPECT_LE(st.speed, ex.params().max_speed + 1e-12);
  }
}

TEST(Executor, Deterministic) {
  BuiltinExecutor ex;
  for (const auto& cp : rs_test::valid_roads(5, 79)) {
    const auto a = ex.execute(scenario_for(cp));
    const auto b = ex.execute(scenario_for(cp));
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.outcome.failures, b.outcome.failures);
    EXPECT_EQ(a.outcome.fitness, b.outcome.fitness);
  }
}

TEST(Executor, FailureFixtureFails) {
  BuiltinExecutor ex;
  const auto run = ex.execute(scenario_for(rs_test::load_road("failure_road.json")));
  ASSERT_TRUE(run.outcome.executed);
  ASSERT_FALSE(run.outcome.failures.empty());
  EXPECT_GE(run.outcome.max_oob_fraction, 0.5);
  EXPECT_LT(*run.outcome.fitness, 0.0);
  for (const auto& f : run.outcome.failures) {
    EXPECT_GE(f.oob_fraction, 0.5);
    EXPECT_FALSE(f.segment_encoding.empty());
    EXPECT_GE(f.timestep, 0);
  }
  // A strict tolerance sees no failure on the same drive.
  const auto strict = ex.execute(scenario_for(rs_test::load_road("failure_road.json"), {}, 0.99));
  EXPECT_TRUE(strict.outcome.failures.empty());
}

TEST(Executor, InvalidRoadNotExecuted) {
  BuiltinExecutor ex;
  const auto cp =
      ControlPolyline::in_map({{20, 2}, {60, 2}, {100, 2}, {140, 2}, {180, 2}}, 200);
  const auto run = ex.execute(scenario_for(cp));
  EXPECT_FALSE(run.outcome.valid);
  EXPECT_FALSE(run.outcome.executed);
  EXPECT_FALSE(run.outcome.fitness.has_value());
  EXPECT_TRUE(run.trace.empty());
}

TEST(DetectFailures, EpisodesAndOnsets) {
  const auto road = catmull_rom_sample(straight_x(), RoadSpec{});
  ExecutionTrace trace;
  const std::vector<double> fractions{0, 0.2, 0.6, 0.3, 0, 0.7, 0, 0.4, 0.4};
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    trace.states.push_back({{45.0 + 5.0 * i, 97.0}, 0.0, 10.0});
    trace.oob_fractions.push_back(fractions[i]);
    trace.center_distances.push_back(1.0);
  }
  const auto f = detect_failures(trace, road, 0.5);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].timestep, 2);
  EXPECT_DOUBLE_EQ(f[0].oob_fraction, 0.6);
  EXPECT_NEAR(f[0].arc_position, 15.0, 1e-12);
  EXPECT_EQ(f[1].timestep, 5);
  EXPECT_DOUBLE_EQ(f[1].oob_fraction, 0.7);
  EXPECT_EQ(f[0].segment_encoding.find_first_not_of('E'), std::string::npos);

  // Lower tolerance adds the third episode, never splits the first.
  const auto lower = detect_failures(trace, road, 0.3);
  ASSERT_EQ(lower.size(), 3u);
  EXPECT_EQ(lower[0].timestep, 2);
  EXPECT_EQ(lower[2].timestep, 7);
  EXPECT_TRUE(detect_failures(trace, road, 0.8).empty());
}

TEST(Fitness, WorstCenterDistance) {
  ExecutionTrace t;
  t.center_distances = {0.5, 1.5, 3.0, 0.1};
  EXPECT_DOUBLE_EQ(fitness(t, RoadSpec{}), -1.0);
  EXPECT_THROW(fitness(ExecutionTrace{}, RoadSpec{}), std::invalid_argument);
}

TEST(TraceCsv, HeaderAndRows) {
  BuiltinExecutor ex;
  const auto run = ex.execute(scenario_for(straight_x()));
  std::ostringstream os;
  write_trace_csv(run.trace, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,x,y,heading,speed,center_distance,oob_fraction");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, run.trace.size());
}

TEST(MakeExecutor, Ids) {
  EXPECT_EQ(make_executor("builtin")->id(), "builtin");
  EXPECT_TRUE(make_executor("builtin")->capabilities().reentrant);
  EXPECT_EQ(make_executor("subprocess:cat")->id(), "subprocess:cat");
  EXPECT_THROW(make_executor("subprocess:"), ExecutorError);
  EXPECT_THROW(make_executor("carla"), ExecutorError);
}

TEST(SubprocessExecutor, ReportsBrokenCommands) {
  const auto s = scenario_for(straight_x());
  SubprocessExecutor fails("exit 4");
  EXPECT_THROW(fails.execute(s), ExecutorError);
  SubprocessExecutor garbage("cat >/dev/null; echo not-json");
  EXPECT_THROW(garbage.execute(s), ExecutorError);
}

TEST(SubprocessExecutor, ReadsCannedOutcome) {
  SubprocessExecutor canned(
      "cat >/dev/null; echo '{\"scenario_id\":\"x\",\"valid\":true,\"executed\":true,"
      "\"failures\":[],\"max_oob_fraction\":0.25,\"fitness\":1.5}'");
  const auto run = canned.execute(scenario_for(straight_x()));
  EXPECT_EQ(run.outcome.scenario_id, "t");
  EXPECT_TRUE(run.outcome.executed);
  EXPECT_DOUBLE_EQ(*run.outcome.fitness, 1.5);
  EXPECT_DOUBLE_EQ(run.outcome.max_oob_fraction, 0.25);
}
