#include "roadsearch/executor.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>

#include "roadsearch/metrics.hpp"
#include "roadsearch/serialization.hpp"

namespace roadsearch {

namespace {

constexpr double kKmhToMps = 1.0 / 3.6;

// Fractions within this of 0 or 1 are clipping round-off.
constexpr double kFractionSnap = 1e-12;

}  // namespace

VehicleState builtin_driver_step(const VehicleState& state, const SampledRoad& road,
                                 std::optional<double> speed_limit_mps,
                                 const DriverParams& params) {
  const auto& lane = road.center_polyline_right_lane;
  const Projection proj = project_to_polyline(state.position, lane);

  // Pure pursuit: aim at the lane-center point one lookahead further along.
  const Vec2 target =
      point_at_arc(lane, road.right_lane_arcs, proj.arc_length + params.lookahead(state.speed));
  const Vec2 heading_dir{std::cos(state.heading), std::sin(state.heading)};
  const Vec2 to_target = target - state.position;
  const double chord = norm(to_target);
  double steer = 0.0;
  if (chord > 1e-9) {
    const double alpha = std::atan2(cross(heading_dir, to_target), dot(heading_dir, to_target));
    const double curvature = 2.0 * std::sin(alpha) / chord;
    steer = std::atan(params.wheelbase * curvature);
  }
  steer = std::clamp(steer, -params.max_steer, params.max_steer);

  const std::size_t seg = std::min(proj.segment, road.local_radius.size() - 1);
  const std::size_t next = std::min(seg + 1, road.local_radius.size() - 1);
  const double radius = std::min(road.local_radius[seg], road.local_radius[next]);
  double target_speed = std::min(params.max_speed, std::sqrt(params.max_lateral_accel * radius));
  if (speed_limit_mps) target_speed = std::min(target_speed, *speed_limit_mps);
  const double max_dv = params.max_accel * params.dt;
  const double speed =
      std::max(0.0, state.speed + std::clamp(target_speed - state.speed, -max_dv, max_dv));

  // Exact integration along the constant-steer arc of the reference point.
  const double slip = std::atan(params.rear_to_center / params.wheelbase * std::tan(steer));
  const double path_curvature = std::sin(slip) / params.rear_to_center;
  const double ds = 0.5 * (state.speed + speed) * params.dt;
  const double course = state.heading + slip;
  const double turn = path_curvature * ds;

  VehicleState out;
  out.speed = speed;
  out.heading = state.heading + turn;
  if (std::abs(turn) < 1e-12) {
    out.position = state.position + Vec2{std::cos(course), std::sin(course)} * ds;
  } else {
    out.position = state.position + Vec2{std::sin(course + turn) - std::sin(course),
                                         std::cos(course) - std::cos(course + turn)} /
                                        path_curvature;
  }
  return out;
}

double oob_fraction(std::span<const Vec2> box, std::span<const Vec2> lane) {
  const double box_area = std::abs(signed_area(box));
  if (!(box_area > 0.0)) throw std::invalid_argument("oob_fraction: degenerate bounding box");
  const Polygon inside = clip_to_convex(lane, box);
  const double outside = 1.0 - std::abs(signed_area(inside)) / box_area;
  if (outside < kFractionSnap) return 0.0;
  if (outside > 1.0 - kFractionSnap) return 1.0;
  return outside;
}

double fitness(const ExecutionTrace& trace, const RoadSpec& spec) {
  if (trace.center_distances.empty()) throw std::invalid_argument("fitness: empty trace");
  double worst = std::numeric_limits<double>::infinity();
  for (double d : trace.center_distances) worst = std::min(worst, 0.5 * spec.lane_width - d);
  return worst;
}

std::vector<FailureRecord> detect_failures(const ExecutionTrace& trace, const SampledRoad& road,
                                           double tolerance) {
  std::vector<FailureRecord> out;
  const auto& fractions = trace.oob_fractions;
  std::size_t i = 0;
  while (i < fractions.size()) {
    if (fractions[i] <= 0.0) {
      ++i;
      continue;
    }
    std::size_t end = i;
    double peak = 0.0;
    std::optional<std::size_t> onset;
    for (; end < fractions.size() && fractions[end] > 0.0; ++end) {
      peak = std::max(peak, fractions[end]);
      if (!onset && fractions[end] >= tolerance) onset = end;
    }
    if (onset) {
      FailureRecord f;
      f.timestep = static_cast<std::int64_t>(*onset);
      f.oob_fraction = peak;
      f.arc_position = std::clamp(
          project_to_polyline(trace.states[*onset].position, road.center_polyline_right_lane)
              .arc_length,
          road.right_lane_arcs.front(), road.right_lane_arcs.back());
      f.segment_encoding = extract_failure_segment(road, f.arc_position).symbols;
      out.push_back(std::move(f));
    }
    i = end;
  }
  return out;
}

Execution BuiltinExecutor::execute(const TestScenario& scenario) {
  const auto start = std::chrono::steady_clock::now();
  SampledRoad road;
  const ValidityReport report = check_road(scenario.road, scenario.spec, &road);
  if (!report.is_valid) {
    Execution ex;
    ex.outcome.scenario_id = scenario.id;
    ex.outcome.valid = false;
    return ex;
  }
  Execution ex = run(scenario, road);
  ex.outcome.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ex;
}

Execution BuiltinExecutor::run(const TestScenario& scenario, const SampledRoad& road) const {
  const auto start = std::chrono::steady_clock::now();
  const auto& lane = road.center_polyline_right_lane;
  const double lane_length = road.right_lane_arcs.back();

  std::optional<double> limit;
  if (scenario.driving.speed_limit_kmh) limit = *scenario.driving.speed_limit_kmh * kKmhToMps;

  const auto by_length = static_cast<std::size_t>(
      std::ceil(4.0 * lane_length / (params_.dt * params_.min_expected_speed)));
  const auto by_time = static_cast<std::size_t>(std::ceil(params_.max_sim_time / params_.dt));
  const std::size_t max_steps = std::min(by_length, by_time);

  // Start with the whole car on the road, rear bumper at the lane start.
  const double start_arc = std::min(0.5 * kCarLength, 0.5 * lane_length);
  const Projection start_proj = project_to_polyline(
      point_at_arc(lane, road.right_lane_arcs, start_arc), lane);
  const Vec2 dir = lane[start_proj.segment + 1] - lane[start_proj.segment];
  VehicleState state;
  state.position = start_proj.foot;
  state.heading = std::atan2(dir.y, dir.x);
  state.speed = params_.start_speed >= 0.0 ? params_.start_speed
                                            : limit.value_or(params_.max_speed);
  if (limit) state.speed = std::min(state.speed, *limit);

  Execution ex;
  auto& trace = ex.trace;
  auto& outcome = ex.outcome;
  outcome.scenario_id = scenario.id;
  outcome.valid = true;

  bool diverged = false;
  bool finished = false;
  for (std::size_t step = 0; step <= max_steps; ++step) {
    if (!std::isfinite(state.position.x) || !std::isfinite(state.position.y) ||
        !std::isfinite(state.heading) || !std::isfinite(state.speed)) {
      diverged = true;
      break;
    }
    const Projection proj = project_to_polyline(state.position, lane);
    trace.states.push_back(state);
    trace.oob_fractions.push_back(oob_fraction(state.bounding_box(), road.lane_polygon_right));
    trace.center_distances.push_back(proj.distance);

    if (proj.arc_length >= lane_length - params_.goal_tolerance ||
        proj.distance > params_.departure_distance) {
      finished = true;
      break;
    }
    if (step < max_steps) state = builtin_driver_step(state, road, limit, params_);
  }

  if (diverged || trace.empty()) {
    outcome.executed = false;
    outcome.triage = "diverged";
    return ex;
  }
  outcome.executed = true;
  if (!finished) outcome.triage = "step_limit";
  outcome.failures = detect_failures(trace, road, scenario.tolerance_threshold);
  outcome.max_oob_fraction = *std::max_element(trace.oob_fractions.begin(), trace.oob_fractions.end());
  outcome.fitness = fitness(trace, scenario.spec);
  outcome.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ex;
}

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExecutorError(std::string("write to executor failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string read_all(int fd) {
  std::string out;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExecutorError(std::string("read from executor failed: ") + std::strerror(errno));
    }
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

Execution SubprocessExecutor::execute(const TestScenario& scenario) {
  const auto start = std::chrono::steady_clock::now();
  Json request = road_to_json(scenario.road, scenario.spec);
  request["scenario_id"] = scenario.id;
  request["tolerance_threshold"] = scenario.tolerance_threshold;
  request["speed_limit"] =
      scenario.driving.speed_limit_kmh ? Json(*scenario.driving.speed_limit_kmh) : Json(nullptr);
  const std::string payload = request.dump() + "\n";

  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ExecutorError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ExecutorError("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ExecutorError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);

  // The child may exit without reading; don't die on SIGPIPE.
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &previous);
  std::string response;
  try {
    write_all(to_child[1], payload);
  } catch (...) {
    // Fall through; the exit status explains what happened.
  }
  ::close(to_child[1]);
  response = read_all(from_child[0]);
  ::close(from_child[0]);
  ::sigaction(SIGPIPE, &previous, nullptr);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ExecutorError("executor command '" + command_ + "' exited abnormally");
  }

  Execution ex;
  try {
    ex.outcome = outcome_from_json(Json::parse(response));
  } catch (const std::exception& e) {
    throw ExecutorError(std::string("executor returned bad outcome: ") + e.what());
  }
  ex.outcome.scenario_id = scenario.id;
  ex.outcome.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ex;
}

std::unique_ptr<Executor> make_executor(const std::string& id) {
  if (id == "builtin") return std::make_unique<BuiltinExecutor>();
  constexpr std::string_view kPrefix = "subprocess:";
  if (id.starts_with(kPrefix) && id.size() > kPrefix.size()) {
    return std::make_unique<SubprocessExecutor>(id.substr(kPrefix.size()));
  }
  throw ExecutorError("unknown executor '" + id + "'");
}

void write_trace_csv(const ExecutionTrace& trace, std::ostream& out) {
  out << "step,x,y,heading,speed,center_distance,oob_fraction\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace.states[i];
    out << i << ',' << s.position.x << ',' << s.position.y << ',' << s.heading << ',' << s.speed
        << ',' << trace.center_distances[i] << ',' << trace.oob_fractions[i] << '\n';
  }
}

}  // namespace roadsearch
