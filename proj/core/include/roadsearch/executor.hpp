#pragma once

#include <algorithm>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadsearch/road.hpp"
#include "roadsearch/scenario.hpp"

namespace roadsearch {

inline constexpr double kCarLength = 4.2;
inline constexpr double kCarWidth = 1.8;

struct VehicleState {
  Vec2 position;
  double heading = 0.0;  // radians, map frame
  double speed = 0.0;    // m/s

  Polygon bounding_box() const {
    return oriented_rectangle(position, heading, kCarLength, kCarWidth);
  }
  bool operator==(const VehicleState&) const = default;
};

struct ExecutionTrace {
  std::vector<VehicleState> states;
  std::vector<double> oob_fractions;
  std::vector<double> center_distances;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  bool operator==(const ExecutionTrace&) const = default;
};

/// Kinematic bicycle + pure pursuit parameters of the built-in driver.
struct DriverParams {
  double dt = 0.05;
  double wheelbase = 2.7;
  double rear_to_center = 1.35;  // rear axle to the reference point
  double min_lookahead = 5.0;
  double lookahead_time = 0.8;
  double max_lateral_accel = 4.0;
  double max_steer = 35.0 * 3.14159265358979323846 / 180.0;
  double max_accel = 3.0;
  /// Top speed when the scenario has no limit.
  double max_speed = 35.0;
  /// Initial speed; negative means "cruise": the limit, or max_speed without one.
  double start_speed = -1.0;
  /// Speed used to size the step limit.
  double min_expected_speed = 5.0;
  double max_sim_time = 60.0;
  /// Trace stops once the car is this far from the lane center.
  double departure_distance = 8.0;
  /// Goal counts as reached once the front bumper is this close to the lane end.
  double goal_tolerance = 0.5 * kCarLength + 0.5;

  double lookahead(double speed) const {
    return std::max(min_lookahead, lookahead_time * speed);
  }
};

/// One dt step: pure pursuit toward a lookahead point on the right-lane center,
/// speed tracking min(limit, sqrt(a_lat * local radius), max_speed).
VehicleState builtin_driver_step(const VehicleState& state, const SampledRoad& road,
                                 std::optional<double> speed_limit_mps,
                                 const DriverParams& params = {});

/// Fraction of `box` area outside `lane`, via convex clipping.
/// Throws std::invalid_argument for a zero-area box.
double oob_fraction(std::span<const Vec2> box, std::span<const Vec2> lane);

/// Minimum over the trace of lane_width/2 - center distance (lower = worse driving).
/// Throws std::invalid_argument on an empty trace.
double fitness(const ExecutionTrace& trace, const RoadSpec& spec);

/// Out-of-bound episodes are maximal runs of steps with a nonzero fraction
/// outside the lane. Each episode whose peak reaches `tolerance` yields one
/// record positioned at the first step at or above the threshold.
std::vector<FailureRecord> detect_failures(const ExecutionTrace& trace, const SampledRoad& road,
                                           double tolerance);

struct Execution {
  ExecutionTrace trace;
  ScenarioOutcome outcome;
};

struct ExecutorCapabilities {
  bool deterministic = false;
  bool reentrant = false;
};

class ExecutorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A test subject. Implementations receive validated scenarios only.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::string id() const = 0;
  virtual ExecutorCapabilities capabilities() const = 0;
  virtual Execution execute(const TestScenario& scenario) = 0;
};

class BuiltinExecutor final : public Executor {
 public:
  explicit BuiltinExecutor(DriverParams params = {}) : params_(params) {}

  std::string id() const override { return "builtin"; }
  ExecutorCapabilities capabilities() const override { return {true, true}; }
  Execution execute(const TestScenario& scenario) override;

  /// Runs on an already sampled road.
  Execution run(const TestScenario& scenario, const SampledRoad& road) const;

  const DriverParams& params() const { return params_; }

 private:
  DriverParams params_;
};

/// Spawns `/bin/sh -c command` per scenario, writes the Road JSON (plus
/// scenario_id, tolerance_threshold and speed_limit) to its stdin and reads
/// one Outcome JSON object from its stdout. No trace is returned.
class SubprocessExecutor final : public Executor {
 public:
  explicit SubprocessExecutor(std::string command) : command_(std::move(command)) {}

  std::string id() const override { return "subprocess:" + command_; }
  ExecutorCapabilities capabilities() const override { return {false, false}; }
  Execution execute(const TestScenario& scenario) override;

 private:
  std::string command_;
};

/// "builtin" or "subprocess:<command>". Throws ExecutorError otherwise.
std::unique_ptr<Executor> make_executor(const std::string& id);

/// CSV columns: step,x,y,heading,speed,center_distance,oob_fraction
void write_trace_csv(const ExecutionTrace& trace, std::ostream& out);

}  // namespace roadsearch
