#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roadsearch/road.hpp"

namespace roadsearch {

/// Driving task. The lane is always the right one and the path always runs
/// from the road start to its goal, so only the speed limit varies.
struct DrivingTask {
  std::optional<double> speed_limit_kmh;  // nullopt = unlimited
  std::string lane = "right";
  bool operator==(const DrivingTask&) const = default;
};

/// Fixed environment; carried so persisted scenarios can grow fields later.
struct Environment {
  std::string weather = "clear";
  std::string illumination = "overhead_sun";
  bool operator==(const Environment&) const = default;
};

struct TestScenario {
  std::string id;
  ControlPolyline road;
  RoadSpec spec;
  DrivingTask driving;
  Environment environment;
  double tolerance_threshold = 0.5;

  /// Throws std::invalid_argument if tolerance or speed limit is out of range.
  void check() const;
  bool operator==(const TestScenario&) const = default;
};

/// One out-of-bound episode that reached the tolerance threshold.
struct FailureRecord {
  double arc_position = 0.0;  // along the right-lane center at onset
  double oob_fraction = 0.0;  // episode peak
  std::string segment_encoding;
  std::int64_t timestep = 0;
  bool operator==(const FailureRecord&) const = default;
};

struct ScenarioOutcome {
  std::string scenario_id;
  bool valid = false;
  bool executed = false;
  std::vector<FailureRecord> failures;
  double max_oob_fraction = 0.0;
  std::optional<double> fitness;  // absent when not executed
  double wall_time = 0.0;
  /// Set when the executor hit a problem worth a human look (e.g. divergence).
  std::string triage;

  bool failed() const { return !failures.empty(); }
  bool operator==(const ScenarioOutcome&) const = default;
};

/// Parameters a campaign injects into every scenario it creates.
struct ScenarioSettings {
  RoadSpec spec;
  std::optional<double> speed_limit_kmh;
  double tolerance_threshold = 0.5;
};

/// Monotonic per-campaign id source; ids are deterministic within a run.
class IdSource {
 public:
  explicit IdSource(std::string prefix = "s") : prefix_(std::move(prefix)) {}
  std::string next();

 private:
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

TestScenario new_scenario(ControlPolyline road, const ScenarioSettings& settings, IdSource& ids);

}  // namespace roadsearch
