#pragma once

#include <nlohmann/json.hpp>

#include "roadsearch/road.hpp"
#include "roadsearch/scenario.hpp"

namespace roadsearch {

using Json = nlohmann::json;

/// Road JSON: {"control_points": [[x,y],...], "samples_per_segment", "lane_width",
/// "map_size", "min_radius"}. min_radius is optional on input.
Json road_to_json(const ControlPolyline& cp, const RoadSpec& spec);
/// Throws std::invalid_argument on a structurally broken document.
std::pair<ControlPolyline, RoadSpec> road_from_json(const Json& j);

Json failure_to_json(const FailureRecord& f);
FailureRecord failure_from_json(const Json& j);

/// Outcome JSON; "fitness" is null when the scenario was not executed.
Json outcome_to_json(const ScenarioOutcome& o);
ScenarioOutcome outcome_from_json(const Json& j);

Json scenario_to_json(const TestScenario& s);
TestScenario scenario_from_json(const Json& j);

}  // namespace roadsearch
