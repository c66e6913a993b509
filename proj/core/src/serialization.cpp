#include "roadsearch/serialization.hpp"

#include <stdexcept>

namespace roadsearch {

Json road_to_json(const ControlPolyline& cp, const RoadSpec& spec) {
  Json points = Json::array();
  for (const Vec2 p : cp.points) points.push_back({p.x, p.y});
  return Json{{"control_points", std::move(points)},
              {"samples_per_segment", spec.samples_per_segment},
              {"lane_width", spec.lane_width},
              {"map_size", spec.map_size},
              {"min_radius", spec.min_radius}};
}

std::pair<ControlPolyline, RoadSpec> road_from_json(const Json& j) {
  try {
    RoadSpec spec;
    spec.samples_per_segment = j.at("samples_per_segment").get<int>();
    spec.lane_width = j.at("lane_width").get<double>();
    spec.map_size = j.at("map_size").get<double>();
    if (j.contains("min_radius")) spec.min_radius = j.at("min_radius").get<double>();
    std::vector<Vec2> points;
    for (const auto& p : j.at("control_points")) {
      if (!p.is_array() || p.size() != 2) throw std::invalid_argument("point must be [x, y]");
      points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return {ControlPolyline::in_map(std::move(points), spec.map_size), spec};
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad road JSON: ") + e.what());
  }
}

Json failure_to_json(const FailureRecord& f) {
  return Json{{"arc_position", f.arc_position},
              {"oob_fraction", f.oob_fraction},
              {"timestep", f.timestep},
              {"segment_encoding", f.segment_encoding}};
}

FailureRecord failure_from_json(const Json& j) {
  FailureRecord f;
  f.arc_position = j.at("arc_position").get<double>();
  f.oob_fraction = j.at("oob_fraction").get<double>();
  f.timestep = j.at("timestep").get<std::int64_t>();
  f.segment_encoding = j.at("segment_encoding").get<std::string>();
  return f;
}

Json outcome_to_json(const ScenarioOutcome& o) {
  Json failures = Json::array();
  for (const auto& f : o.failures) failures.push_back(failure_to_json(f));
  Json j{{"scenario_id", o.scenario_id},
         {"valid", o.valid},
         {"executed", o.executed},
         {"failures", std::move(failures)},
         {"max_oob_fraction", o.max_oob_fraction},
         {"fitness", o.fitness ? Json(*o.fitness) : Json(nullptr)},
         {"wall_time", o.wall_time}};
  if (!o.triage.empty()) j["triage"] = o.triage;
  return j;
}

ScenarioOutcome outcome_from_json(const Json& j) {
  try {
    ScenarioOutcome o;
    o.scenario_id = j.at("scenario_id").get<std::string>();
    o.valid = j.at("valid").get<bool>();
    o.executed = j.at("executed").get<bool>();
    for (const auto& f : j.at("failures")) o.failures.push_back(failure_from_json(f));
    o.max_oob_fraction = j.at("max_oob_fraction").get<double>();
    if (!j.at("fitness").is_null()) o.fitness = j.at("fitness").get<double>();
    o.wall_time = j.value("wall_time", 0.0);
    o.triage = j.value("triage", std::string{});
    return o;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad outcome JSON: ") + e.what());
  }
}

Json scenario_to_json(const TestScenario& s) {
  Json j = road_to_json(s.road, s.spec);
  j["id"] = s.id;
  j["num_lanes"] = s.spec.num_lanes;
  j["bounds"] = {{s.road.x_bounds.min, s.road.x_bounds.max},
                 {s.road.y_bounds.min, s.road.y_bounds.max}};
  j["driving"] = {{"speed_limit", s.driving.speed_limit_kmh ? Json(*s.driving.speed_limit_kmh)
                                                             : Json(nullptr)},
                  {"lane", s.driving.lane}};
  j["environment"] = {{"weather", s.environment.weather},
                      {"illumination", s.environment.illumination}};
  j["tolerance_threshold"] = s.tolerance_threshold;
  return j;
}

TestScenario scenario_from_json(const Json& j) {
  auto [road, spec] = road_from_json(j);
  TestScenario s;
  s.id = j.at("id").get<std::string>();
  spec.num_lanes = j.value("num_lanes", 2);
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    road.x_bounds = {b[0][0].get<double>(), b[0][1].get<double>()};
    road.y_bounds = {b[1][0].get<double>(), b[1][1].get<double>()};
  }
  s.road = std::move(road);
  s.spec = spec;
  const auto& d = j.at("driving");
  if (!d.at("speed_limit").is_null()) s.driving.speed_limit_kmh = d.at("speed_limit").get<double>();
  s.driving.lane = d.at("lane").get<std::string>();
  const auto& e = j.at("environment");
  s.environment.weather = e.at("weather").get<std::string>();
  s.environment.illumination = e.at("illumination").get<std::string>();
  s.tolerance_threshold = j.at("tolerance_threshold").get<double>();
  return s;
}

}  // namespace roadsearch
