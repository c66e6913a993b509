#include "roadsearch/road.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace roadsearch {

namespace {

std::string format_point(Vec2 p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

// Unit normals (left of travel) at each vertex, bisecting adjacent segments.
std::vector<Vec2> vertex_normals(const Polyline& line) {
  const std::size_t n = line.size();
  std::vector<Vec2> dirs(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec2 d = line[i + 1] - line[i];
    const double len = norm(d);
    dirs[i] = len > 0.0 ? d / len : (i > 0 ? dirs[i - 1] : Vec2{1.0, 0.0});
  }
  std::vector<Vec2> normals(n);
  normals[0] = perp(dirs[0]);
  normals[n - 1] = perp(dirs[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    Vec2 avg = dirs[i - 1] + dirs[i];
    const double len = norm(avg);
    // A full reversal has no bisector; fall back to the incoming segment.
    avg = len > 1e-12 ? avg / len : dirs[i - 1];
    normals[i] = perp(avg);
  }
  return normals;
}

}  // namespace

ControlPolyline ControlPolyline::in_map(std::vector<Vec2> points, double map_size) {
  return ControlPolyline{std::move(points), {0.0, map_size}, {0.0, map_size}};
}

std::optional<std::string> ControlPolyline::defect() const {
  if (points.size() < kMinPoints) {
    return "needs at least 4 control points, got " + std::to_string(points.size());
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2 p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !x_bounds.contains(p.x) ||
        !y_bounds.contains(p.y)) {
      return "control point " + std::to_string(i) + " " + format_point(p) + " out of bounds";
    }
    if (i > 0 && p == points[i - 1]) {
      return "control points " + std::to_string(i - 1) + " and " + std::to_string(i) +
             " coincide";
    }
  }
  return std::nullopt;
}

void RoadSpec::check() const {
  if (!(lane_width > 0.0)) throw std::invalid_argument("lane_width must be positive");
  if (samples_per_segment < 2) throw std::invalid_argument("samples_per_segment must be >= 2");
  if (!(map_size > 0.0)) throw std::invalid_argument("map_size must be positive");
  if (num_lanes != 2) throw std::invalid_argument("only two-lane roads are supported");
}

Vec2 catmull_rom_point(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return 0.5 * (2.0 * p1 + (p2 - p0) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3);
}

SampledRoad make_sampled_road(Polyline centerline, const RoadSpec& spec, ControlPolyline source) {
  if (centerline.size() < 2) throw std::invalid_argument("road centerline needs >= 2 points");
  SampledRoad road;
  road.samples = std::move(centerline);
  road.source = std::move(source);
  road.arc_lengths = cumulative_lengths(road.samples);

  const std::size_t n = road.samples.size();
  const auto normals = vertex_normals(road.samples);
  Polyline left_edge(n), right_edge(n);
  road.center_polyline_right_lane.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 s = road.samples[i];
    left_edge[i] = s + normals[i] * spec.lane_width;
    right_edge[i] = s - normals[i] * spec.lane_width;
    road.center_polyline_right_lane[i] = s - normals[i] * (0.5 * spec.lane_width);
  }
  road.right_lane_arcs = cumulative_lengths(road.center_polyline_right_lane);

  road.lane_polygon_right = road.samples;
  road.lane_polygon_right.insert(road.lane_polygon_right.end(), right_edge.rbegin(),
                                 right_edge.rend());
  road.road_polygon = left_edge;
  road.road_polygon.insert(road.road_polygon.end(), right_edge.rbegin(), right_edge.rend());

  road.local_radius.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    road.local_radius[i] = circumradius(road.samples[i - 1], road.samples[i], road.samples[i + 1]);
  }
  if (n >= 3) {
    road.local_radius[0] = road.local_radius[1];
    road.local_radius[n - 1] = road.local_radius[n - 2];
  }
  return road;
}

SampledRoad catmull_rom_sample(const ControlPolyline& cp, const RoadSpec& spec) {
  if (auto d = cp.defect()) throw std::invalid_argument("malformed chromosome: " + *d);
  spec.check();

  const auto& p = cp.points;
  const std::size_t segments = p.size() - 3;
  const int per_segment = spec.samples_per_segment;
  Polyline samples;
  samples.reserve(segments * static_cast<std::size_t>(per_segment - 1) + 1);
  for (std::size_t s = 0; s < segments; ++s) {
    // Shared endpoints are emitted once; knots are copied exactly.
    samples.push_back(p[s + 1]);
    for (int k = 1; k < per_segment - 1; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(per_segment - 1);
      samples.push_back(catmull_rom_point(p[s], p[s + 1], p[s + 2], p[s + 3], t));
    }
  }
  samples.push_back(p[p.size() - 2]);
  return make_sampled_road(std::move(samples), spec, cp);
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::kMalformed:
      return "malformed";
    case Constraint::kStartEqualsEnd:
      return "start_equals_end";
    case Constraint::kOutOfMap:
      return "out_of_map";
    case Constraint::kSelfIntersect:
      return "self_intersect";
    case Constraint::kTooSharpTurn:
      return "too_sharp_turn";
  }
  return "unknown";
}

bool ValidityReport::has(Constraint c) const {
  return std::any_of(violations.begin(), violations.end(),
                     [c](const Violation& v) { return v.constraint_id == c; });
}

double min_turn_radius(std::span<const Vec2> samples) {
  if (samples.size() < 3) throw std::invalid_argument("min_turn_radius: fewer than 3 samples");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    best = std::min(best, circumradius(samples[i - 1], samples[i], samples[i + 1]));
  }
  return best;
}

ValidityReport validate_road(const SampledRoad& road, const RoadSpec& spec) {
  ValidityReport report;
  auto add = [&](Constraint c, std::string detail) {
    report.violations.push_back({c, std::move(detail)});
  };

  if (distance(road.start(), road.goal()) <= 1e-6) {
    add(Constraint::kStartEqualsEnd, "start and end both at " + format_point(road.start()));
  }

  for (const Vec2 v : road.road_polygon) {
    if (v.x < 0.0 || v.y < 0.0 || v.x > spec.map_size || v.y > spec.map_size) {
      add(Constraint::kOutOfMap, "road polygon vertex " + format_point(v) + " leaves the map");
      break;
    }
  }

  if (polygon_self_intersects(road.road_polygon)) {
    add(Constraint::kSelfIntersect, "road polygon self-intersects");
  }

  if (road.samples.size() >= 3) {
    const double r = min_turn_radius(road.samples);
    if (r < spec.min_radius) {
      std::ostringstream os;
      os << "turn radius " << r << " m below " << spec.min_radius << " m";
      add(Constraint::kTooSharpTurn, os.str());
    }
  }

  report.is_valid = report.violations.empty();
  return report;
}

ValidityReport check_road(const ControlPolyline& cp, const RoadSpec& spec, SampledRoad* sampled) {
  if (auto d = cp.defect()) {
    return {false, {{Constraint::kMalformed, *d}}};
  }
  SampledRoad road = catmull_rom_sample(cp, spec);
  ValidityReport report = validate_road(road, spec);
  if (sampled != nullptr) *sampled = std::move(road);
  return report;
}

}  // namespace roadsearch
