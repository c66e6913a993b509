#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadsearch/geometry.hpp"

namespace roadsearch {

struct AxisBounds {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
  bool operator==(const AxisBounds&) const = default;
};

/// Road chromosome: ordered control points of a uniform Catmull-Rom spline.
/// The first and last points only shape the end tangents; the drivable road
/// runs from points[1] to points[size-2].
struct ControlPolyline {
  std::vector<Vec2> points;
  AxisBounds x_bounds;
  AxisBounds y_bounds;

  static constexpr std::size_t kMinPoints = 4;

  /// Square bounds [0, map_size] on both axes.
  static ControlPolyline in_map(std::vector<Vec2> points, double map_size);

  /// Description of the first broken invariant, if any.
  std::optional<std::string> defect() const;
  bool well_formed() const { return !defect().has_value(); }

  std::size_t size() const { return points.size(); }
  bool operator==(const ControlPolyline&) const = default;
};

struct RoadSpec {
  double lane_width = 4.0;
  int num_lanes = 2;
  int samples_per_segment = 10;
  double map_size = 200.0;
  /// Smallest circumradius allowed along the sampled centerline.
  double min_radius = 47.0;

  /// Throws std::invalid_argument on a non-positive width/map or < 2 samples.
  void check() const;
  bool operator==(const RoadSpec&) const = default;
};

/// Interpolated road plus the polygons the validator and simulator consume.
struct SampledRoad {
  Polyline samples;
  std::vector<double> arc_lengths;
  Polyline center_polyline_right_lane;
  std::vector<double> right_lane_arcs;
  Polygon lane_polygon_right;
  Polygon road_polygon;
  /// Circumradius at each sample over its neighbours; ends copy their neighbour.
  std::vector<double> local_radius;
  ControlPolyline source;

  double length() const { return arc_lengths.empty() ? 0.0 : arc_lengths.back(); }
  Vec2 start() const { return samples.front(); }
  Vec2 goal() const { return samples.back(); }
};

/// Builds lane geometry around an explicit centerline. Used by the sampler and
/// by tests that need exact shapes (circles, straight lines).
SampledRoad make_sampled_road(Polyline centerline, const RoadSpec& spec, ControlPolyline source = {});

/// Uniform Catmull-Rom point on the segment p1->p2 at t in [0, 1].
Vec2 catmull_rom_point(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t);

/// Throws std::invalid_argument when `cp` is malformed.
SampledRoad catmull_rom_sample(const ControlPolyline& cp, const RoadSpec& spec);

enum class Constraint { kMalformed, kStartEqualsEnd, kOutOfMap, kSelfIntersect, kTooSharpTurn };

std::string to_string(Constraint c);

struct Violation {
  Constraint constraint_id;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

struct ValidityReport {
  bool is_valid = true;
  std::vector<Violation> violations;

  bool has(Constraint c) const;
  bool operator==(const ValidityReport&) const = default;
};

ValidityReport validate_road(const SampledRoad& road, const RoadSpec& spec);

/// Samples and validates in one step; malformed chromosomes are reported
/// instead of thrown. `sampled` receives the road when sampling succeeded.
ValidityReport check_road(const ControlPolyline& cp, const RoadSpec& spec,
                          SampledRoad* sampled = nullptr);

/// Minimum circumradius over consecutive sample triples.
/// Throws std::invalid_argument with fewer than 3 samples.
double min_turn_radius(std::span<const Vec2> samples);
inline double min_turn_radius(const SampledRoad& road) { return min_turn_radius(road.samples); }

}  // namespace roadsearch
