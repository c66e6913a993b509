#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace roadsearch {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
/// Counter-clockwise perpendicular.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

/// Signed shoelace area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> polygon);

/// Cumulative arc length per vertex, starting at 0.
std::vector<double> cumulative_lengths(std::span<const Vec2> polyline);

/// Radius of the circle through three points; +infinity when collinear.
double circumradius(Vec2 a, Vec2 b, Vec2 c);

/// Proper or touching intersection of closed segments [p1,p2] and [q1,q2].
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

/// True when two non-adjacent edges of the closed polygon intersect.
bool polygon_self_intersects(std::span<const Vec2> polygon);

/// Sutherland-Hodgman clipping of `subject` against a convex `window`.
/// The window may be in either orientation. The subject may be concave;
/// the result then carries degenerate bridge edges but its area is exact.
Polygon clip_to_convex(std::span<const Vec2> subject, std::span<const Vec2> window);

struct Projection {
  double arc_length = 0.0;
  double distance = 0.0;
  Vec2 foot{};
  std::size_t segment = 0;
};

/// Closest point on a polyline. Ties resolve to the smallest arc length.
/// Throws std::invalid_argument when the polyline has fewer than 2 points.
Projection project_to_polyline(Vec2 p, std::span<const Vec2> polyline);

/// Point at a given arc length, clamped to the polyline ends.
Vec2 point_at_arc(std::span<const Vec2> polyline, std::span<const double> arcs, double s);

/// Sub-polyline covering [from, to] in arc length, with interpolated ends.
Polyline clip_polyline(std::span<const Vec2> polyline, std::span<const double> arcs, double from,
                       double to);

/// Rectangle corners, counter-clockwise, centered at `center`.
Polygon oriented_rectangle(Vec2 center, double heading, double length, double width);

}  // namespace roadsearch
