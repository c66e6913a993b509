#include "roadsearch/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace roadsearch {

namespace {

// Sign of the turn a->b->c: +1 left, -1 right, 0 collinear.
int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

struct Box {
  double min_x, min_y, max_x, max_y;
};

Box bounds(Vec2 a, Vec2 b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

bool overlap(const Box& a, const Box& b) {
  return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y && b.min_y <= a.max_y;
}

}  // namespace

double signed_area(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * twice;
}

std::vector<double> cumulative_lengths(std::span<const Vec2> polyline) {
  std::vector<double> arcs(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    arcs[i] = arcs[i - 1] + distance(polyline[i - 1], polyline[i]);
  }
  return arcs;
}

double circumradius(Vec2 a, Vec2 b, Vec2 c) {
  const double twice_area = std::abs(cross(b - a, c - a));
  if (twice_area == 0.0) return std::numeric_limits<double>::infinity();
  // R = |ab| |bc| |ca| / (4 * area)
  return distance(a, b) * distance(b, c) * distance(c, a) / (2.0 * twice_area);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool polygon_self_intersects(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 4) return false;
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) boxes[i] = bounds(polygon[i], polygon[(i + 1) % n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing vertex
      if (!overlap(boxes[i], boxes[j])) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

Polygon clip_to_convex(std::span<const Vec2> subject, std::span<const Vec2> window) {
  Polygon output(subject.begin(), subject.end());
  const double orient = signed_area(window) >= 0.0 ? 1.0 : -1.0;
  const std::size_t m = window.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2 a = window[e];
    const Vec2 b = window[(e + 1) % m];
    const Vec2 edge = b - a;
    auto side = [&](Vec2 p) { return orient * cross(edge, p - a); };

    Polygon input;
    input.swap(output);
    output.reserve(input.size() + 4);
    Vec2 prev = input.back();
    double prev_side = side(prev);
    for (const Vec2 cur : input) {
      const double cur_side = side(cur);
      if (cur_side >= 0.0) {
        if (prev_side < 0.0) {
          const double t = prev_side / (prev_side - cur_side);
          output.push_back(prev + (cur - prev) * t);
        }
        output.push_back(cur);
      } else if (prev_side >= 0.0) {
        const double t = prev_side / (prev_side - cur_side);
        output.push_back(prev + (cur - prev) * t);
      }
      prev = cur;
      prev_side = cur_side;
    }
  }
  return output;
}

Projection project_to_polyline(Vec2 p, std::span<const Vec2> polyline) {
  if (polyline.size() < 2) {
    throw std::invalid_argument("project_to_polyline: polyline needs at least 2 points");
  }
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d = distance(p, foot);
    const double len = std::sqrt(len2);
    if (d < best.distance) {
      best = {arc + t * len, d, foot, i};
    }
    arc += len;
  }
  return best;
}

Vec2 point_at_arc(std::span<const Vec2> polyline, std::span<const double> arcs, double s) {
  if (s <= arcs.front()) return polyline.front();
  if (s >= arcs.back()) return polyline.back();
  const auto it = std::upper_bound(arcs.begin(), arcs.end(), s);
  const std::size_t hi = static_cast<std::size_t>(it - arcs.begin());
  const std::size_t lo = hi - 1;
  const double span = arcs[hi] - arcs[lo];
  const double t = span > 0.0 ? (s - arcs[lo]) / span : 0.0;
  return polyline[lo] + (polyline[hi] - polyline[lo]) * t;
}

Polyline clip_polyline(std::span<const Vec2> polyline, std::span<const double> arcs, double from,
                       double to) {
  from = std::clamp(from, arcs.front(), arcs.back());
  to = std::clamp(to, arcs.front(), arcs.back());
  Polyline out;
  out.push_back(point_at_arc(polyline, arcs, from));
  for (std::size_t i = 0; i < polyline.size(); ++i) {
    if (arcs[i] > from && arcs[i] < to) out.push_back(polyline[i]);
  }
  const Vec2 last = point_at_arc(polyline, arcs, to);
  if (to > from) out.push_back(last);
  return out;
}

Polygon oriented_rectangle(Vec2 center, double heading, double length, double width) {
  const Vec2 fwd{std::cos(heading) * 0.5 * length, std::sin(heading) * 0.5 * length};
  const Vec2 side{-std::sin(heading) * 0.5 * width, std::cos(heading) * 0.5 * width};
  return {center - fwd - side, center + fwd - side, center + fwd + side, center - fwd + side};
}

}  // namespace roadsearch
