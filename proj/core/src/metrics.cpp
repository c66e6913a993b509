#include "roadsearch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace roadsearch {

int heading_bin(double delta_degrees, double bin_width) {
  const long raw = std::lround(delta_degrees / bin_width);
  const long half = kSegmentBins / 2;
  return static_cast<int>(std::clamp(raw, -half, half) + half);
}

std::string encode_headings(std::span<const Vec2> polyline, double bin_width) {
  std::vector<Vec2> dirs;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 d = polyline[i + 1] - polyline[i];
    if (norm(d) > 1e-9) dirs.push_back(d);
  }
  std::string symbols;
  if (dirs.empty()) return symbols;
  if (dirs.size() == 1) return std::string(1, kStraightSymbol);
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    const double delta = std::atan2(cross(dirs[i - 1], dirs[i]), dot(dirs[i - 1], dirs[i]));
    symbols.push_back(static_cast<char>('A' + heading_bin(delta * 180.0 / std::numbers::pi, bin_width)));
  }
  return symbols;
}

SegmentEncoding extract_failure_segment(const SampledRoad& road, double arc_position) {
  const auto& arcs = road.right_lane_arcs;
  if (arcs.empty() || arc_position < arcs.front() || arc_position > arcs.back() ||
      !std::isfinite(arc_position)) {
    throw std::out_of_range("failure arc position outside the road");
  }
  SegmentEncoding enc;
  enc.from_arc = std::max(arcs.front(), arc_position - kSegmentHalfSpan);
  enc.to_arc = std::min(arcs.back(), arc_position + kSegmentHalfSpan);
  const Polyline piece =
      clip_polyline(road.center_polyline_right_lane, arcs, enc.from_arc, enc.to_arc);
  enc.symbols = encode_headings(piece, enc.bin_width);
  return enc;
}

SegmentEncoding extract_failure_segment(const SampledRoad& road, const FailureRecord& failure) {
  return extract_failure_segment(road, failure.arc_position);
}

double weighted_levenshtein(std::string_view a, std::string_view b) {
  // Single-row DP over b.
  std::vector<double> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    double diag = row[0];
    row[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double sub = std::abs(static_cast<int>(a[i - 1]) - static_cast<int>(b[j - 1])) /
                         static_cast<double>(kSegmentBins - 1);
      const double best = std::min({row[j] + 1.0, row[j - 1] + 1.0, diag + sub});
      diag = row[j];
      row[j] = best;
    }
  }
  return row[b.size()];
}

double weighted_levenshtein(const SegmentEncoding& a, const SegmentEncoding& b) {
  if (a.bin_width != b.bin_width) {
    throw std::invalid_argument("segment encodings use different alphabets");
  }
  return weighted_levenshtein(a.symbols, b.symbols);
}

double sparseness(std::span<const SegmentEncoding> failures) {
  if (failures.size() < 2) return 0.0;
  for (const auto& f : failures) {
    if (f.bin_width != failures.front().bin_width) {
      throw std::invalid_argument("segment encodings use different alphabets");
    }
  }
  // Equal strings share a row maximum, so work on distinct strings only.
  std::map<std::string, std::size_t> multiplicity;
  for (const auto& f : failures) ++multiplicity[f.symbols];
  std::vector<std::pair<std::string_view, std::size_t>> distinct(multiplicity.begin(), multiplicity.end());
  const std::size_t n = distinct.size();
  std::vector<double> row_max(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = weighted_levenshtein(distinct[i].first, distinct[j].first);
      row_max[i] = std::max(row_max[i], d);
      row_max[j] = std::max(row_max[j], d);
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += row_max[i] * static_cast<double>(distinct[i].second);
  return sum / static_cast<double>(failures.size());
}

MetricsReport compile_metrics(std::span<const ScenarioOutcome> outcomes) {
  MetricsReport m;
  std::vector<SegmentEncoding> segments;
  m.total_generated = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.valid) ++m.valid_count;
    if (o.executed) ++m.executed_count;
    if (o.failed()) ++m.detected_failures;
    for (const auto& f : o.failures) {
      segments.push_back({f.segment_encoding, 10.0, 0.0, 0.0});
    }
  }
  m.obe_count = segments.size();
  if (m.detected_failures <= 1) {
    m.sparseness = 0.0;
    m.sparseness_suppressed = true;
  } else {
    m.sparseness = sparseness(segments);
  }
  m.effectiveness = m.total_generated > 0
                        ? static_cast<double>(m.valid_count) / static_cast<double>(m.total_generated)
                        : 0.0;
  if (m.valid_count == 0) {
    m.zero_valid = true;
    m.effectiveness_plus = 0.0;
  } else {
    m.effectiveness_plus =
        static_cast<double>(m.detected_failures) / static_cast<double>(m.valid_count);
  }
  return m;
}

}  // namespace roadsearch
