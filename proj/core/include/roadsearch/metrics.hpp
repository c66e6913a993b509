#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "roadsearch/road.hpp"
#include "roadsearch/scenario.hpp"

namespace roadsearch {

/// Turn-angle string for the road stretch around a failure.
/// Symbols 'A'..'I' encode heading-change bins of `bin_width` degrees, with
/// 'E' = straight, letters before it = right turns, after it = left turns.
struct SegmentEncoding {
  std::string symbols;
  double bin_width = 10.0;
  double from_arc = 0.0;
  double to_arc = 0.0;
};

inline constexpr int kSegmentBins = 9;
inline constexpr char kStraightSymbol = 'E';
inline constexpr double kSegmentHalfSpan = 30.0;

/// Bin index in [0, 8] for a heading change in degrees (positive = left).
int heading_bin(double delta_degrees, double bin_width = 10.0);

/// Encodes an arbitrary polyline; one symbol per interior vertex, or a single
/// straight symbol when the polyline is a lone segment.
std::string encode_headings(std::span<const Vec2> polyline, double bin_width = 10.0);

/// Clips the right-lane center to +-30 m around the failure and encodes it.
/// Throws std::out_of_range when the failure lies outside the road.
SegmentEncoding extract_failure_segment(const SampledRoad& road, const FailureRecord& failure);
SegmentEncoding extract_failure_segment(const SampledRoad& road, double arc_position);

/// Edit distance with unit insertions/deletions and substitution cost equal to
/// the bin distance divided by 8. Throws std::invalid_argument when the two
/// encodings use different bin widths.
double weighted_levenshtein(const SegmentEncoding& a, const SegmentEncoding& b);
double weighted_levenshtein(std::string_view a, std::string_view b);

/// Mean over failures of the largest distance to any failure (itself included).
double sparseness(std::span<const SegmentEncoding> failures);

struct MetricsReport {
  std::size_t detected_failures = 0;  // scenarios with >= 1 failure
  std::size_t obe_count = 0;          // failure records across all scenarios
  double sparseness = 0.0;
  bool sparseness_suppressed = false;  // fewer than two failing scenarios
  std::size_t total_generated = 0;
  std::size_t valid_count = 0;
  std::size_t executed_count = 0;
  double effectiveness = 0.0;
  double effectiveness_plus = 0.0;
  bool zero_valid = false;
};

MetricsReport compile_metrics(std::span<const ScenarioOutcome> outcomes);

}  // namespace roadsearch
