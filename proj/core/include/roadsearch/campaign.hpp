#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roadsearch/metrics.hpp"
#include "roadsearch/search.hpp"
#include "roadsearch/serialization.hpp"

namespace roadsearch {

/// Bad configuration or unusable output location (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CampaignConfig {
  std::string preset = "custom";
  double time_budget = 600.0;  // seconds per repetition
  /// Extra evaluation cap; makes a repetition independent of machine speed.
  std::optional<std::size_t> max_evaluations;
  std::optional<std::size_t> max_generations;
  RoadSpec road;  // map_size lives here
  std::optional<double> speed_limit_kmh;
  double tolerance_threshold = 0.5;
  EngineConfig engine;
  std::string executor = "builtin";
  std::size_t repetitions = 1;
  std::string output_dir = "roadsearch-out";
  std::uint64_t base_seed = 0;
  /// Seed pool file; when empty or missing the pool is bootstrapped if allowed.
  std::string seed_pool;
  bool bootstrap = true;
  std::size_t bootstrap_candidates = 3000;

  /// Tracks whether offspring_size was set explicitly, so switching engines
  /// picks up the new engine's default otherwise.
  bool offspring_explicit = false;

  void set_engine(EngineKind kind);
  double map_size() const { return road.map_size; }
  ScenarioSettings settings() const;
  Budget budget() const;
  /// Throws ConfigError.
  void check() const;
  bool operator==(const CampaignConfig&) const = default;
};

/// Names: set1, set2, set1-mini, set2-mini, custom.
std::vector<std::string> preset_names();
/// Overwrites budget, map size, speed limit, tolerance and repetitions.
/// Throws ConfigError for an unknown name.
void apply_preset(CampaignConfig& config, const std::string& name);
CampaignConfig make_preset(const std::string& name);

/// INI file with [campaign], [engine], [pso], [walk] and [road] sections.
/// A preset key is applied before the other keys. Throws ConfigError.
void apply_config_file(CampaignConfig& config, const std::string& path);
void apply_config_text(CampaignConfig& config, const std::string& text);

/// ROADSEARCH_OUTPUT_DIR and ROADSEARCH_SEED.
void apply_environment(CampaignConfig& config);

Json config_to_json(const CampaignConfig& c);
CampaignConfig config_from_json(const Json& j);

struct CampaignTiming {
  double total = 0.0;
  double setup = 0.0;
  double search = 0.0;
  double metrics = 0.0;
};

struct CampaignResult {
  CampaignConfig config;
  std::size_t repetition = 0;
  std::uint64_t rng_seed = 0;
  std::vector<ScenarioOutcome> outcomes;
  std::vector<TestScenario> failing_scenarios;
  MetricsReport metrics;
  SearchStats stats;
  CampaignTiming timing;

  double evaluations_per_second() const {
    return timing.search > 0.0 ? static_cast<double>(stats.evaluations) / timing.search : 0.0;
  }
};

/// Summary document; outcomes live in the per-repetition ledger file.
Json result_to_json(const CampaignResult& r);
/// Restores everything but the outcome list.
CampaignResult result_from_json(const Json& j);

Json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const Json& j);

/// Runs `repetitions` searches with seeds base_seed + i and writes
/// config.json, ledger/outcomes_<i>.jsonl, failures_<i>.jsonl, result_<i>.json
/// and aggregate.csv under output_dir. Throws ConfigError or ExecutorError
/// before any execution when the setup is unusable.
std::vector<CampaignResult> run_campaign(const CampaignConfig& config);

/// One row per result; contains no timings, so reruns compare byte for byte.
void write_aggregate_csv(const std::vector<CampaignResult>& results, std::ostream& out);

// ---------------------------------------------------------------------------
// Reports.

struct Distribution {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 below two values
  std::size_t count = 0;
};

/// Throws std::invalid_argument on an empty input.
Distribution summarize(std::vector<double> values);

struct BoxSeries {
  std::string label;
  std::vector<double> values;
};

/// Standalone SVG box plot; every value is drawn as one
/// `<circle class="run" data-value="...">`.
std::string render_box_plot(const std::string& title, const std::vector<BoxSeries>& series);

/// Writes runs.csv, summary.csv and one box_<metric>.svg per metric into
/// `dir`. Results are grouped by engine. Throws std::invalid_argument when
/// `results` is empty.
void emit_report(const std::vector<CampaignResult>& results, const std::filesystem::path& dir);

/// Loads every result_*.json below the given directories.
std::vector<CampaignResult> load_results(const std::vector<std::filesystem::path>& dirs);

}  // namespace roadsearch
