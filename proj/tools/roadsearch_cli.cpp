// roadsearch command line: campaigns, reports, seed pools and single-road checks.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "roadsearch/campaign.hpp"

namespace rs = roadsearch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidRoad = 1;
constexpr int kExitConfig = 2;
constexpr int kExitExecutor = 3;

std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

rs::Json read_json_arg(const std::string& path) {
  std::string text;
  if (path == "-") {
    text = read_all(std::cin);
  } else {
    std::ifstream in(path);
    if (!in) throw rs::ConfigError("cannot read " + path);
    text = read_all(in);
  }
  try {
    return rs::Json::parse(text);
  } catch (const rs::Json::exception& e) {
    throw rs::ConfigError(std::string("not JSON: ") + e.what());
  }
}

std::optional<double> parse_limit(const std::string& s) {
  if (s == "none" || s == "unlimited") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw rs::ConfigError("--speed-limit expects km/h or 'none', got '" + s + "'");
  }
}

struct RunFlags {
  std::string config_file;
  std::string preset;
  std::string engine;
  std::optional<double> time_budget;
  std::optional<std::size_t> max_evaluations;
  std::optional<std::size_t> max_generations;
  std::optional<double> tolerance;
  std::string speed_limit;
  std::optional<double> map_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions;
  std::string executor;
  std::string out;
  std::string seed_pool;
  bool no_bootstrap = false;
  std::optional<unsigned> threads;
  bool report = false;
};

rs::CampaignConfig build_config(const RunFlags& f) {
  rs::CampaignConfig c;
  if (!f.config_file.empty()) rs::apply_config_file(c, f.config_file);
  rs::apply_environment(c);
  if (!f.preset.empty()) rs::apply_preset(c, f.preset);
  if (!f.engine.empty()) {
    try {
      c.set_engine(rs::parse_engine(f.engine));
    } catch (const std::invalid_argument& e) {
      throw rs::ConfigError(e.what());
    }
  }
  if (f.time_budget) c.time_budget = *f.time_budget;
  if (f.max_evaluations) c.max_evaluations = *f.max_evaluations;
  if (f.max_generations) c.max_generations = *f.max_generations;
  if (f.tolerance) c.tolerance_threshold = *f.tolerance;
  if (!f.speed_limit.empty()) c.speed_limit_kmh = parse_limit(f.speed_limit);
  if (f.map_size) c.road.map_size = *f.map_size;
  if (f.seed) c.base_seed = *f.seed;
  if (f.repetitions) c.repetitions = *f.repetitions;
  if (!f.executor.empty()) c.executor = f.executor;
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.seed_pool.empty()) c.seed_pool = f.seed_pool;
  if (f.no_bootstrap) c.bootstrap = false;
  if (f.threads) c.engine.threads = *f.threads;
  c.check();
  return c;
}

int cmd_run(const RunFlags& f) {
  const rs::CampaignConfig config = build_config(f);
  std::cerr << "roadsearch: " << rs::to_string(config.engine.engine) << ", preset " << config.preset
            << ", " << config.repetitions << " repetition(s), output " << config.output_dir << '\n';
  const auto results = rs::run_campaign(config);
  bool any_valid = false;
  bool any_executed = false;
  for (const auto& r : results) {
    const auto& m = r.metrics;
    std::cout << "rep " << r.repetition << " seed " << r.rng_seed << ": failures " << m.detected_failures
              << ", valid " << m.valid_count << "/" << m.total_generated << ", sparseness "
              << m.sparseness << ", evaluations " << r.stats.evaluations << '\n';
    any_valid = any_valid || m.valid_count > 0;
    any_executed = any_executed || m.executed_count > 0;
  }
  if (f.report) rs::emit_report(results, std::filesystem::path(config.output_dir) / "report");
  if (any_valid && !any_executed) {
    std::cerr << "roadsearch: the executor never completed a scenario\n";
    return kExitExecutor;
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& dirs, std::string out) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const auto results = rs::load_results(paths);
  if (results.empty()) throw rs::ConfigError("no result_*.json found");
  if (out.empty()) out = (paths.front() / "report").string();
  rs::emit_report(results, out);
  std::cout << "report for " << results.size() << " run(s) written to " << out << '\n';
  return kExitOk;
}

struct BootstrapFlags {
  std::string out;
  std::size_t candidates = 3000;
  std::uint64_t seed = 42;
  std::optional<std::size_t> max_executions;
  std::optional<std::size_t> max_random_valid = 60;
  double threshold = 0.5;
  std::string speed_limit;
  double map_size = 200.0;
};

int cmd_bootstrap(const BootstrapFlags& f) {
  rs::BootstrapConfig bc;
  bc.candidates = f.candidates;
  bc.rng_seed = f.seed;
  bc.max_executions = f.max_executions;
  bc.max_random_valid = f.max_random_valid;
  bc.failure_threshold = f.threshold;
  if (!f.speed_limit.empty()) bc.speed_limit_kmh = parse_limit(f.speed_limit);
  rs::RoadSpec spec;
  spec.map_size = f.map_size;
  rs::BootstrapReport report;
  rs::SeedPool pool;
  try {
    pool = rs::bootstrap_seed_pool(bc, spec, rs::BuiltinExecutor{}, &report);
  } catch (const std::invalid_argument& e) {
    throw rs::ConfigError(e.what());
  }
  rs::save_seed_pool(pool, f.out);
  std::cout << "candidates " << report.candidates << ", valid " << report.valid << " (ratio "
            << report.validity_ratio() << "), executed " << report.executed << ", pool "
            << pool.entries.size() << " (" << pool.count(rs::SeedTag::kFailureDerived)
            << " failure_derived)\n";
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const rs::Json j = read_json_arg(path);
  std::pair<rs::ControlPolyline, rs::RoadSpec> parsed;
  try {
    parsed = rs::road_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw rs::ConfigError(e.what());
  }
  const auto& [cp, spec] = parsed;
  rs::SampledRoad road;
  const rs::ValidityReport report = rs::check_road(cp, spec, &road);
  rs::Json out{{"is_valid", report.is_valid}, {"violations", rs::Json::array()}};
  for (const auto& v : report.violations) {
    out["violations"].push_back({{"constraint", rs::to_string(v.constraint_id)}, {"detail", v.detail}});
  }
  if (!report.has(rs::Constraint::kMalformed)) {
    out["length"] = road.length();
    out["min_turn_radius"] = rs::min_turn_radius(road);
  }
  std::cout << out.dump(2) << '\n';
  return report.is_valid ? kExitOk : kExitInvalidRoad;
}

// Subprocess protocol: Road JSON (+ scenario_id, tolerance_threshold,
// speed_limit) on stdin, Outcome JSON on stdout.
int cmd_execute(const std::string& trace_path) {
  const rs::Json j = read_json_arg("-");
  rs::TestScenario s;
  try {
    auto [cp, spec] = rs::road_from_json(j);
    s.road = std::move(cp);
    s.spec = spec;
    s.id = j.value("scenario_id", std::string("stdin"));
    s.tolerance_threshold = j.value("tolerance_threshold", 0.5);
    if (j.contains("speed_limit") && !j.at("speed_limit").is_null()) {
      s.driving.speed_limit_kmh = j.at("speed_limit").get<double>();
    }
    s.check();
  } catch (const rs::Json::exception& e) {
    throw rs::ConfigError(std::string("bad request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw rs::ConfigError(e.what());
  }
  rs::BuiltinExecutor executor;
  const rs::Execution ex = executor.execute(s);
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw rs::ConfigError("cannot write " + trace_path);
    rs::write_trace_csv(ex.trace, trace);
  }
  std::cout << rs::outcome_to_json(ex.outcome).dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based generator of lane-keeping test roads"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run a search campaign");
  run_cmd->add_option("--config", run.config_file, "INI configuration file");
  run_cmd->add_option("--preset", run.preset, "set1, set2, set1-mini, set2-mini or custom");
  run_cmd->add_option("--engine", run.engine, "ga, es_plus, es_comma, pso or random");
  run_cmd->add_option("--time-budget", run.time_budget, "Seconds per repetition");
  run_cmd->add_option("--max-evaluations", run.max_evaluations, "Executions per repetition");
  run_cmd->add_option("--max-generations", run.max_generations, "Generations per repetition");
  run_cmd->add_option("--tolerance", run.tolerance, "Out-of-lane fraction that counts as a failure");
  run_cmd->add_option("--speed-limit", run.speed_limit, "km/h or 'none'");
  run_cmd->add_option("--map-size", run.map_size, "Map edge length in meters");
  run_cmd->add_option("--seed", run.seed, "Base RNG seed");
  run_cmd->add_option("--repetitions", run.repetitions, "Number of repetitions");
  run_cmd->add_option("--executor", run.executor, "builtin or subprocess:<command>");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--seed-pool", run.seed_pool, "Seed pool JSON");
  run_cmd->add_flag("--no-bootstrap", run.no_bootstrap, "Fail instead of bootstrapping a missing pool");
  run_cmd->add_option("--threads", run.threads, "Parallel evaluations");
  run_cmd->add_flag("--report", run.report, "Also write a report under <out>/report");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Summaries and box plots from finished campaigns");
  report_cmd->add_option("dirs", report_dirs, "Campaign output directories")->required();
  report_cmd->add_option("--out", report_out, "Report directory");

  BootstrapFlags boot;
  auto* boot_cmd = app.add_subcommand("bootstrap-seeds", "Build a seed pool from random roads");
  boot_cmd->add_option("--out", boot.out, "Seed pool file")->required();
  boot_cmd->add_option("--candidates", boot.candidates, "Random roads to draw");
  boot_cmd->add_option("--seed", boot.seed, "RNG seed");
  boot_cmd->add_option("--max-executions", boot.max_executions, "Executions allowed");
  boot_cmd->add_option("--max-random-valid", boot.max_random_valid, "random_valid entries kept");
  boot_cmd->add_option("--threshold", boot.threshold, "Out-of-lane fraction for failure_derived");
  boot_cmd->add_option("--speed-limit", boot.speed_limit, "km/h or 'none'");
  boot_cmd->add_option("--map-size", boot.map_size, "Map edge length in meters");

  std::string road_path;
  auto* validate_cmd = app.add_subcommand("validate-road", "Check one Road JSON file ('-' for stdin)");
  validate_cmd->add_option("road", road_path, "Road JSON")->required();

  std::string trace_path;
  auto* execute_cmd = app.add_subcommand("execute", "Run the built-in driver on a Road JSON from stdin");
  execute_cmd->add_option("--trace", trace_path, "Write the trace CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*report_cmd) return cmd_report(report_dirs, report_out);
    if (*boot_cmd) return cmd_bootstrap(boot);
    if (*validate_cmd) return cmd_validate(road_path);
    if (*execute_cmd) return cmd_execute(trace_path);
  } catch (const rs::ExecutorError& e) {
    std::cerr << "roadsearch: executor error: " << e.what() << '\n';
    return kExitExecutor;
  } catch (const std::invalid_argument& e) {
    std::cerr << "roadsearch: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "roadsearch: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
