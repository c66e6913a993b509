#include "roadsearch/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace roadsearch {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + raw + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + raw + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

std::optional<double> parse_speed_limit(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "none" || v == "unlimited" || v.empty()) return std::nullopt;
  return parse_double(key, v);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

template <typename T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------

void CampaignConfig::set_engine(EngineKind kind) {
  engine.engine = kind;
  if (!offspring_explicit) engine.offspring_size = EngineConfig::defaults_for(kind).offspring_size;
}

ScenarioSettings CampaignConfig::settings() const {
  ScenarioSettings s;
  s.spec = road;
  s.speed_limit_kmh = speed_limit_kmh;
  s.tolerance_threshold = tolerance_threshold;
  return s;
}

Budget CampaignConfig::budget() const { return {time_budget, max_evaluations, max_generations}; }

void CampaignConfig::check() const {
  if (!(time_budget > 0.0) || !std::isfinite(time_budget)) throw ConfigError("time_budget must be positive");
  if (speed_limit_kmh && !(*speed_limit_kmh > 0.0)) throw ConfigError("speed_limit must be positive or none");
  if (!(tolerance_threshold > 0.0 && tolerance_threshold <= 1.0)) {
    throw ConfigError("tolerance must lie in (0, 1]");
  }
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
  if (executor.empty()) throw ConfigError("executor must be set");
  if (bootstrap && bootstrap_candidates == 0) throw ConfigError("bootstrap_candidates must be positive");
  try {
    road.check();
    engine.check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> preset_names() { return {"set1", "set2", "set1-mini", "set2-mini", "custom"}; }

void apply_preset(CampaignConfig& c, const std::string& name) {
  struct Row {
    const char* name;
    double budget;
    double map;
    std::optional<double> limit;
    double tolerance;
    std::size_t reps;
  };
  static const Row rows[] = {
      {"set1", 5 * 3600.0, 200.0, std::nullopt, 0.95, 5},
      {"set2", 2 * 3600.0, 200.0, 70.0, 0.85, 10},
      {"set1-mini", 600.0, 200.0, std::nullopt, 0.5, 5},
      {"set2-mini", 300.0, 200.0, 70.0, 0.5, 5},
  };
  if (name == "custom") {
    c.preset = name;
    return;
  }
  for (const Row& r : rows) {
    if (name == r.name) {
      c.preset = name;
      c.time_budget = r.budget;
      c.road.map_size = r.map;
      c.speed_limit_kmh = r.limit;
      c.tolerance_threshold = r.tolerance;
      c.repetitions = r.reps;
      return;
    }
  }
  throw ConfigError("unknown preset: " + name);
}

CampaignConfig make_preset(const std::string& name) {
  CampaignConfig c;
  apply_preset(c, name);
  return c;
}

namespace {

void apply_key(CampaignConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string k = section + "." + key;
  EngineConfig& e = c.engine;
  WalkParams& w = e.walk;
  if (section == "campaign") {
    if (key == "preset") return;  // handled first
    if (key == "time_budget") c.time_budget = parse_double(k, value);
    else if (key == "max_evaluations") c.max_evaluations = parse_uint(k, value);
    else if (key == "max_generations") c.max_generations = parse_uint(k, value);
    else if (key == "map_size") c.road.map_size = parse_double(k, value);
    else if (key == "speed_limit") c.speed_limit_kmh = parse_speed_limit(k, value);
    else if (key == "tolerance") c.tolerance_threshold = parse_double(k, value);
    else if (key == "repetitions") c.repetitions = parse_uint(k, value);
    else if (key == "executor") c.executor = trim(value);
    else if (key == "output_dir") c.output_dir = trim(value);
    else if (key == "seed") c.base_seed = parse_uint(k, value);
    else if (key == "seed_pool") c.seed_pool = trim(value);
    else if (key == "bootstrap") c.bootstrap = parse_bool(k, value);
    else if (key == "bootstrap_candidates") c.bootstrap_candidates = parse_uint(k, value);
    else throw ConfigError("unknown key " + k);
  } else if (section == "engine") {
    if (key == "engine") return;  // handled first
    if (key == "population_size") e.population_size = parse_uint(k, value);
    else if (key == "offspring_size") {
      e.offspring_size = parse_uint(k, value);
      c.offspring_explicit = true;
    } else if (key == "tournament_size") e.tournament_size = parse_uint(k, value);
    else if (key == "crossover_rate") e.crossover_rate = parse_double(k, value);
    else if (key == "mutation_rate") e.mutation_rate = parse_double(k, value);
    else if (key == "eta") e.eta = parse_double(k, value);
    else if (key == "elitism") e.elitism = parse_bool(k, value);
    else if (key == "threads") e.threads = static_cast<unsigned>(parse_uint(k, value));
    else throw ConfigError("unknown key " + k);
  } else if (section == "pso") {
    if (key == "w") e.pso.w = parse_double(k, value);
    else if (key == "c1") e.pso.c1 = parse_double(k, value);
    else if (key == "c2") e.pso.c2 = parse_double(k, value);
    else throw ConfigError("unknown key " + k);
  } else if (section == "walk") {
    if (key == "margin") w.margin = parse_double(k, value);
    else if (key == "min_points") w.min_points = parse_uint(k, value);
    else if (key == "max_points") w.max_points = parse_uint(k, value);
    else if (key == "min_step") w.min_step = parse_double(k, value);
    else if (key == "max_step") w.max_step = parse_double(k, value);
    else if (key == "max_delta_deg") w.max_delta_deg = parse_double(k, value);
    else if (key == "heading_spread_deg") w.heading_spread_deg = parse_double(k, value);
    else if (key == "max_draws") w.max_draws = parse_uint(k, value);
    else if (key == "backtrack_every") w.backtrack_every = parse_uint(k, value);
    else throw ConfigError("unknown key " + k);
  } else if (section == "road") {
    if (key == "lane_width") c.road.lane_width = parse_double(k, value);
    else if (key == "samples_per_segment") c.road.samples_per_segment = static_cast<int>(parse_uint(k, value));
    else if (key == "min_radius") c.road.min_radius = parse_double(k, value);
    else throw ConfigError("unknown key " + k);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

void apply_tree(CampaignConfig& c, const boost::property_tree::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key outside a section: " + section);
  }
  if (auto preset = tree.get_optional<std::string>("campaign.preset")) apply_preset(c, trim(*preset));
  if (auto engine = tree.get_optional<std::string>("engine.engine")) {
    try {
      c.set_engine(parse_engine(trim(*engine)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& [section, body] : tree) {
    for (const auto& [key, node] : body) apply_key(c, section, key, node.data());
  }
}

}  // namespace

void apply_config_text(CampaignConfig& c, const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_tree(c, tree);
}

void apply_config_file(CampaignConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(c, text.str());
}

void apply_environment(CampaignConfig& c) {
  if (const char* dir = std::getenv("ROADSEARCH_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
  if (const char* seed = std::getenv("ROADSEARCH_SEED"); seed && *seed) {
    c.base_seed = parse_uint("ROADSEARCH_SEED", seed);
  }
}

// ---------------------------------------------------------------------------

Json config_to_json(const CampaignConfig& c) {
  const EngineConfig& e = c.engine;
  const WalkParams& w = e.walk;
  return Json{
      {"preset", c.preset},
      {"time_budget", c.time_budget},
      {"max_evaluations", opt_json(c.max_evaluations)},
      {"max_generations", opt_json(c.max_generations)},
      {"map_size", c.road.map_size},
      {"lane_width", c.road.lane_width},
      {"num_lanes", c.road.num_lanes},
      {"samples_per_segment", c.road.samples_per_segment},
      {"min_radius", c.road.min_radius},
      {"speed_limit", opt_json(c.speed_limit_kmh)},
      {"tolerance_threshold", c.tolerance_threshold},
      {"executor", c.executor},
      {"repetitions", c.repetitions},
      {"output_dir", c.output_dir},
      {"base_seed", c.base_seed},
      {"seed_pool", c.seed_pool},
      {"bootstrap", c.bootstrap},
      {"bootstrap_candidates", c.bootstrap_candidates},
      {"offspring_explicit", c.offspring_explicit},
      {"engine",
       {{"engine", to_string(e.engine)},
        {"population_size", e.population_size},
        {"offspring_size", e.offspring_size},
        {"tournament_size", e.tournament_size},
        {"crossover_rate", e.crossover_rate},
        {"mutation_rate", e.mutation_rate},
        {"eta", e.eta},
        {"pso", {{"w", e.pso.w}, {"c1", e.pso.c1}, {"c2", e.pso.c2}}},
        {"rng_seed", e.rng_seed},
        {"elitism", e.elitism},
        {"threads", e.threads},
        {"walk",
         {{"margin", w.margin},
          {"min_points", w.min_points},
          {"max_points", w.max_points},
          {"min_step", w.min_step},
          {"max_step", w.max_step},
          {"max_delta_deg", w.max_delta_deg},
          {"heading_spread_deg", w.heading_spread_deg},
          {"max_draws", w.max_draws},
          {"backtrack_every", w.backtrack_every}}}}},
  };
}

CampaignConfig config_from_json(const Json& j) {
  try {
    CampaignConfig c;
    c.preset = j.at("preset").get<std::string>();
    c.time_budget = j.at("time_budget").get<double>();
    c.max_evaluations = opt_from<std::size_t>(j, "max_evaluations");
    c.max_generations = opt_from<std::size_t>(j, "max_generations");
    c.road.map_size = j.at("map_size").get<double>();
    c.road.lane_width = j.at("lane_width").get<double>();
    c.road.num_lanes = j.at("num_lanes").get<int>();
    c.road.samples_per_segment = j.at("samples_per_segment").get<int>();
    c.road.min_radius = j.at("min_radius").get<double>();
    c.speed_limit_kmh = opt_from<double>(j, "speed_limit");
    c.tolerance_threshold = j.at("tolerance_threshold").get<double>();
    c.executor = j.at("executor").get<std::string>();
    c.repetitions = j.at("repetitions").get<std::size_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.seed_pool = j.at("seed_pool").get<std::string>();
    c.bootstrap = j.at("bootstrap").get<bool>();
    c.bootstrap_candidates = j.at("bootstrap_candidates").get<std::size_t>();
    c.offspring_explicit = j.at("offspring_explicit").get<bool>();
    const Json& e = j.at("engine");
    c.engine.engine = parse_engine(e.at("engine").get<std::string>());
    c.engine.population_size = e.at("population_size").get<std::size_t>();
    c.engine.offspring_size = e.at("offspring_size").get<std::size_t>();
    c.engine.tournament_size = e.at("tournament_size").get<std::size_t>();
    c.engine.crossover_rate = e.at("crossover_rate").get<double>();
    c.engine.mutation_rate = e.at("mutation_rate").get<double>();
    c.engine.eta = e.at("eta").get<double>();
    c.engine.pso.w = e.at("pso").at("w").get<double>();
    c.engine.pso.c1 = e.at("pso").at("c1").get<double>();
    c.engine.pso.c2 = e.at("pso").at("c2").get<double>();
    c.engine.rng_seed = e.at("rng_seed").get<std::uint64_t>();
    c.engine.elitism = e.at("elitism").get<bool>();
    c.engine.threads = e.at("threads").get<unsigned>();
    const Json& w = e.at("walk");
    c.engine.walk.margin = w.at("margin").get<double>();
    c.engine.walk.min_points = w.at("min_points").get<std::size_t>();
    c.engine.walk.max_points = w.at("max_points").get<std::size_t>();
    c.engine.walk.min_step = w.at("min_step").get<double>();
    c.engine.walk.max_step = w.at("max_step").get<double>();
    c.engine.walk.max_delta_deg = w.at("max_delta_deg").get<double>();
    c.engine.walk.heading_spread_deg = w.at("heading_spread_deg").get<double>();
    c.engine.walk.max_draws = w.at("max_draws").get<std::size_t>();
    c.engine.walk.backtrack_every = w.at("backtrack_every").get<std::size_t>();
    return c;
  } catch (const Json::exception& ex) {
    throw ConfigError(std::string("bad config snapshot: ") + ex.what());
  }
}

Json metrics_to_json(const MetricsReport& m) {
  return Json{{"detected_failures", m.detected_failures},
              {"obe_count", m.obe_count},
              {"sparseness", m.sparseness},
              {"sparseness_suppressed", m.sparseness_suppressed},
              {"sparseness_self_included", true},
              {"total_generated", m.total_generated},
              {"valid_count", m.valid_count},
              {"executed_count", m.executed_count},
              {"effectiveness", m.effectiveness},
              {"effectiveness_plus", m.effectiveness_plus},
              {"zero_valid", m.zero_valid}};
}

MetricsReport metrics_from_json(const Json& j) {
  MetricsReport m;
  m.detected_failures = j.at("detected_failures").get<std::size_t>();
  m.obe_count = j.at("obe_count").get<std::size_t>();
  m.sparseness = j.at("sparseness").get<double>();
  m.sparseness_suppressed = j.at("sparseness_suppressed").get<bool>();
  m.total_generated = j.at("total_generated").get<std::size_t>();
  m.valid_count = j.at("valid_count").get<std::size_t>();
  m.executed_count = j.at("executed_count").get<std::size_t>();
  m.effectiveness = j.at("effectiveness").get<double>();
  m.effectiveness_plus = j.at("effectiveness_plus").get<double>();
  m.zero_valid = j.at("zero_valid").get<bool>();
  return m;
}

Json result_to_json(const CampaignResult& r) {
  const SearchStats& s = r.stats;
  Json ids = Json::array();
  for (const auto& f : r.failing_scenarios) ids.push_back(f.id);
  return Json{
      {"config", config_to_json(r.config)},
      {"repetition", r.repetition},
      {"rng_seed", r.rng_seed},
      {"engine", to_string(r.config.engine.engine)},
      {"metrics", metrics_to_json(r.metrics)},
      {"stats",
       {{"generations", s.generations},
        {"evaluations", s.evaluations},
        {"invalid_candidates", s.invalid_candidates},
        {"crossover_rollbacks", s.crossover_rollbacks},
        {"mutation_exhausted", s.mutation_exhausted},
        {"pso_halvings", s.pso_halvings},
        {"pso_reverts", s.pso_reverts}}},
      {"timing",
       {{"total", r.timing.total},
        {"setup", r.timing.setup},
        {"search", r.timing.search},
        {"metrics", r.timing.metrics}}},
      {"evaluations_per_second", r.evaluations_per_second()},
      {"failing_scenario_ids", std::move(ids)},
      {"ledger", "ledger/outcomes_" + std::to_string(r.repetition) + ".jsonl"},
  };
}

CampaignResult result_from_json(const Json& j) {
  try {
    CampaignResult r;
    r.config = config_from_json(j.at("config"));
    r.repetition = j.at("repetition").get<std::size_t>();
    r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    r.metrics = metrics_from_json(j.at("metrics"));
    const Json& s = j.at("stats");
    r.stats.generations = s.at("generations").get<std::size_t>();
    r.stats.evaluations = s.at("evaluations").get<std::size_t>();
    r.stats.invalid_candidates = s.at("invalid_candidates").get<std::size_t>();
    r.stats.crossover_rollbacks = s.at("crossover_rollbacks").get<std::size_t>();
    r.stats.mutation_exhausted = s.at("mutation_exhausted").get<std::size_t>();
    r.stats.pso_halvings = s.at("pso_halvings").get<std::size_t>();
    r.stats.pso_reverts = s.at("pso_reverts").get<std::size_t>();
    const Json& t = j.at("timing");
    r.timing = {t.at("total").get<double>(), t.at("setup").get<double>(), t.at("search").get<double>(),
                t.at("metrics").get<double>()};
    r.stats.wall_time = r.timing.search;
    return r;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad result JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_for_write(const fs::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

SeedPool prepare_seed_pool(const CampaignConfig& c, const fs::path& out_dir) {
  if (!c.seed_pool.empty() && fs::exists(c.seed_pool)) {
    try {
      SeedPool pool = load_seed_pool(c.seed_pool);
      pool.check();
      if (pool.empty()) throw ConfigError("seed pool " + c.seed_pool + " is empty");
      return pool;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!c.bootstrap) {
    throw ConfigError(c.seed_pool.empty() ? "no seed pool given and bootstrap disabled"
                                          : "seed pool " + c.seed_pool + " not found");
  }
  BootstrapConfig bc;
  bc.candidates = c.bootstrap_candidates;
  bc.rng_seed = c.base_seed;
  bc.speed_limit_kmh = c.speed_limit_kmh;
  bc.max_random_valid = 60;
  bc.walk = c.engine.walk;
  SeedPool pool;
  try {
    pool = bootstrap_seed_pool(bc, c.road, BuiltinExecutor{});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  save_seed_pool(pool, (out_dir / "seed_pool.json").string());
  return pool;
}

}  // namespace

std::vector<CampaignResult> run_campaign(const CampaignConfig& config) {
  const auto t_setup = Clock::now();
  config.check();
  std::unique_ptr<Executor> executor = make_executor(config.executor);

  const fs::path out_dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir / "ledger", ec);
  if (ec) throw ConfigError("cannot create " + (out_dir / "ledger").string() + ": " + ec.message());
  {
    std::ofstream snap = open_for_write(out_dir / "config.json");
    snap << config_to_json(config).dump(2) << '\n';
  }

  SeedPool pool;
  if (config.engine.engine != EngineKind::kRandom) pool = prepare_seed_pool(config, out_dir);
  const double setup_time = seconds_since(t_setup);

  std::vector<CampaignResult> results;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const auto t_total = Clock::now();
    CampaignResult r;
    r.config = config;
    r.repetition = rep;
    r.rng_seed = config.base_seed + rep;
    r.timing.setup = setup_time;

    const std::string suffix = std::to_string(rep);
    std::ofstream ledger = open_for_write(out_dir / "ledger" / ("outcomes_" + suffix + ".jsonl"));
    std::ofstream failures = open_for_write(out_dir / ("failures_" + suffix + ".jsonl"));
    std::ofstream events = open_for_write(out_dir / "ledger" / ("events_" + suffix + ".log"));

    SearchInputs in;
    in.config = config.engine;
    in.config.rng_seed = r.rng_seed;
    in.settings = config.settings();
    in.budget = config.budget();
    in.seeds = &pool;

    SearchHooks hooks;
    hooks.on_outcome = [&](const TestScenario& s, const ScenarioOutcome& o) {
      ledger << outcome_to_json(o).dump() << '\n' << std::flush;
      if (o.failed()) {
        failures << Json{{"scenario", scenario_to_json(s)}, {"outcome", outcome_to_json(o)}}.dump()
                 << '\n' << std::flush;
      }
    };
    hooks.on_event = [&](const std::string& msg) { events << msg << '\n'; };

    const auto t_search = Clock::now();
    SearchResult sr = run_search(in, *executor, hooks);
    r.timing.search = seconds_since(t_search);

    const auto t_metrics = Clock::now();
    r.metrics = compile_metrics(sr.outcomes);
    r.timing.metrics = seconds_since(t_metrics);
    r.outcomes = std::move(sr.outcomes);
    r.failing_scenarios = std::move(sr.failing_scenarios);
    r.stats = sr.stats;
    r.timing.total = seconds_since(t_total);

    std::ofstream result = open_for_write(out_dir / ("result_" + suffix + ".json"));
    result << result_to_json(r).dump(2) << '\n';
    results.push_back(std::move(r));
  }

  std::ofstream aggregate = open_for_write(out_dir / "aggregate.csv");
  write_aggregate_csv(results, aggregate);
  return results;
}

void write_aggregate_csv(const std::vector<CampaignResult>& results, std::ostream& out) {
  out << "engine,repetition,seed,total_generated,valid_count,executed_count,detected_failures,"
         "obe_count,sparseness,sparseness_suppressed,effectiveness,effectiveness_plus,zero_valid,"
         "evaluations,generations\n";
  for (const auto& r : results) {
    const MetricsReport& m = r.metrics;
    out << to_string(r.config.engine.engine) << ',' << r.repetition << ',' << r.rng_seed << ','
        << m.total_generated << ',' << m.valid_count << ',' << m.executed_count << ','
        << m.detected_failures << ',' << m.obe_count << ',' << fmt_double(m.sparseness) << ','
        << (m.sparseness_suppressed ? 1 : 0) << ',' << fmt_double(m.effectiveness) << ','
        << fmt_double(m.effectiveness_plus) << ',' << (m.zero_valid ? 1 : 0) << ','
        << r.stats.evaluations << ',' << r.stats.generations << '\n';
  }
}

// ---------------------------------------------------------------------------

Distribution summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summary of no values");
  std::sort(values.begin(), values.end());
  Distribution d;
  d.count = values.size();
  d.min = values.front();
  d.max = values.back();
  const std::size_t n = values.size();
  d.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  d.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return d;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_box_plot(const std::string& title, const std::vector<BoxSeries>& series) {
  constexpr double kTop = 40.0, kBottom = 360.0, kLeft = 70.0, kSlot = 120.0, kBox = 50.0;
  const double width = kLeft + kSlot * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 20.0;
  const double height = kBottom + 40.0;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto y = [&](double v) { return kBottom - (v - lo) / (hi - lo) * (kBottom - kTop); };

  std::ostringstream os;
  os << std::setprecision(12);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<title>" << xml_escape(title) << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">" << xml_escape(title) << "</text>\n";
  os << "<line x1=\"" << kLeft - 10 << "\" y1=\"" << kTop << "\" x2=\"" << kLeft - 10 << "\" y2=\""
     << kBottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    os << "<text x=\"" << kLeft - 14 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\" "
          "font-family=\"sans-serif\" font-size=\"10\">" << std::setprecision(4) << v
       << std::setprecision(12) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const BoxSeries& s = series[i];
    const double cx = kLeft + kSlot * (static_cast<double>(i) + 0.5);
    os << "<g class=\"series\" data-label=\"" << xml_escape(s.label) << "\">\n";
    if (!s.values.empty()) {
      std::vector<double> sorted = s.values;
      std::sort(sorted.begin(), sorted.end());
      const double q1 = quantile(sorted, 0.25), q2 = quantile(sorted, 0.5), q3 = quantile(sorted, 0.75);
      os << "<line class=\"whisker\" x1=\"" << cx << "\" y1=\"" << y(sorted.front()) << "\" x2=\"" << cx
         << "\" y2=\"" << y(sorted.back()) << "\" stroke=\"black\"/>\n";
      os << "<rect class=\"box\" x=\"" << cx - kBox / 2 << "\" y=\"" << y(q3) << "\" width=\"" << kBox
         << "\" height=\"" << std::max(y(q1) - y(q3), 0.5) << "\" fill=\"#cfe0f3\" stroke=\"black\"/>\n";
      os << "<line class=\"median\" x1=\"" << cx - kBox / 2 << "\" y1=\"" << y(q2) << "\" x2=\""
         << cx + kBox / 2 << "\" y2=\"" << y(q2) << "\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      const double dx = (static_cast<double>(k % 7) - 3.0) * 4.0;
      os << "<circle class=\"run\" data-value=\"" << s.values[k] << "\" cx=\"" << cx + dx << "\" cy=\""
         << y(s.values[k]) << "\" r=\"3\" fill=\"#2c3e50\" fill-opacity=\"0.7\"/>\n";
    }
    os << "<text x=\"" << cx << "\" y=\"" << kBottom + 20 << "\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.label) << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_report(const std::vector<CampaignResult>& results, const fs::path& dir) {
  if (results.empty()) throw std::invalid_argument("report needs at least one result");
  fs::create_directories(dir);

  struct Metric {
    const char* name;
    double (*get)(const CampaignResult&);
  };
  static const Metric metrics[] = {
      {"failures", [](const CampaignResult& r) { return static_cast<double>(r.metrics.detected_failures); }},
      {"sparseness", [](const CampaignResult& r) { return r.metrics.sparseness; }},
      {"effectiveness", [](const CampaignResult& r) { return r.metrics.effectiveness; }},
      {"effectiveness_plus", [](const CampaignResult& r) { return r.metrics.effectiveness_plus; }},
  };

  // Engines in first-appearance order.
  std::vector<std::string> engines;
  std::map<std::string, std::vector<const CampaignResult*>> groups;
  for (const auto& r : results) {
    const std::string e = to_string(r.config.engine.engine);
    if (!groups.count(e)) engines.push_back(e);
    groups[e].push_back(&r);
  }

  {
    std::ofstream runs = open_for_write(dir / "runs.csv");
    runs << "engine,repetition,seed,detected_failures,obe_count,sparseness,effectiveness,"
            "effectiveness_plus,total_generated,valid_count,evaluations,wall_time,evaluations_per_second\n";
    for (const auto& r : results) {
      runs << to_string(r.config.engine.engine) << ',' << r.repetition << ',' << r.rng_seed << ','
           << r.metrics.detected_failures << ',' << r.metrics.obe_count << ','
           << fmt_double(r.metrics.sparseness) << ',' << fmt_double(r.metrics.effectiveness) << ','
           << fmt_double(r.metrics.effectiveness_plus) << ',' << r.metrics.total_generated << ','
           << r.metrics.valid_count << ',' << r.stats.evaluations << ',' << fmt_double(r.timing.search)
           << ',' << fmt_double(r.evaluations_per_second()) << '\n';
    }
  }

  std::ofstream summary = open_for_write(dir / "summary.csv");
  summary << "engine,metric,count,min,median,max,mean,stddev\n";
  for (const Metric& m : metrics) {
    std::vector<BoxSeries> series;
    for (const auto& e : engines) {
      BoxSeries s{e, {}};
      for (const CampaignResult* r : groups[e]) s.values.push_back(m.get(*r));
      const Distribution d = summarize(s.values);
      summary << e << ',' << m.name << ',' << d.count << ',' << fmt_double(d.min) << ','
              << fmt_double(d.median) << ',' << fmt_double(d.max) << ',' << fmt_double(d.mean) << ','
              << fmt_double(d.stddev) << '\n';
      series.push_back(std::move(s));
    }
    std::ofstream svg = open_for_write(dir / (std::string("box_") + m.name + ".svg"));
    svg << render_box_plot(m.name, series);
  }
}

std::vector<CampaignResult> load_results(const std::vector<fs::path>& dirs) {
  std::vector<fs::path> files;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) throw std::invalid_argument("not a directory: " + d.string());
    for (const auto& entry : fs::recursive_directory_iterator(d)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("result_", 0) == 0 && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<CampaignResult> results;
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw std::invalid_argument(f.string() + ": " + e.what());
    }
    results.push_back(result_from_json(j));
  }
  return results;
}

}  // namespace roadsearch
