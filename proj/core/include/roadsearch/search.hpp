#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roadsearch/executor.hpp"
#include "roadsearch/road.hpp"
#include "roadsearch/scenario.hpp"
#include "roadsearch/serialization.hpp"

namespace roadsearch {

using Rng = std::mt19937_64;

/// A chromosome plus its cached evaluation. Both caches are set together.
struct Individual {
  ControlPolyline chromosome;
  std::optional<double> cached_fitness;
  std::optional<ScenarioOutcome> cached_outcome;

  Individual() = default;
  explicit Individual(ControlPolyline cp) : chromosome(std::move(cp)) {}

  bool evaluated() const { return cached_fitness.has_value(); }
  /// Throws std::logic_error when not evaluated.
  double fitness() const;
  /// Stores an outcome; unexecuted outcomes get +inf fitness.
  void assign(ScenarioOutcome outcome);
  void invalidate() {
    cached_fitness.reset();
    cached_outcome.reset();
  }
};

// ---------------------------------------------------------------------------
// Validation with a hook for rejected candidates.

class Validator {
 public:
  using Listener = std::function<void(const ControlPolyline&, const ValidityReport&)>;

  explicit Validator(RoadSpec spec, Listener on_invalid = {})
      : spec_(spec), on_invalid_(std::move(on_invalid)) {}

  bool operator()(const ControlPolyline& cp) const;
  const RoadSpec& spec() const { return spec_; }

 private:
  RoadSpec spec_;
  Listener on_invalid_;
};

// ---------------------------------------------------------------------------
// Random roads.

/// Incremental polar walk. The start heading points at the map center give
/// or take `heading_spread / 2`; each prefix of 4+ points must be valid.
struct WalkParams {
  double margin = 10.0;
  std::size_t min_points = 4;
  std::size_t max_points = 12;
  double min_step = 25.0;
  double max_step = 60.0;
  double max_delta_deg = 60.0;
  double heading_spread_deg = 180.0;
  std::size_t max_draws = 400;
  /// Failed draws between backtracking steps.
  std::size_t backtrack_every = 10;
  bool operator==(const WalkParams&) const = default;
};

/// May return an invalid (even malformed) road when the walk gets stuck.
ControlPolyline random_road(const RoadSpec& spec, Rng& rng, const WalkParams& walk = {});

// ---------------------------------------------------------------------------
// Seed pool.

enum class SeedTag { kRandomValid, kFailureDerived };
std::string to_string(SeedTag t);
SeedTag parse_seed_tag(const std::string& s);

struct SeedEntry {
  ControlPolyline road;
  SeedTag tag = SeedTag::kRandomValid;
  std::string provenance;
  bool operator==(const SeedEntry&) const = default;
};

struct SeedPool {
  std::vector<SeedEntry> entries;
  RoadSpec spec;

  std::size_t count(SeedTag t) const;
  bool empty() const { return entries.empty(); }
  /// Throws std::invalid_argument if an entry fails validation under `spec`.
  void check() const;
  bool operator==(const SeedPool&) const = default;
};

Json seed_pool_to_json(const SeedPool& pool);
SeedPool seed_pool_from_json(const Json& j);
void save_seed_pool(const SeedPool& pool, const std::string& path);
SeedPool load_seed_pool(const std::string& path);

struct BootstrapConfig {
  std::size_t candidates = 200;
  /// Executions allowed; unset means every valid candidate runs.
  std::optional<std::size_t> max_executions;
  /// Cap on random_valid entries kept; failure-derived entries are always kept.
  std::optional<std::size_t> max_random_valid;
  double failure_threshold = 0.5;
  std::optional<double> speed_limit_kmh;
  std::uint64_t rng_seed = 42;
  WalkParams walk;
};

struct BootstrapReport {
  std::size_t candidates = 0;
  std::size_t valid = 0;
  std::size_t executed = 0;
  double validity_ratio() const {
    return candidates == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(candidates);
  }
};

/// Throws std::invalid_argument when no candidate is valid.
SeedPool bootstrap_seed_pool(const BootstrapConfig& config, const RoadSpec& spec,
                             const BuiltinExecutor& executor, BootstrapReport* report = nullptr);

/// Uniform draws with replacement; when both tags exist each draw picks the
/// failure-derived subset with probability 0.5.
std::vector<Individual> init_population(const SeedPool& pool, std::size_t size, Rng& rng);

// ---------------------------------------------------------------------------
// Engine configuration and budget.

enum class EngineKind { kGa, kEsPlus, kEsComma, kPso, kRandom };
std::string to_string(EngineKind e);
/// Accepts ga, es_plus, es_comma, pso, random.
EngineKind parse_engine(const std::string& s);

struct PsoParams {
  double w = 0.8;
  double c1 = 2.0;
  double c2 = 2.0;
  bool operator==(const PsoParams&) const = default;
};

struct EngineConfig {
  EngineKind engine = EngineKind::kGa;
  std::size_t population_size = 70;  // mu, also the swarm size
  std::size_t offspring_size = 30;   // lambda
  std::size_t tournament_size = 3;
  double crossover_rate = 0.3;
  double mutation_rate = 0.7;
  double eta = 20.0;
  PsoParams pso;
  std::uint64_t rng_seed = 0;
  bool elitism = false;
  /// Parallel evaluations when the executor is reentrant.
  unsigned threads = 1;
  WalkParams walk;

  /// Engine defaults (es_comma uses lambda = 100).
  static EngineConfig defaults_for(EngineKind e);
  /// Throws std::invalid_argument.
  void check() const;
  bool operator==(const EngineConfig&) const = default;
};

/// Unset limits are unbounded. Evaluations count executor runs.
struct Budget {
  std::optional<double> wall_seconds;
  std::optional<std::size_t> max_evaluations;
  std::optional<std::size_t> max_generations;

  static Budget evaluations(std::size_t n) { return {std::nullopt, n, std::nullopt}; }
  static Budget generations(std::size_t n) { return {std::nullopt, std::nullopt, n}; }
  static Budget seconds(double s) { return {s, std::nullopt, std::nullopt}; }
};

// ---------------------------------------------------------------------------
// Variation operators.

/// Index of the tournament winner. Draws k distinct indices (with replacement
/// when k > |pop|); lowest fitness wins, ties go to the earlier index.
/// Throws std::logic_error on an unevaluated contestant.
std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng);

struct CrossoverResult {
  Individual first;
  Individual second;
  bool rolled_back = false;
  std::size_t attempts = 0;
};

inline constexpr std::size_t kCrossoverAttempts = 5;

/// One-point crossover at distinct cuts in [1, min_len - 1]. Gives up after
/// five cuts and returns the parents unchanged.
CrossoverResult crossover(const Individual& a, const Individual& b, Rng& rng,
                          const Validator& validator);

/// Polynomial bounded perturbation of `x` within `bounds`.
double polynomial_bounded(double x, AxisBounds bounds, double eta, Rng& rng);

/// Perturbs one coordinate of one control point. Tries each control point at
/// most once; returns the original (cache intact) if none yields a valid road.
Individual mutate(const Individual& ind, double eta, Rng& rng, const Validator& validator);

// ---------------------------------------------------------------------------
// Particle swarm.

struct Particle {
  Individual individual;
  std::vector<Vec2> velocity;
  Individual p_best;
};

struct SwarmState {
  std::vector<Particle> particles;
  Individual g_best;
  PsoParams hyperparams;
};

struct PsoUpdate {
  std::vector<Vec2> velocity;
  std::vector<Vec2> position;
};

/// V' = wV + c1 r1 (P_best - P) + c2 r2 (G_best - P), P' = P + V'.
/// Best positions are index-aligned with P; indices past their end
/// contribute nothing. Throws std::invalid_argument if |V| != |P|.
PsoUpdate pso_velocity_update(std::span<const Vec2> position, std::span<const Vec2> velocity,
                              std::span<const Vec2> p_best, std::span<const Vec2> g_best,
                              const PsoParams& params, double r1, double r2);

/// Builds a swarm from evaluated individuals; velocities start at zero.
SwarmState init_swarm(std::vector<Individual> population, const PsoParams& params);

/// Returns the evaluated individual, or nullopt when the budget ran out.
using Evaluator = std::function<std::optional<ScenarioOutcome>(const ControlPolyline&)>;

struct PsoCounters {
  std::size_t halvings = 0;
  std::size_t reverts = 0;
};

/// One pass over the swarm. An invalid move halves the velocity and retries
/// up to three times, then the particle keeps its position; each such revert
/// is reported through `on_event`. Returns false if evaluation stopped early.
bool pso_iteration(SwarmState& swarm, Rng& rng, const Validator& validator,
                   const Evaluator& evaluate, PsoCounters* counters = nullptr,
                   const std::function<void(const std::string&)>& on_event = {});

// ---------------------------------------------------------------------------
// Engines.

struct SearchStats {
  std::size_t generations = 0;
  std::size_t evaluations = 0;
  std::size_t invalid_candidates = 0;
  std::size_t crossover_rollbacks = 0;
  std::size_t mutation_exhausted = 0;
  std::size_t pso_halvings = 0;
  std::size_t pso_reverts = 0;
  double wall_time = 0.0;
};

struct SearchResult {
  /// Every generated scenario (valid or not) in generation order.
  std::vector<ScenarioOutcome> outcomes;
  std::vector<TestScenario> failing_scenarios;
  /// Best fitness after initialisation and after each generation.
  std::vector<double> best_fitness;
  SearchStats stats;
};

struct GenerationInfo {
  std::size_t index = 0;
  std::span<const Individual> population;
  std::size_t selection_pool = 0;
  std::size_t offspring = 0;
};

struct SearchHooks {
  std::function<void(const TestScenario&, const ScenarioOutcome&)> on_outcome;
  std::function<void(const GenerationInfo&)> on_generation;
  std::function<void(const std::string&)> on_event;
};

struct SearchInputs {
  EngineConfig config;
  ScenarioSettings settings;
  Budget budget;
  const SeedPool* seeds = nullptr;  // required by every engine but random
};

SearchResult run_ga(const SearchInputs& in, Executor& executor, const SearchHooks& hooks = {});
SearchResult run_es(const SearchInputs& in, Executor& executor, const SearchHooks& hooks = {});
SearchResult run_pso(const SearchInputs& in, Executor& executor, const SearchHooks& hooks = {});
SearchResult run_random(const SearchInputs& in, Executor& executor, const SearchHooks& hooks = {});
/// Dispatches on config.engine.
SearchResult run_search(const SearchInputs& in, Executor& executor, const SearchHooks& hooks = {});

}  // namespace roadsearch
