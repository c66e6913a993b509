#include "roadsearch/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace roadsearch {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

// ---------------------------------------------------------------------------

double Individual::fitness() const {
  if (!cached_fitness) throw std::logic_error("individual has no cached fitness");
  return *cached_fitness;
}

void Individual::assign(ScenarioOutcome outcome) {
  cached_fitness = outcome.fitness.value_or(std::numeric_limits<double>::infinity());
  cached_outcome = std::move(outcome);
}

bool Validator::operator()(const ControlPolyline& cp) const {
  const ValidityReport report = check_road(cp, spec_);
  if (!report.is_valid && on_invalid_) on_invalid_(cp, report);
  return report.is_valid;
}

// ---------------------------------------------------------------------------

ControlPolyline random_road(const RoadSpec& spec, Rng& rng, const WalkParams& w) {
  const double lo = w.margin;
  const double hi = spec.map_size - w.margin;
  if (!(hi > lo)) throw std::invalid_argument("map too small for the walk margin");
  if (w.min_points < ControlPolyline::kMinPoints || w.max_points < w.min_points) {
    throw std::invalid_argument("bad walk point range");
  }

  const auto k = std::uniform_int_distribution<std::size_t>(w.min_points, w.max_points)(rng);
  const Vec2 start{lo + uniform01(rng) * (hi - lo), lo + uniform01(rng) * (hi - lo)};
  const Vec2 center{spec.map_size / 2.0, spec.map_size / 2.0};
  auto start_heading = [&] {
    const Vec2 to_center = center - start;
    return std::atan2(to_center.y, to_center.x) +
           (uniform01(rng) - 0.5) * w.heading_spread_deg * kDeg;
  };

  std::vector<Vec2> pts{start};
  std::vector<double> headings{start_heading()};
  std::vector<Vec2> best;
  std::vector<Vec2> candidate;
  for (std::size_t draws = 1; pts.size() < k && draws <= w.max_draws; ++draws) {
    const double step = w.min_step + uniform01(rng) * (w.max_step - w.min_step);
    const double delta = (2.0 * uniform01(rng) - 1.0) * w.max_delta_deg * kDeg;
    const double h = pts.size() == 1 ? headings.back() : headings.back() + delta;
    const Vec2 q = pts.back() + Vec2{std::cos(h), std::sin(h)} * step;

    bool ok = q.x >= lo && q.x <= hi && q.y >= lo && q.y <= hi;
    if (ok && pts.size() + 1 >= ControlPolyline::kMinPoints) {
      candidate = pts;
      candidate.push_back(q);
      ok = check_road(ControlPolyline::in_map(candidate, spec.map_size), spec).is_valid;
    }
    if (ok) {
      pts.push_back(q);
      headings.push_back(h);
      if (pts.size() >= ControlPolyline::kMinPoints && pts.size() > best.size()) best = pts;
    } else if (draws % w.backtrack_every == 0 && pts.size() > 1) {
      pts.pop_back();
      headings.pop_back();
      if (pts.size() == 1) headings[0] = start_heading();
    }
  }
  if (pts.size() < k && !best.empty()) pts = std::move(best);
  return ControlPolyline::in_map(std::move(pts), spec.map_size);
}

// ---------------------------------------------------------------------------

std::string to_string(SeedTag t) {
  return t == SeedTag::kFailureDerived ? "failure_derived" : "random_valid";
}

SeedTag parse_seed_tag(const std::string& s) {
  if (s == "random_valid") return SeedTag::kRandomValid;
  if (s == "failure_derived") return SeedTag::kFailureDerived;
  throw std::invalid_argument("unknown seed tag: " + s);
}

std::size_t SeedPool::count(SeedTag t) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [t](const SeedEntry& e) { return e.tag == t; }));
}

void SeedPool::check() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ValidityReport r = check_road(entries[i].road, spec);
    if (!r.is_valid) {
      throw std::invalid_argument("seed " + std::to_string(i) + " is invalid: " +
                                  to_string(r.violations.front().constraint_id));
    }
  }
}

Json seed_pool_to_json(const SeedPool& pool) {
  Json arr = Json::array();
  for (const auto& e : pool.entries) {
    Json j = road_to_json(e.road, pool.spec);
    j["tag"] = to_string(e.tag);
    j["provenance"] = e.provenance;
    arr.push_back(std::move(j));
  }
  return arr;
}

SeedPool seed_pool_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("seed pool must be a JSON array");
  SeedPool pool;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto [road, spec] = road_from_json(j[i]);
    if (i == 0) {
      pool.spec = spec;
    } else if (spec.lane_width != pool.spec.lane_width || spec.map_size != pool.spec.map_size ||
               spec.samples_per_segment != pool.spec.samples_per_segment) {
      throw std::invalid_argument("seed pool entries disagree on road geometry");
    }
    SeedEntry e;
    e.road = std::move(road);
    try {
      e.tag = parse_seed_tag(j[i].at("tag").get<std::string>());
      e.provenance = j[i].value("provenance", std::string{});
    } catch (const Json::exception& ex) {
      throw std::invalid_argument(std::string("bad seed entry: ") + ex.what());
    }
    pool.entries.push_back(std::move(e));
  }
  return pool;
}

void save_seed_pool(const SeedPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << seed_pool_to_json(pool).dump(1) << '\n';
}

SeedPool load_seed_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read seed pool " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw std::invalid_argument("seed pool " + path + " is not JSON: " + e.what());
  }
  return seed_pool_from_json(j);
}

SeedPool bootstrap_seed_pool(const BootstrapConfig& config, const RoadSpec& spec,
                             const BuiltinExecutor& executor, BootstrapReport* report) {
  Rng rng(config.rng_seed);
  SeedPool pool;
  pool.spec = spec;
  BootstrapReport rep;
  std::size_t random_valid = 0;
  for (std::size_t c = 0; c < config.candidates; ++c) {
    ++rep.candidates;
    ControlPolyline cp = random_road(spec, rng, config.walk);
    SampledRoad road;
    if (!check_road(cp, spec, &road).is_valid) continue;
    ++rep.valid;

    SeedEntry entry;
    entry.road = std::move(cp);
    std::ostringstream prov;
    prov << "bootstrap seed=" << config.rng_seed << " candidate=" << c;
    if (!config.max_executions || rep.executed < *config.max_executions) {
      TestScenario s;
      s.id = "b" + std::to_string(c);
      s.road = entry.road;
      s.spec = spec;
      s.driving.speed_limit_kmh = config.speed_limit_kmh;
      s.tolerance_threshold = config.failure_threshold;
      const Execution ex = executor.run(s, road);
      ++rep.executed;
      prov << " max_oob=" << ex.outcome.max_oob_fraction;
      if (ex.outcome.max_oob_fraction >= config.failure_threshold) {
        entry.tag = SeedTag::kFailureDerived;
      }
    }
    if (entry.tag == SeedTag::kRandomValid) {
      if (config.max_random_valid && random_valid >= *config.max_random_valid) continue;
      ++random_valid;
    }
    entry.provenance = prov.str();
    pool.entries.push_back(std::move(entry));
  }
  if (report) *report = rep;
  if (rep.valid == 0) {
    throw std::invalid_argument("bootstrap produced no valid road; check map size and walk bounds");
  }
  return pool;
}

std::vector<Individual> init_population(const SeedPool& pool, std::size_t size, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("seed pool is empty");
  std::vector<std::size_t> failing;
  std::vector<std::size_t> plain;
  for (std::size_t i = 0; i < pool.entries.size(); ++i) {
    (pool.entries[i].tag == SeedTag::kFailureDerived ? failing : plain).push_back(i);
  }
  const bool mixed = !failing.empty() && !plain.empty();
  std::vector<Individual> pop;
  pop.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t idx;
    if (mixed) {
      const auto& subset = uniform01(rng) < 0.5 ? failing : plain;
      idx = subset[uniform_index(rng, subset.size())];
    } else {
      idx = uniform_index(rng, pool.entries.size());
    }
    pop.emplace_back(pool.entries[idx].road);
  }
  return pop;
}

// ---------------------------------------------------------------------------

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::kGa: return "ga";
    case EngineKind::kEsPlus: return "es_plus";
    case EngineKind::kEsComma: return "es_comma";
    case EngineKind::kPso: return "pso";
    case EngineKind::kRandom: return "random";
  }
  return "?";
}

EngineKind parse_engine(const std::string& s) {
  for (EngineKind e : {EngineKind::kGa, EngineKind::kEsPlus, EngineKind::kEsComma, EngineKind::kPso,
                       EngineKind::kRandom}) {
    if (to_string(e) == s) return e;
  }
  throw std::invalid_argument("unknown engine: " + s);
}

EngineConfig EngineConfig::defaults_for(EngineKind e) {
  EngineConfig c;
  c.engine = e;
  if (e == EngineKind::kEsComma) c.offspring_size = 100;
  return c;
}

void EngineConfig::check() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("engine config: " + m); };
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (population_size == 0) fail("population_size must be positive");
  if (tournament_size == 0) fail("tournament_size must be positive");
  if (!rate_ok(crossover_rate)) fail("crossover_rate outside [0, 1]");
  if (!rate_ok(mutation_rate)) fail("mutation_rate outside [0, 1]");
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail("eta must be a finite non-negative number");
  if (threads == 0) fail("threads must be positive");
  if ((engine == EngineKind::kEsPlus || engine == EngineKind::kEsComma) && offspring_size == 0) {
    fail("offspring_size must be positive");
  }
  if (engine == EngineKind::kEsComma && population_size >= offspring_size) {
    fail("es_comma needs population_size < offspring_size");
  }
  if (!std::isfinite(pso.w) || !std::isfinite(pso.c1) || !std::isfinite(pso.c2)) {
    fail("pso coefficients must be finite");
  }
  if (walk.min_points < ControlPolyline::kMinPoints || walk.max_points < walk.min_points) {
    fail("walk point range");
  }
  if (!(walk.min_step > 0.0) || walk.max_step < walk.min_step) fail("walk step range");
  if (walk.backtrack_every == 0) fail("walk backtrack_every must be positive");
}

// ---------------------------------------------------------------------------

std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament on an empty population");
  if (k == 0) throw std::invalid_argument("tournament size must be positive");
  const std::size_t n = pop.size();
  std::vector<std::size_t> picks;
  if (k <= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(rng, n - i);
      std::swap(all[i], all[j]);
    }
    picks.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    for (std::size_t i = 0; i < k; ++i) picks.push_back(uniform_index(rng, n));
  }
  std::size_t best = picks.front();
  for (std::size_t idx : picks) {
    const double f = pop[idx].fitness();
    const double fb = pop[best].fitness();
    if (f < fb || (f == fb && idx < best)) best = idx;
  }
  return best;
}

CrossoverResult crossover(const Individual& a, const Individual& b, Rng& rng,
                          const Validator& validator) {
  const auto& pa = a.chromosome.points;
  const auto& pb = b.chromosome.points;
  const std::size_t min_len = std::min(pa.size(), pb.size());
  if (min_len < ControlPolyline::kMinPoints) {
    throw std::invalid_argument("crossover needs parents with at least 4 points");
  }
  std::vector<std::size_t> cuts(min_len - 1);
  std::iota(cuts.begin(), cuts.end(), std::size_t{1});
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(std::min(cuts.size(), kCrossoverAttempts));

  auto splice = [](const ControlPolyline& head, const ControlPolyline& tail, std::size_t cut) {
    ControlPolyline c = head;
    c.points.assign(head.points.begin(), head.points.begin() + static_cast<std::ptrdiff_t>(cut));
    c.points.insert(c.points.end(), tail.points.begin() + static_cast<std::ptrdiff_t>(cut),
                    tail.points.end());
    return c;
  };

  CrossoverResult result;
  std::vector<Individual> kept;
  for (std::size_t cut : cuts) {
    ++result.attempts;
    for (ControlPolyline child :
         {splice(a.chromosome, b.chromosome, cut), splice(b.chromosome, a.chromosome, cut)}) {
      if (kept.size() < 2 && validator(child)) kept.emplace_back(std::move(child));
    }
    if (kept.size() == 2) {
      result.first = std::move(kept[0]);
      result.second = std::move(kept[1]);
      return result;
    }
  }
  result.first = a;
  result.second = b;
  result.rolled_back = true;
  return result;
}

double polynomial_bounded(double x, AxisBounds bounds, double eta, Rng& rng) {
  const double lo = bounds.min;
  const double hi = bounds.max;
  if (!(hi > lo)) return bounds.clamp(x);
  x = bounds.clamp(x);
  const double d1 = (x - lo) / (hi - lo);
  const double d2 = (hi - x) / (hi - lo);
  const double u = uniform01(rng);
  const double pow_ = 1.0 / (eta + 1.0);
  double dq;
  if (u < 0.5) {
    const double xy = 1.0 - d1;
    const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
    dq = std::pow(val, pow_) - 1.0;
  } else {
    const double xy = 1.0 - d2;
    const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta + 1.0);
    dq = 1.0 - std::pow(val, pow_);
  }
  return bounds.clamp(x + dq * (hi - lo));
}

Individual mutate(const Individual& ind, double eta, Rng& rng, const Validator& validator) {
  const ControlPolyline& cp = ind.chromosome;
  std::vector<std::size_t> order(cp.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t idx : order) {
    const bool along_x = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
    const AxisBounds bounds = along_x ? cp.x_bounds : cp.y_bounds;
    const double old = along_x ? cp.points[idx].x : cp.points[idx].y;
    double value = old;
    // A zero draw is not a mutation; a few redraws almost always move it.
    for (int redraw = 0; redraw < 16 && value == old; ++redraw) {
      value = polynomial_bounded(old, bounds, eta, rng);
    }
    if (value == old) continue;
    ControlPolyline m = cp;
    (along_x ? m.points[idx].x : m.points[idx].y) = value;
    if (validator(m)) return Individual(std::move(m));
  }
  return ind;
}

// ---------------------------------------------------------------------------

PsoUpdate pso_velocity_update(std::span<const Vec2> position, std::span<const Vec2> velocity,
                              std::span<const Vec2> p_best, std::span<const Vec2> g_best,
                              const PsoParams& params, double r1, double r2) {
  if (velocity.size() != position.size()) {
    throw std::invalid_argument("velocity and position lengths differ");
  }
  PsoUpdate u;
  u.velocity.resize(position.size());
  u.position.resize(position.size());
  for (std::size_t i = 0; i < position.size(); ++i) {
    Vec2 v = velocity[i] * params.w;
    if (i < p_best.size()) v = v + (p_best[i] - position[i]) * (params.c1 * r1);
    if (i < g_best.size()) v = v + (g_best[i] - position[i]) * (params.c2 * r2);
    u.velocity[i] = v;
    u.position[i] = position[i] + v;
  }
  return u;
}

SwarmState init_swarm(std::vector<Individual> population, const PsoParams& params) {
  if (population.empty()) throw std::invalid_argument("empty swarm");
  SwarmState swarm;
  swarm.hyperparams = params;
  std::size_t best = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i].fitness() < population[best].fitness()) best = i;
  }
  swarm.g_best = population[best];
  for (auto& ind : population) {
    Particle p;
    p.velocity.assign(ind.chromosome.size(), Vec2{});
    p.p_best = ind;
    p.individual = std::move(ind);
    swarm.particles.push_back(std::move(p));
  }
  return swarm;
}

bool pso_iteration(SwarmState& swarm, Rng& rng, const Validator& validator,
                   const Evaluator& evaluate, PsoCounters* counters,
                   const std::function<void(const std::string&)>& on_event) {
  constexpr int kRetries = 3;
  for (std::size_t pi = 0; pi < swarm.particles.size(); ++pi) {
    Particle& p = swarm.particles[pi];
    const double r1 = 2.0 * (1.0 - uniform01(rng));
    const double r2 = 2.0 * (1.0 - uniform01(rng));
    const ControlPolyline& here = p.individual.chromosome;
    PsoUpdate u = pso_velocity_update(here.points, p.velocity, p.p_best.chromosome.points,
                                      swarm.g_best.chromosome.points, swarm.hyperparams, r1, r2);

    auto place = [&] {
      ControlPolyline cp = here;
      for (std::size_t i = 0; i < cp.points.size(); ++i) {
        const Vec2 q = here.points[i] + u.velocity[i];
        cp.points[i] = {cp.x_bounds.clamp(q.x), cp.y_bounds.clamp(q.y)};
      }
      return cp;
    };
    ControlPolyline next = place();
    bool ok = next == here || validator(next);
    for (int retry = 0; !ok && retry < kRetries; ++retry) {
      for (Vec2& v : u.velocity) v = v * 0.5;
      if (counters) ++counters->halvings;
      next = place();
      ok = next == here || validator(next);
    }
    p.velocity = u.velocity;
    if (!ok) {
      if (counters) ++counters->reverts;
      if (on_event) on_event("pso: particle " + std::to_string(pi) + " kept its position");
      continue;
    }
    if (next != here) {
      std::optional<ScenarioOutcome> outcome = evaluate(next);
      if (!outcome) return false;
      Individual moved(std::move(next));
      moved.assign(std::move(*outcome));
      p.individual = std::move(moved);
    }
    if (p.individual.fitness() < p.p_best.fitness()) p.p_best = p.individual;
    if (p.individual.fitness() < swarm.g_best.fitness()) swarm.g_best = p.individual;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

/// Shared engine plumbing: rng, budget, evaluation and the outcome ledger.
class Search {
 public:
  Search(const SearchInputs& in, Executor& executor, const SearchHooks& hooks)
      : in_(in),
        executor_(executor),
        builtin_(dynamic_cast<BuiltinExecutor*>(&executor)),
        hooks_(hooks),
        rng_(in.config.rng_seed),
        validator_(in.settings.spec,
                   [this](const ControlPolyline& cp, const ValidityReport&) { record_invalid(cp); }),
        start_(Clock::now()) {
    in.config.check();
    in.settings.spec.check();
  }

  Rng& rng() { return rng_; }
  const Validator& validator() const { return validator_; }
  const EngineConfig& config() const { return in_.config; }
  SearchStats& stats() { return result_.stats; }

  const SeedPool& seeds() const {
    if (!in_.seeds || in_.seeds->empty()) {
      throw std::invalid_argument(to_string(in_.config.engine) + " needs a non-empty seed pool");
    }
    return *in_.seeds;
  }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  bool exhausted() const {
    const Budget& b = in_.budget;
    if (b.max_evaluations && result_.stats.evaluations >= *b.max_evaluations) return true;
    if (b.wall_seconds && elapsed() >= *b.wall_seconds) return true;
    return false;
  }

  bool generations_done() const {
    return in_.budget.max_generations && result_.stats.generations >= *in_.budget.max_generations;
  }

  bool keep_going() const { return !exhausted() && !generations_done(); }

  /// False when the budget prevented the evaluation.
  bool evaluate(Individual& ind) {
    if (exhausted()) return false;
    SampledRoad road;
    const ValidityReport report = check_road(ind.chromosome, in_.settings.spec, &road);
    if (!report.is_valid) {
      ind.assign(record_invalid(ind.chromosome));
      return true;
    }
    TestScenario s = new_scenario(ind.chromosome, in_.settings, ids_);
    ScenarioOutcome o = execute(s, road);
    ++result_.stats.evaluations;
    record(s, o);
    ind.assign(std::move(o));
    return true;
  }

  /// Evaluates every uncached individual in order. False if the budget ran out.
  bool evaluate_all(std::span<Individual> inds) {
    if (in_.config.threads > 1 && executor_.capabilities().reentrant) return evaluate_parallel(inds);
    for (Individual& ind : inds) {
      if (!ind.evaluated() && !evaluate(ind)) return false;
    }
    return true;
  }

  Individual mutate(const Individual& ind) {
    Individual m = roadsearch::mutate(ind, in_.config.eta, rng_, validator_);
    if (m.chromosome == ind.chromosome) ++result_.stats.mutation_exhausted;
    return m;
  }

  CrossoverResult crossover(const Individual& a, const Individual& b) {
    CrossoverResult r = roadsearch::crossover(a, b, rng_, validator_);
    if (r.rolled_back) {
      ++result_.stats.crossover_rollbacks;
      event("crossover rolled back after " + std::to_string(r.attempts) + " cuts");
    }
    return r;
  }

  void generation_done(std::span<const Individual> pop, std::size_t pool, std::size_t offspring) {
    ++result_.stats.generations;
    note_best(pop);
    if (hooks_.on_generation) hooks_.on_generation({result_.stats.generations, pop, pool, offspring});
  }

  void note_best(std::span<const Individual> pop) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ind : pop) best = std::min(best, ind.fitness());
    result_.best_fitness.push_back(best);
  }

  void note_best(double f) { result_.best_fitness.push_back(f); }

  void event(const std::string& msg) {
    if (hooks_.on_event) hooks_.on_event(msg);
  }

  const std::function<void(const std::string&)>& event_sink() const { return hooks_.on_event; }

  SearchResult finish() {
    result_.stats.wall_time = elapsed();
    return std::move(result_);
  }

 private:
  ScenarioOutcome execute(const TestScenario& s, const SampledRoad& road) {
    try {
      if (builtin_) return builtin_->run(s, road).outcome;
      return executor_.execute(s).outcome;
    } catch (const ExecutorError& e) {
      ScenarioOutcome o;
      o.scenario_id = s.id;
      o.valid = true;
      o.executed = false;
      o.triage = std::string("executor_error: ") + e.what();
      return o;
    }
  }

  ScenarioOutcome record_invalid(const ControlPolyline& cp) {
    TestScenario s = new_scenario(cp, in_.settings, ids_);
    ScenarioOutcome o;
    o.scenario_id = s.id;
    o.valid = false;
    o.executed = false;
    ++result_.stats.invalid_candidates;
    record(s, o);
    return o;
  }

  void record(const TestScenario& s, const ScenarioOutcome& o) {
    result_.outcomes.push_back(o);
    if (o.failed()) result_.failing_scenarios.push_back(s);
    if (hooks_.on_outcome) hooks_.on_outcome(s, o);
  }

  struct Job {
    Individual* ind;
    TestScenario scenario;
    SampledRoad road;
  };

  // Scenario ids and ledger order follow the index order; only execution overlaps.
  bool evaluate_parallel(std::span<Individual> inds) {
    std::vector<Job> jobs;
    for (Individual& ind : inds) {
      if (ind.evaluated()) continue;
      std::size_t pending = result_.stats.evaluations + jobs.size();
      const bool budget_hit = (in_.budget.max_evaluations && pending >= *in_.budget.max_evaluations) ||
                              (in_.budget.wall_seconds && elapsed() >= *in_.budget.wall_seconds);
      if (budget_hit) {
        run_jobs(jobs);
        return false;
      }
      SampledRoad road;
      if (!check_road(ind.chromosome, in_.settings.spec, &road).is_valid) {
        run_jobs(jobs);
        ind.assign(record_invalid(ind.chromosome));
        continue;
      }
      jobs.push_back({&ind, new_scenario(ind.chromosome, in_.settings, ids_), std::move(road)});
      if (jobs.size() >= in_.config.threads) run_jobs(jobs);
    }
    run_jobs(jobs);
    return true;
  }

  void run_jobs(std::vector<Job>& jobs) {
    std::vector<std::future<ScenarioOutcome>> futures;
    for (Job& job : jobs) {
      futures.push_back(
          std::async(std::launch::async, [this, &job] { return execute(job.scenario, job.road); }));
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      ScenarioOutcome o = futures[k].get();
      ++result_.stats.evaluations;
      record(jobs[k].scenario, o);
      jobs[k].ind->assign(std::move(o));
    }
    jobs.clear();
  }

  const SearchInputs& in_;
  Executor& executor_;
  BuiltinExecutor* builtin_;
  const SearchHooks& hooks_;
  Rng rng_;
  Validator validator_;
  IdSource ids_;
  Clock::time_point start_;
  SearchResult result_;
};

void require_engine(const SearchInputs& in, std::initializer_list<EngineKind> kinds) {
  if (std::find(kinds.begin(), kinds.end(), in.config.engine) == kinds.end()) {
    throw std::invalid_argument("engine " + to_string(in.config.engine) + " routed to the wrong loop");
  }
}

}  // namespace

SearchResult run_ga(const SearchInputs& in, Executor& executor, const SearchHooks& hooks) {
  require_engine(in, {EngineKind::kGa});
  Search s(in, executor, hooks);
  const EngineConfig& cfg = s.config();
  std::vector<Individual> pop = init_population(s.seeds(), cfg.population_size, s.rng());
  if (!s.evaluate_all(pop)) return s.finish();
  s.note_best(pop);

  while (s.keep_going()) {
    std::vector<Individual> offspring;
    offspring.reserve(cfg.population_size);
    while (offspring.size() < cfg.population_size) {
      Individual a = pop[tournament_select(pop, cfg.tournament_size, s.rng())];
      Individual b = pop[tournament_select(pop, cfg.tournament_size, s.rng())];
      if (uniform01(s.rng()) < cfg.crossover_rate) {
        CrossoverResult r = s.crossover(a, b);
        a = std::move(r.first);
        b = std::move(r.second);
      }
      if (uniform01(s.rng()) < cfg.mutation_rate) a = s.mutate(a);
      if (uniform01(s.rng()) < cfg.mutation_rate) b = s.mutate(b);
      offspring.push_back(std::move(a));
      if (offspring.size() < cfg.population_size) offspring.push_back(std::move(b));
    }
    if (!s.evaluate_all(offspring)) break;
    if (cfg.elitism) {
      auto by_fitness = [](const Individual& x, const Individual& y) { return x.fitness() < y.fitness(); };
      const auto best = std::min_element(pop.begin(), pop.end(), by_fitness);
      const auto worst = std::max_element(offspring.begin(), offspring.end(), by_fitness);
      if (best->fitness() < worst->fitness()) *worst = *best;
    }
    pop = std::move(offspring);
    s.generation_done(pop, pop.size(), pop.size());
  }
  return s.finish();
}

SearchResult run_es(const SearchInputs& in, Executor& executor, const SearchHooks& hooks) {
  require_engine(in, {EngineKind::kEsPlus, EngineKind::kEsComma});
  Search s(in, executor, hooks);
  const EngineConfig& cfg = s.config();
  const std::size_t mu = cfg.population_size;
  const std::size_t lambda = cfg.offspring_size;
  std::vector<Individual> pop = init_population(s.seeds(), mu, s.rng());
  if (!s.evaluate_all(pop)) return s.finish();
  s.note_best(pop);

  while (s.keep_going()) {
    std::vector<Individual> temp;
    temp.reserve(lambda);
    for (std::size_t i = 0; i < lambda; ++i) temp.push_back(pop[uniform_index(s.rng(), pop.size())]);

    std::vector<Individual> offspring;
    for (std::size_t i = 0; i < lambda; ++i) {
      const double choice = uniform01(s.rng());
      if (choice < cfg.crossover_rate) {
        // Partner from the rest of the temporary population or from P.
        const std::size_t j = uniform_index(s.rng(), (lambda - 1) + pop.size());
        const Individual& partner =
            j < lambda - 1 ? temp[j < i ? j : j + 1] : pop[j - (lambda - 1)];
        CrossoverResult r = s.crossover(temp[i], partner);
        offspring.push_back(std::move(r.first));
        offspring.push_back(std::move(r.second));
      } else if (choice < cfg.crossover_rate + cfg.mutation_rate) {
        offspring.push_back(s.mutate(temp[i]));
      } else {
        offspring.push_back(temp[i]);
      }
    }
    if (!s.evaluate_all(offspring)) break;

    std::vector<Individual> pool;
    if (cfg.engine == EngineKind::kEsPlus) {
      pool = std::move(pop);
      pool.insert(pool.end(), offspring.begin(), offspring.end());
    } else {
      pool = offspring;
    }
    std::vector<Individual> next;
    next.reserve(mu);
    for (std::size_t i = 0; i < mu; ++i) next.push_back(pool[tournament_select(pool, cfg.tournament_size, s.rng())]);
    pop = std::move(next);
    s.generation_done(pop, pool.size(), offspring.size());
  }
  return s.finish();
}

SearchResult run_pso(const SearchInputs& in, Executor& executor, const SearchHooks& hooks) {
  require_engine(in, {EngineKind::kPso});
  Search s(in, executor, hooks);
  const EngineConfig& cfg = s.config();
  std::vector<Individual> pop = init_population(s.seeds(), cfg.population_size, s.rng());
  if (!s.evaluate_all(pop)) return s.finish();
  SwarmState swarm = init_swarm(std::move(pop), cfg.pso);
  s.note_best(swarm.g_best.fitness());

  const Evaluator evaluate = [&s](const ControlPolyline& cp) -> std::optional<ScenarioOutcome> {
    Individual ind(cp);
    if (!s.evaluate(ind)) return std::nullopt;
    return ind.cached_outcome;
  };
  std::vector<Individual> view;
  while (s.keep_going()) {
    PsoCounters counters;
    const bool complete = pso_iteration(swarm, s.rng(), s.validator(), evaluate, &counters, s.event_sink());
    s.stats().pso_halvings += counters.halvings;
    s.stats().pso_reverts += counters.reverts;
    if (!complete) break;
    view.clear();
    for (const auto& p : swarm.particles) view.push_back(p.individual);
    ++s.stats().generations;
    s.note_best(swarm.g_best.fitness());
    if (hooks.on_generation) {
      hooks.on_generation({s.stats().generations, view, view.size(), view.size()});
    }
  }
  return s.finish();
}

SearchResult run_random(const SearchInputs& in, Executor& executor, const SearchHooks& hooks) {
  require_engine(in, {EngineKind::kRandom});
  Search s(in, executor, hooks);
  constexpr std::size_t kMaxInvalidStreak = 10000;
  std::size_t invalid_streak = 0;
  while (!s.exhausted()) {
    Individual ind(random_road(in.settings.spec, s.rng(), s.config().walk));
    if (!s.evaluate(ind)) break;
    if (ind.cached_outcome->valid) {
      invalid_streak = 0;
    } else if (++invalid_streak >= kMaxInvalidStreak) {
      s.event("random: no valid road in " + std::to_string(kMaxInvalidStreak) + " draws, stopping");
      break;
    }
  }
  return s.finish();
}

SearchResult run_search(const SearchInputs& in, Executor& executor, const SearchHooks& hooks) {
  switch (in.config.engine) {
    case EngineKind::kGa: return run_ga(in, executor, hooks);
    case EngineKind::kEsPlus:
    case EngineKind::kEsComma: return run_es(in, executor, hooks);
    case EngineKind::kPso: return run_pso(in, executor, hooks);
    case EngineKind::kRandom: return run_random(in, executor, hooks);
  }
  throw std::invalid_argument("unknown engine");
}

}  // namespace roadsearch
