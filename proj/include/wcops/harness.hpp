// Copyright 2026 The wcops Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment runner: JSON configs, seeded repetitions (optionally on a thread
// pool), oracle evaluation, aggregation with normal 95% intervals, and CSV /
// JSON / SVG outputs.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wcops/baselines.hpp"
#include "wcops/environments.hpp"
#include "wcops/oracles.hpp"
#include "wcops/svg.hpp"
#include "wcops/wcops.hpp"

namespace wcops {

using nlohmann::json;

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"regret", "alpha_regret", "violation",
                                              "positive_violation"};
  return names;
}

struct AlgorithmConfig {
  std::string name;
  json params = json::object();
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvSpec env;
  std::vector<AlgorithmConfig> algorithms;
  std::size_t horizon = 1;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  double delta = 0.01;
  std::string output = "results";
  /// Raw document after overrides; hashed for provenance of outputs.
  json source;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (repetitions < 1) throw ConfigError("reps must be >= 1");
    if (horizon < 1) throw ConfigError("T must be >= 1");
    if (algorithms.empty()) throw ConfigError("no algorithms configured");
    try {
      env.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("env: ") + e.what());
    }
  }
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

/// Explicit "values" or {"random": {seed, low, high, reward_correlation,
/// safe_action, safe_value}}.
inline PairVector resolve_values(const json& j, const Layout& layout, const PairVector* reward) {
  const std::size_t np = layout.num_pairs();
  if (j.contains("values")) {
    auto v = j.at("values").get<PairVector>();
    if (v.size() != np) throw ConfigError("values must have one entry per (state, action) pair");
    return v;
  }
  if (!j.contains("random")) throw ConfigError("process needs 'values' or 'random'");
  const json& g = j.at("random");
  Rng rng(g.value("seed", std::uint64_t{0}));
  const double lo = g.value("low", 0.0), hi = g.value("high", 1.0);
  const double kappa = g.value("reward_correlation", 0.0);
  PairVector v(np);
  for (std::size_t p = 0; p < np; ++p) {
    v[p] = lo + (hi - lo) * uniform01(rng);
    if (reward && kappa != 0.0) v[p] = (1.0 - kappa) * v[p] + kappa * (lo + (hi - lo) * (*reward)[p]);
  }
  if (g.contains("safe_action")) {
    const auto a = g.at("safe_action").get<std::size_t>();
    if (a >= layout.num_actions()) throw ConfigError("safe_action out of range");
    const double sv = g.value("safe_value", lo);
    for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) v[layout.pair_index(x, a)] = sv;
  }
  return v;
}

inline ProcessSpec parse_process(const json& j, const Layout& layout, const PairVector* reward) {
  ProcessSpec ps;
  const std::string kind = j.value("kind", "stochastic");
  if (kind == "stochastic") ps.kind = ProcessKind::kStochastic;
  else if (kind == "adversarial") ps.kind = ProcessKind::kAdversarial;
  else throw ConfigError("unknown process kind '" + kind + "'");
  ps.values = resolve_values(j, layout, reward);
  ps.step = j.value("step", 0.0);
  return ps;
}

}  // namespace detail

inline EnvSpec env_from_json(const json& j) {
  EnvSpec spec;
  spec.layer_sizes = j.at("layers").get<std::vector<std::size_t>>();
  spec.num_actions = j.at("actions").get<std::size_t>();
  spec.num_constraints = j.value("m", std::size_t{0});
  spec.transition_seed = j.value("transition_seed", std::uint64_t{0});
  spec.concentration = j.value("concentration", 1.0);
  Layout layout = spec.layout();
  spec.reward = detail::parse_process(j.at("reward"), layout, nullptr);
  const json& cons = j.value("constraints", json::array());
  if (cons.size() != spec.num_constraints) throw ConfigError("need one constraint process per m");
  for (const auto& c : cons) spec.constraints.push_back(detail::parse_process(c, layout, &spec.reward.values));
  return spec;
}

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> output;
};

inline ExperimentConfig config_from_json(json j, const ConfigOverrides& o = {}) {
  if (o.seed) j["seed"] = *o.seed;
  if (o.reps) j["reps"] = *o.reps;
  if (o.output) j["output"] = *o.output;
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.horizon = j.at("T").get<std::size_t>();
    c.repetitions = j.value("reps", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    c.delta = j.value("delta", 0.01);
    c.output = j.value("output", c.output);
    c.env = env_from_json(j.at("env"));
    for (const auto& a : j.at("algorithms")) {
      AlgorithmConfig ac;
      if (a.is_string()) {
        ac.name = a.get<std::string>();
      } else {
        ac.name = a.at("name").get<std::string>();
        ac.params = a;
        ac.params.erase("name");
      }
      c.algorithms.push_back(std::move(ac));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  // The output directory does not change results.
  json hashed = j;
  hashed.erase("output");
  c.source = std::move(hashed);
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const ConfigOverrides& o = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return config_from_json(std::move(j), o);
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(c.source.dump())); }

struct OracleHeader {
  bool safe_feasible = false;
  double opt_safe = 0.0;
  double opt = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  std::string rho_source;
};

struct RunRecord {
  std::string algorithm;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  OracleHeader oracle;
  MetricStream metrics;
  std::vector<LearnerEvent> events;
  /// pi_t(.|x0) per episode.
  std::vector<std::vector<double>> initial_policies;
  double wall_clock = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

inline std::unique_ptr<Learner> make_learner(const AlgorithmConfig& a, const EnvSpec& env,
                                             const TransitionModel& transitions,
                                             std::size_t horizon, double delta,
                                             std::ostream* debug) {
  const Layout layout = env.layout();
  const std::size_t m = env.num_constraints;
  const json& p = a.params;
  const double d = p.value("delta", delta);
  if (a.name == "wcops") {
    WcopsConfig wc;
    wc.delta = d;
    if (p.contains("eta")) wc.eta = p.at("eta").get<double>();
    if (p.contains("gamma")) wc.gamma = p.at("gamma").get<double>();
    bool stochastic = true;
    for (const auto& c : env.constraints) stochastic = stochastic && c.kind == ProcessKind::kStochastic;
    wc.mode = stochastic ? ConstraintMode::kStochastic : ConstraintMode::kAdversarial;
    wc.solver.debug = debug;
    return std::make_unique<WcopsLearner>(layout, m, horizon, wc);
  }
  if (a.name == "optcmdp" || a.name == "greedy") {
    OptCmdpConfig oc;
    oc.delta = d;
    oc.bonus_scale = a.name == "greedy" ? 0.0 : p.value("bonus_scale", 1.0);
    return std::make_unique<OptCmdpLearner>(layout, m, horizon, oc, a.name);
  }
  if (a.name == "optprimaldual") {
    OptPrimalDualConfig oc;
    oc.delta = d;
    oc.bonus_scale = p.value("bonus_scale", 1.0);
    oc.dual_step = p.value("dual_step", 0.0);
    oc.policy_step = p.value("policy_step", 0.0);
    if (p.contains("rho")) {
      oc.rho = p.at("rho").get<double>();
    } else {
      CostMatrix g;
      for (const auto& c : env.constraints) g.push_back(c.values);
      oc.rho = compute_rho(transitions, margins_from_means(g, layout.num_pairs())).rho;
    }
    return std::make_unique<OptPrimalDualLearner>(layout, m, horizon, oc);
  }
  throw ConfigError("unknown algorithm '" + a.name + "'");
}

/// Per-episode view handed to RunOptions::hook, once before and once after
/// the learner consumes the episode.
struct EpisodeContext {
  std::size_t algorithm = 0;
  std::size_t rep = 0;
  std::size_t episode = 0;
  bool observed = false;
  const Learner* learner = nullptr;
  const Policy* policy = nullptr;
  const CmdpInstance* instance = nullptr;
};

struct RunOptions {
  std::size_t parallel = 1;
  /// Called from the worker thread that owns the run.
  std::function<void(const EpisodeContext&)> hook;
  /// Directory for per-run solver traces; empty disables them.
  std::string debug_dir;
};

/// One (algorithm, repetition) run. Emission and trajectory streams depend on
/// the repetition seed only, so algorithms face the same stochastic draws.
inline RunRecord run_single(const ExperimentConfig& cfg, std::size_t alg, std::size_t rep,
                            const RunOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.algorithm = cfg.algorithms[alg].name;
  rec.rep = rep;
  rec.seed = cfg.seed + rep;
  rec.config_hash = config_hash(cfg);
  try {
    Environment env(cfg.env, cfg.horizon);
    const CmdpInstance& inst = env.instance();
    const Layout& layout = inst.layout;
    std::unique_ptr<std::ofstream> debug;
    if (!opt.debug_dir.empty()) {
      std::filesystem::create_directories(opt.debug_dir);
      debug = std::make_unique<std::ofstream>(opt.debug_dir + "/" + rec.algorithm + "_rep" +
                                              std::to_string(rep) + ".jsonl");
    }
    auto learner = make_learner(cfg.algorithms[alg], cfg.env, inst.transitions, cfg.horizon,
                                cfg.delta, debug.get());
    Rng emit_rng(derive_seed(rec.seed, 1));
    Rng path_rng(derive_seed(rec.seed, 2));

    std::vector<PairVector> rewards, occupancies;
    std::vector<CostMatrix> costs;
    rewards.reserve(cfg.horizon);
    occupancies.reserve(cfg.horizon);
    costs.reserve(cfg.horizon);
    const bool single_state = layout.num_states() == 2;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      const Policy pi = learner->act();
      auto e = env.emit(emit_rng);
      const EpisodeTrace trace = simulate_episode(inst, pi, e.rewards, e.costs, path_rng);
      EpisodeContext ctx{alg, rep, t + 1, false, learner.get(), &pi, &inst};
      if (opt.hook) opt.hook(ctx);
      learner->observe(trace);
      ctx.observed = true;
      if (opt.hook) opt.hook(ctx);
      env.notify_policy(pi);
      occupancies.push_back(compute_pair_occupancy(inst.transitions, pi));
      if (single_state) {
        auto row = pi.row(0);
        rec.initial_policies.emplace_back(row.begin(), row.end());
      }
      rewards.push_back(std::move(e.rewards));
      costs.push_back(std::move(e.costs));
    }

    // Oracles against the realized sequences.
    const PairVector r_avg = average_vectors(rewards);
    CostMatrix g_ref;
    PairVector margins;
    const auto means = env.cost_means();
    if (means) {
      g_ref = *means;
      margins = margins_from_means(g_ref, layout.num_pairs());
      rec.oracle.rho_source = "means";
    } else {
      g_ref.assign(cfg.env.num_constraints, PairVector(layout.num_pairs(), 0.0));
      for (const auto& g : costs)
        for (std::size_t i = 0; i < g.size(); ++i)
          for (std::size_t p = 0; p < layout.num_pairs(); ++p)
            g_ref[i][p] += g[i][p] / static_cast<double>(cfg.horizon);
      margins = margins_from_sequence(costs, layout.num_pairs());
      rec.oracle.rho_source = "realized";
    }
    const SafeOptimum safe = safe_optimum(inst.transitions, g_ref, r_avg);
    const UnconstrainedOptimum best = unconstrained_optimum(inst.transitions, r_avg);
    const RhoResult rho = compute_rho(inst.transitions, margins);
    rec.oracle.safe_feasible = safe.feasible;
    rec.oracle.opt_safe = safe.feasible ? safe.value : std::nan("");
    rec.oracle.opt = best.value;
    rec.oracle.rho = rho.rho;
    rec.oracle.alpha = rho.alpha;

    OracleBaselines base;
    if (safe.feasible) base.q_star = safe.q;
    base.q_opt = best.q;
    base.alpha = rho.alpha;
    base.g_bar = means;
    MetricAccumulator acc(std::move(base), cfg.env.num_constraints);
    for (std::size_t t = 0; t < cfg.horizon; ++t) acc.update(occupancies[t], rewards[t], costs[t]);
    rec.metrics = acc.take();
    rec.events = learner->events();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// All runs in (algorithm, repetition) order; identical for any `parallel`.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  const std::size_t total = cfg.algorithms.size() * cfg.repetitions;
  std::vector<RunRecord> records(total);
  auto task = [&](std::size_t k) {
    records[k] = run_single(cfg, k / cfg.repetitions, k % cfg.repetitions, opt);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.parallel, total));
  if (workers == 1) {
    for (std::size_t k = 0; k < total; ++k) task(k);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < total; k = next++) task(k);
    });
  for (auto& th : pool) th.join();
  return records;
}

struct Band {
  std::vector<double> mean, low, high;
};

struct Aggregate {
  std::string algorithm;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::map<std::string, Band> metrics;
  std::vector<std::string> warnings;
};

inline const std::vector<double>& metric_series(const MetricStream& s, const std::string& name) {
  if (name == "regret") return s.regret;
  if (name == "alpha_regret") return s.alpha_regret;
  if (name == "violation") return s.violation;
  if (name == "positive_violation") return s.positive_violation;
  throw ConfigError("unknown metric '" + name + "'");
}

/// mean +- 1.96 sd / sqrt(n) across runs of one series.
inline Band confidence_band(const std::vector<const std::vector<double>*>& runs) {
  Band b;
  if (runs.empty()) return b;
  const std::size_t T = runs.front()->size();
  const double n = static_cast<double>(runs.size());
  b.mean.resize(T);
  b.low.resize(T);
  b.high.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto* r : runs) sum += (*r)[t];
    const double mean = sum / n;
    double half = 0.0;
    if (runs.size() > 1) {
      double ss = 0.0;
      for (const auto* r : runs) ss += ((*r)[t] - mean) * ((*r)[t] - mean);
      half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    b.mean[t] = mean;
    b.low[t] = mean - half;
    b.high[t] = mean + half;
  }
  return b;
}

/// Groups records by algorithm in first-seen order. Runs are summed in
/// repetition order so the result does not depend on the record order.
inline std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records) {
  std::vector<Aggregate> out;
  std::map<std::string, std::vector<const RunRecord*>> by_alg;
  for (const auto& r : records) {
    if (!by_alg.count(r.algorithm)) out.push_back({r.algorithm, 0, 0, {}, {}});
    by_alg[r.algorithm].push_back(&r);
  }
  for (auto& agg : out) {
    auto group = by_alg[agg.algorithm];
    std::sort(group.begin(), group.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->rep < b->rep; });
    std::vector<const RunRecord*> good;
    for (const auto* r : group) {
      if (r->ok()) good.push_back(r);
      else agg.warnings.push_back("run " + std::to_string(r->rep) + " failed: " + r->error);
    }
    agg.runs = good.size();
    agg.failed = group.size() - good.size();
    if (good.size() == 1) agg.warnings.push_back("single run: confidence band has zero width");
    for (const auto& name : metric_names()) {
      std::vector<const std::vector<double>*> series;
      for (const auto* r : good) series.push_back(&metric_series(r->metrics, name));
      agg.metrics[name] = confidence_band(series);
    }
  }
  return out;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json events_to_json(const std::vector<LearnerEvent>& events) {
  json arr = json::array();
  for (const auto& e : events) arr.push_back({{"episode", e.episode}, {"kind", e.kind}, {"detail", e.detail}});
  return arr;
}

inline json oracle_to_json(const OracleHeader& o) {
  return {{"safe_feasible", o.safe_feasible},
          {"opt_safe", o.safe_feasible ? json(o.opt_safe) : json(nullptr)},
          {"opt", o.opt},
          {"rho", o.rho},
          {"alpha", o.alpha},
          {"rho_source", o.rho_source}};
}

/// Wall-clock time is left out so records are reproducible byte for byte.
inline json record_to_json(const RunRecord& r, std::size_t max_policy_points = 2000) {
  json j;
  j["algorithm"] = r.algorithm;
  j["rep"] = r.rep;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  if (!r.ok()) {
    j["error"] = r.error;
    return j;
  }
  j["oracle"] = oracle_to_json(r.oracle);
  json m;
  m["reward"] = r.metrics.reward;
  m["reward_safe"] = r.metrics.reward_safe;
  m["reward_opt"] = r.metrics.reward_opt;
  m["cost"] = r.metrics.cost;
  m["violation_ref"] = r.metrics.violation_ref;
  for (const auto& name : metric_names()) m[name] = metric_series(r.metrics, name);
  j["metrics"] = std::move(m);
  j["events"] = events_to_json(r.events);
  if (!r.initial_policies.empty()) {
    const std::size_t n = r.initial_policies.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_policy_points);
    json pts = json::array();
    for (std::size_t t = 0; t < n; t += stride) pts.push_back({{"episode", t + 1}, {"pi", r.initial_policies[t]}});
    if ((n - 1) % stride != 0) pts.push_back({{"episode", n}, {"pi", r.initial_policies.back()}});
    j["initial_policies"] = std::move(pts);
  }
  return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline std::string metric_label(const std::string& name) {
  if (name == "regret") return "cumulative regret R_t";
  if (name == "alpha_regret") return "cumulative alpha-regret";
  if (name == "violation") return "cumulative violation V_t";
  return "positive violation";
}

}  // namespace detail

inline std::string aggregate_csv(const Aggregate& a) {
  std::string out = "episode,metric,mean,ci_low,ci_high\n";
  for (const auto& name : metric_names()) {
    const Band& b = a.metrics.at(name);
    for (std::size_t t = 0; t < b.mean.size(); ++t) {
      out += std::to_string(t + 1) + "," + name + "," + format_double(b.mean[t]) + "," +
             format_double(b.low[t]) + "," + format_double(b.high[t]) + "\n";
    }
  }
  return out;
}

/// Reads back a CSV written by aggregate_csv.
inline Aggregate parse_aggregate_csv(const std::string& algorithm, std::istream& in) {
  Aggregate a;
  a.algorithm = algorithm;
  std::string line;
  std::getline(in, line);
  if (line != "episode,metric,mean,ci_low,ci_high") throw ConfigError("unexpected CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string ep, metric, mean, lo, hi;
    std::getline(ss, ep, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, lo, ',');
    std::getline(ss, hi, ',');
    Band& b = a.metrics[metric];
    b.mean.push_back(std::stod(mean));
    b.low.push_back(std::stod(lo));
    b.high.push_back(std::stod(hi));
  }
  return a;
}

inline json band_final(const Band& b) {
  if (b.mean.empty()) return nullptr;
  auto v = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
  return {{"mean", v(b.mean.back())}, {"ci_low", v(b.low.back())}, {"ci_high", v(b.high.back())}};
}

/// Chart files for every metric plus the simplex trajectory when `simplex`
/// data is present.
inline void write_charts(const std::vector<Aggregate>& aggs, const std::filesystem::path& dir,
                         const std::string& title, const json& simplex) {
  for (const auto& name : metric_names()) {
    std::vector<svg::Series> series;
    for (const auto& a : aggs) {
      auto it = a.metrics.find(name);
      if (it == a.metrics.end()) continue;
      svg::Series s;
      s.label = a.algorithm;
      s.mean = it->second.mean;
      s.low = it->second.low;
      s.high = it->second.high;
      for (std::size_t t = 0; t < s.mean.size(); ++t) s.x.push_back(static_cast<double>(t + 1));
      series.push_back(std::move(s));
    }
    detail::write_text(dir / (name + ".svg"),
                       svg::line_chart(title + ": " + detail::metric_label(name),
                                       detail::metric_label(name), series));
  }
  if (simplex.is_null()) return;
  svg::SimplexPlot plot;
  for (const auto& c : simplex.at("constraints")) plot.constraints.push_back(c.get<svg::Bary>());
  plot.reward = simplex.at("reward").get<svg::Bary>();
  if (simplex.contains("optimum") && !simplex.at("optimum").is_null())
    plot.optimum = simplex.at("optimum").get<svg::Bary>();
  for (const auto& [alg, pts] : simplex.at("trajectories").items()) {
    std::vector<svg::Bary> traj;
    for (const auto& p : pts) traj.push_back(p.get<svg::Bary>());
    plot.trajectories.emplace_back(alg, std::move(traj));
  }
  detail::write_text(dir / "simplex.svg", svg::simplex_chart(title + ": policy trajectory", plot));
}

/// Simplex overlay data for single-state, 3-action instances (repetition 0).
inline json simplex_data(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  const Layout layout = cfg.env.layout();
  if (layout.num_states() != 2 || layout.num_actions() != 3) return nullptr;
  json s;
  json cons = json::array();
  for (const auto& c : cfg.env.constraints) cons.push_back(c.values);
  s["constraints"] = cons;
  s["reward"] = cfg.env.reward.values;
  s["optimum"] = nullptr;
  json traj = json::object();
  for (const auto& r : records) {
    if (r.rep != 0 || !r.ok() || r.initial_policies.empty()) continue;
    const std::size_t n = r.initial_policies.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    json pts = json::array();
    for (std::size_t t = 0; t < n; t += stride) pts.push_back(r.initial_policies[t]);
    if ((n - 1) % stride != 0) pts.push_back(r.initial_policies.back());
    traj[r.algorithm] = std::move(pts);
  }
  s["trajectories"] = std::move(traj);
  // Safe optimum under the base parameters.
  Environment env(cfg.env, cfg.horizon);
  CostMatrix g;
  for (const auto& c : cfg.env.constraints) g.push_back(c.values);
  const SafeOptimum opt = safe_optimum(env.instance().transitions, g, cfg.env.reward.values);
  if (opt.feasible) s["optimum"] = opt.q;
  return s;
}

/// Writes <alg>.csv, summary.json, runs/<alg>_rep<k>.json, SVG charts and
/// timing.txt (the only file with wall-clock data).
inline json emit_outputs(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                         const std::vector<Aggregate>& aggs, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "runs", ec);
  if (ec) throw ConfigError("cannot create '" + dir.string() + "': " + ec.message());

  json summary;
  summary["schema"] = 1;
  summary["name"] = cfg.name;
  summary["config_hash"] = config_hash(cfg);
  summary["config"] = cfg.source;
  summary["T"] = cfg.horizon;
  summary["reps"] = cfg.repetitions;
  summary["seed"] = cfg.seed;
  summary["delta"] = cfg.delta;
  json algs = json::array();
  for (const auto& a : aggs) {
    detail::write_text(dir / (a.algorithm + ".csv"), aggregate_csv(a));
    json ja;
    ja["name"] = a.algorithm;
    ja["runs"] = a.runs;
    ja["failed"] = a.failed;
    ja["warnings"] = a.warnings;
    json fin;
    for (const auto& [name, band] : a.metrics) fin[name] = band_final(band);
    ja["final"] = std::move(fin);
    json oracles = json::array();
    for (const auto& r : records)
      if (r.algorithm == a.algorithm && r.ok()) oracles.push_back(oracle_to_json(r.oracle));
    ja["oracles"] = std::move(oracles);
    algs.push_back(std::move(ja));
  }
  summary["algorithms"] = std::move(algs);
  summary["simplex"] = simplex_data(cfg, records);

  std::string timing;
  for (const auto& r : records) {
    detail::write_text(dir / "runs" / (r.algorithm + "_rep" + std::to_string(r.rep) + ".json"),
                       record_to_json(r).dump() + "\n");
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s rep %zu: %.3f s\n", r.algorithm.c_str(), r.rep, r.wall_clock);
    timing += buf;
  }
  detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
  detail::write_text(dir / "timing.txt", timing);
  write_charts(aggs, dir, cfg.name, summary["simplex"]);
  return summary;
}

/// Regenerates the charts of an output directory from its CSV files.
inline void replot(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw ConfigError("no summary.json in '" + dir.string() + "'");
  json summary;
  in >> summary;
  std::vector<Aggregate> aggs;
  for (const auto& a : summary.at("algorithms")) {
    const std::string name = a.at("name").get<std::string>();
    std::ifstream csv(dir / (name + ".csv"));
    if (!csv) throw ConfigError("missing " + name + ".csv");
    aggs.push_back(parse_aggregate_csv(name, csv));
  }
  write_charts(aggs, dir, summary.value("name", "experiment"), summary.value("simplex", json()));
}

}  // namespace wcops
