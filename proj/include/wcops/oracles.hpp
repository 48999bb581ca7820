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

// Full-information oracles (safe and unconstrained optima, safety margin)
// and the online performance metrics computed from them.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "wcops/cmdp.hpp"
#include "wcops/linprog.hpp"
#include "wcops/polytope.hpp"

namespace wcops {

inline PairVector average_vectors(const std::vector<PairVector>& seq) {
  if (seq.empty()) throw StructuralError("empty sequence");
  PairVector avg(seq.front().size(), 0.0);
  for (const auto& v : seq)
    for (std::size_t p = 0; p < avg.size(); ++p) avg[p] += v[p];
  for (auto& v : avg) v /= static_cast<double>(seq.size());
  return avg;
}

struct SafeOptimum {
  bool feasible = false;
  double value = 0.0;
  PairVector q;
};

/// max r^T q over the exact occupancy polytope of `transitions` subject to
/// g_i^T q <= 0; `reward` is the time-averaged reward.
inline SafeOptimum safe_optimum(const TransitionModel& transitions, const CostMatrix& g_bar,
                                const PairVector& reward) {
  const Layout& layout = transitions.layout();
  PolyhedralSet set = exact_occupancy_polytope(transitions);
  for (const auto& g : g_bar) {
    if (g.size() != layout.num_pairs()) throw StructuralError("cost vector size");
    set.add_inequality(to_eigen(g), 0.0);
  }
  LpOptions opt;
  opt.feasibility_tol = 1e-10;
  const LpResult lp = solve_lp(to_eigen(reward), set, opt);
  SafeOptimum out;
  if (lp.status == LpStatus::kInfeasible) return out;
  if (lp.status != LpStatus::kOptimal) throw SolverError("safe optimum LP failed", {}, 0, 0, 0);
  out.feasible = true;
  out.q = to_std(lp.x);
  for (auto& v : out.q) v = std::max(v, 0.0);
  out.value = dot_pairs(reward, out.q);
  return out;
}

struct UnconstrainedOptimum {
  double value = 0.0;
  Policy policy;
  PairVector q;
};

/// Backward dynamic programming on the averaged reward.
inline UnconstrainedOptimum unconstrained_optimum(const TransitionModel& transitions,
                                                  const PairVector& reward) {
  const Layout& layout = transitions.layout();
  std::vector<double> v(layout.num_states(), 0.0);
  std::vector<std::size_t> best(layout.num_states(), 0);
  for (std::size_t x = layout.num_states() - 1; x-- > 0;) {
    const std::size_t k = layout.layer_of(x);
    const std::size_t first_next = layout.first_state(k + 1);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < layout.num_actions(); ++a) {
      const std::size_t p = layout.pair_index(x, a);
      double val = reward[p];
      const auto row = transitions.row(p);
      for (std::size_t j = 0; j < row.size(); ++j) val += row[j] * v[first_next + j];
      if (val > top) {
        top = val;
        best[x] = a;
      }
    }
    v[x] = top;
  }
  UnconstrainedOptimum out;
  out.value = v[layout.initial_state()];
  best.resize(layout.num_states() - 1);
  out.policy = Policy::deterministic(layout, best);
  out.q = compute_pair_occupancy(transitions, out.policy);
  return out;
}

/// margin(x,a) = min_i -g_i(x,a).
inline PairVector margins_from_means(const CostMatrix& g_bar, std::size_t num_pairs) {
  PairVector m(num_pairs, std::numeric_limits<double>::infinity());
  for (const auto& g : g_bar)
    for (std::size_t p = 0; p < num_pairs; ++p) m[p] = std::min(m[p], -g[p]);
  return m;
}

/// margin(x,a) = min_t min_i -g_{t,i}(x,a).
inline PairVector margins_from_sequence(const std::vector<CostMatrix>& costs, std::size_t num_pairs) {
  PairVector m(num_pairs, std::numeric_limits<double>::infinity());
  for (const auto& g : costs) {
    const PairVector step = margins_from_means(g, num_pairs);
    for (std::size_t p = 0; p < num_pairs; ++p) m[p] = std::min(m[p], step[p]);
  }
  return m;
}

struct RhoResult {
  double rho = 0.0;
  double alpha = 0.0;
  /// Largest threshold with a valid restricted occupancy, before clamping.
  std::optional<double> raw;
  /// Occupancy of the uniform policy over surviving actions.
  std::optional<PairVector> q_diamond;
};

/// Pairs whose margin is at least theta and whose every successor is a usable
/// state; nullopt when the initial state has no usable action.
inline std::optional<std::vector<bool>> usable_pairs(const TransitionModel& transitions,
                                                     const PairVector& margins, double theta) {
  const Layout& layout = transitions.layout();
  std::vector<bool> state_ok(layout.num_states(), false);
  std::vector<bool> pair_ok(layout.num_pairs(), false);
  state_ok[layout.num_states() - 1] = true;
  for (std::size_t x = layout.num_states() - 1; x-- > 0;) {
    const std::size_t first_next = layout.first_state(layout.layer_of(x) + 1);
    for (std::size_t a = 0; a < layout.num_actions(); ++a) {
      const std::size_t p = layout.pair_index(x, a);
      if (margins[p] < theta) continue;
      const auto row = transitions.row(p);
      bool ok = true;
      for (std::size_t j = 0; j < row.size() && ok; ++j)
        if (row[j] > 0.0 && !state_ok[first_next + j]) ok = false;
      pair_ok[p] = ok;
      if (ok) state_ok[x] = true;
    }
  }
  if (!state_ok[layout.initial_state()]) return std::nullopt;
  return pair_ok;
}

inline RhoResult compute_rho(const TransitionModel& transitions, const PairVector& margins) {
  const Layout& layout = transitions.layout();
  std::vector<double> thresholds(margins.begin(), margins.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  RhoResult out;
  for (double theta : thresholds) {
    if (theta < 0.0) break;
    const auto ok = usable_pairs(transitions, margins, theta);
    if (!ok) continue;
    std::vector<double> probs(layout.num_pairs(), 0.0);
    for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
      std::size_t count = 0;
      for (std::size_t a = 0; a < layout.num_actions(); ++a) count += (*ok)[layout.pair_index(x, a)];
      for (std::size_t a = 0; a < layout.num_actions(); ++a) {
        const std::size_t p = layout.pair_index(x, a);
        probs[p] = count == 0 ? 1.0 / static_cast<double>(layout.num_actions())
                              : ((*ok)[p] ? 1.0 / static_cast<double>(count) : 0.0);
      }
    }
    out.raw = theta;
    out.rho = std::clamp(theta, 0.0, 1.0);
    out.alpha = out.rho / (1.0 + out.rho);
    out.q_diamond = compute_pair_occupancy(transitions, Policy(layout, std::move(probs)));
    return out;
  }
  return out;
}

/// Comparators and reference data fixed before the metric pass.
struct OracleBaselines {
  std::optional<PairVector> q_star;  // safe optimum
  PairVector q_opt;                  // unconstrained optimum
  double alpha = 0.0;
  /// True constraint means; when absent positive violation uses realized costs.
  std::optional<CostMatrix> g_bar;
};

/// Per-episode values and their cumulative series.
struct MetricStream {
  std::vector<double> reward;                      // r_t^T q_t
  std::vector<double> reward_safe;                 // r_t^T q*
  std::vector<double> reward_opt;                  // r_t^T q_opt
  std::vector<std::vector<double>> cost;           // [i][t] g_{t,i}^T q_t
  std::vector<std::vector<double>> violation_ref;  // [i][t] the term inside [.]^+

  std::vector<double> regret;        // R_t
  std::vector<double> alpha_regret;  // alpha-R_t
  std::vector<double> violation;     // V_t
  std::vector<double> positive_violation;

  std::size_t episodes() const { return reward.size(); }
};

namespace detail {

struct MetricSums {
  double reward = 0.0, safe = 0.0, opt = 0.0;
  std::vector<double> cost, positive;
};

inline void extend_cumulative(MetricStream& s, MetricSums& sums, double alpha, bool has_safe) {
  const std::size_t t = s.reward.size() - 1;
  sums.reward += s.reward[t];
  sums.safe += s.reward_safe[t];
  sums.opt += s.reward_opt[t];
  s.regret.push_back(has_safe ? sums.safe - sums.reward : std::nan(""));
  s.alpha_regret.push_back(alpha * sums.opt - sums.reward);
  double v = -std::numeric_limits<double>::infinity();
  double pv = 0.0;
  for (std::size_t i = 0; i < s.cost.size(); ++i) {
    sums.cost[i] += s.cost[i][t];
    sums.positive[i] += std::max(0.0, s.violation_ref[i][t]);
    v = std::max(v, sums.cost[i]);
    pv = std::max(pv, sums.positive[i]);
  }
  s.violation.push_back(s.cost.empty() ? 0.0 : v);
  s.positive_violation.push_back(pv);
}

}  // namespace detail

class MetricAccumulator {
 public:
  MetricAccumulator(OracleBaselines baselines, std::size_t num_constraints)
      : baselines_(std::move(baselines)) {
    stream_.cost.resize(num_constraints);
    stream_.violation_ref.resize(num_constraints);
    sums_.cost.assign(num_constraints, 0.0);
    sums_.positive.assign(num_constraints, 0.0);
  }

  /// Appends episode t given the true occupancy q_t of the played policy.
  void update(const PairVector& q_t, const PairVector& r_t, const CostMatrix& g_t) {
    stream_.reward.push_back(dot_pairs(r_t, q_t));
    stream_.reward_safe.push_back(baselines_.q_star ? dot_pairs(r_t, *baselines_.q_star) : 0.0);
    stream_.reward_opt.push_back(dot_pairs(r_t, baselines_.q_opt));
    for (std::size_t i = 0; i < stream_.cost.size(); ++i) {
      const double c = dot_pairs(g_t[i], q_t);
      stream_.cost[i].push_back(c);
      stream_.violation_ref[i].push_back(baselines_.g_bar ? dot_pairs((*baselines_.g_bar)[i], q_t) : c);
    }
    detail::extend_cumulative(stream_, sums_, baselines_.alpha, baselines_.q_star.has_value());
  }

  const MetricStream& stream() const { return stream_; }
  MetricStream take() { return std::move(stream_); }

 private:
  OracleBaselines baselines_;
  MetricStream stream_;
  detail::MetricSums sums_;
};

/// Rebuilds the cumulative series from the per-episode values.
inline MetricStream recompute_cumulative(const MetricStream& in, double alpha, bool has_safe) {
  MetricStream s;
  s.cost.resize(in.cost.size());
  s.violation_ref.resize(in.cost.size());
  detail::MetricSums sums;
  sums.cost.assign(in.cost.size(), 0.0);
  sums.positive.assign(in.cost.size(), 0.0);
  for (std::size_t t = 0; t < in.reward.size(); ++t) {
    s.reward.push_back(in.reward[t]);
    s.reward_safe.push_back(in.reward_safe[t]);
    s.reward_opt.push_back(in.reward_opt[t]);
    for (std::size_t i = 0; i < in.cost.size(); ++i) {
      s.cost[i].push_back(in.cost[i][t]);
      s.violation_ref[i].push_back(in.violation_ref[i][t]);
    }
    detail::extend_cumulative(s, sums, alpha, has_safe);
  }
  return s;
}

}  // namespace wcops
