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

// Comparison learners: OptCMDP (optimistic LP), Greedy (the same LP on
// empirical averages) and OptPrimalDual (optimistic policy gradient on the
// Lagrangian with projected dual ascent).
//
// Bonus shapes, step sizes, lambda_max and the uniform cold start are
// choices of this implementation, not part of the original methods.

#include <algorithm>
#include <cmath>
#include <optional>

#include "wcops/estimation.hpp"
#include "wcops/feasible_set.hpp"
#include "wcops/learner.hpp"
#include "wcops/linprog.hpp"
#include "wcops/polytope.hpp"

namespace wcops {

/// Counters and empirical means shared by the baselines. Any of the means or
/// the transition model can be pinned to known values.
class BaselineState {
 public:
  BaselineState(const Layout& layout, std::size_t num_constraints, std::size_t horizon,
                double delta)
      : sizes_(ProblemSizes::of(layout, num_constraints, horizon)),
        delta_(delta),
        counters_(layout),
        reward_sum_(layout.num_pairs(), 0.0),
        cost_sum_(num_constraints, PairVector(layout.num_pairs(), 0.0)) {
    check_delta(delta);
  }

  void update(const EpisodeTrace& trace) {
    counters_.update(trace);
    for (const auto& s : trace.steps) {
      const std::size_t p = layout().pair_index(s.state, s.action);
      reward_sum_[p] += s.reward;
      for (std::size_t i = 0; i < cost_sum_.size(); ++i) cost_sum_[i][p] += s.costs[i];
    }
  }

  const Layout& layout() const { return counters_.layout(); }
  const ProblemSizes& sizes() const { return sizes_; }
  double delta() const { return delta_; }
  const CounterState& counters() const { return counters_; }
  std::size_t episodes() const { return counters_.episodes(); }

  PairVector reward_means() const {
    if (known_reward) return *known_reward;
    PairVector r(reward_sum_.size());
    for (std::size_t p = 0; p < r.size(); ++p)
      r[p] = reward_sum_[p] / static_cast<double>(std::max<std::uint64_t>(1, counters_.visits(p)));
    return r;
  }

  CostMatrix cost_means() const {
    if (known_costs) return *known_costs;
    CostMatrix g(cost_sum_.size(), PairVector(layout().num_pairs()));
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t p = 0; p < g[i].size(); ++p)
        g[i][p] = cost_sum_[i][p] /
                  static_cast<double>(std::max<std::uint64_t>(1, counters_.visits(p)));
    return g;
  }

  /// Empirical model; unvisited pairs get uniform rows.
  TransitionModel center() const {
    return known_transitions ? *known_transitions : empirical_transitions(counters_, true);
  }

  /// Confidence model scaled by `scale` (0 gives the singleton {center}).
  ConfidenceModel model(double scale) const {
    PairVector widths(layout().num_pairs(), 0.0);
    if (scale > 0.0 && !known_transitions)
      for (std::size_t p = 0; p < widths.size(); ++p)
        widths[p] = scale * confidence_width(counters_.visits(p),
                                             layout().next_layer_size(layout().pair_state(p)),
                                             sizes_, delta_);
    return ConfidenceModel(center(), std::move(widths));
  }

  PairVector bonuses(double scale) const {
    PairVector b(layout().num_pairs(), 0.0);
    if (scale > 0.0)
      for (std::size_t p = 0; p < b.size(); ++p)
        b[p] = scale * bonus(counters_.visits(p), sizes_, delta_);
    return b;
  }

  std::optional<PairVector> known_reward;
  std::optional<CostMatrix> known_costs;
  std::optional<TransitionModel> known_transitions;

 private:
  ProblemSizes sizes_;
  double delta_;
  CounterState counters_;
  PairVector reward_sum_;
  CostMatrix cost_sum_;
};

struct OptimisticLpResult {
  bool constrained = true;  // false when the constraints had to be dropped
  double value = 0.0;
  OccupancyMeasure q;
  Policy policy;
};

/// max clip(r + b, 0, 1)^T q over Delta(model) s.t. (g_i - b)^T q <= 0.
/// Falls back to the unconstrained LP when the constrained one is empty.
inline OptimisticLpResult solve_optimistic_lp(const ConfidenceModel& model,
                                              const PairVector& reward, const CostMatrix& costs,
                                              const PairVector& b) {
  const Layout& layout = model.layout();
  PairVector r(reward.size());
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = std::clamp(reward[p] + b[p], 0.0, 1.0);
  PolyhedralSet set = box_occupancy_polytope(model);
  const Eigen::Index base_rows = set.ineq.rows();
  for (const auto& g : costs) {
    PairVector c(g.size());
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = g[p] - b[p];
    set.add_inequality(lift_to_triples(layout, c), 0.0);
  }
  LpOptions opt;
  opt.feasibility_tol = 1e-9;
  const Eigen::VectorXd objective = lift_to_triples(layout, r);
  OptimisticLpResult out;
  LpResult lp = solve_lp(objective, set, opt);
  if (lp.status == LpStatus::kInfeasible) {
    out.constrained = false;
    set.ineq.conservativeResize(base_rows, Eigen::NoChange);
    set.ineq_rhs.conservativeResize(base_rows);
    lp = solve_lp(objective, set, opt);
  }
  if (lp.status != LpStatus::kOptimal)
    throw SolverError("occupancy LP failed", {}, 0.0, 0.0, 0.0);
  std::vector<double> q = to_std(lp.x);
  for (auto& v : q)
    if (v < 1e-12) v = 0.0;
  out.value = lp.value;
  out.q = OccupancyMeasure(layout, std::move(q));
  out.policy = pair_occupancy_to_policy(layout, out.q.pair_marginals());
  return out;
}

struct OptCmdpConfig {
  double delta = 0.01;
  /// Multiplies bonuses and confidence widths; 0 turns OptCMDP into Greedy.
  double bonus_scale = 1.0;
};

/// OptCMDP; with bonus_scale = 0 this is exactly Greedy.
class OptCmdpLearner : public Learner {
 public:
  OptCmdpLearner(const Layout& layout, std::size_t num_constraints, std::size_t horizon,
                 OptCmdpConfig config = {}, std::string name = "optcmdp")
      : config_(config),
        name_(std::move(name)),
        state_(layout, num_constraints, horizon, config.delta),
        policy_(Policy::uniform(layout)) {}

  std::string name() const override { return name_; }
  Policy act() override { return policy_; }

  void observe(const EpisodeTrace& trace) override {
    state_.update(trace);
    policy_ = step();
  }

  /// Recomputes the policy from the current state.
  Policy step() {
    last_ = solve_optimistic_lp(state_.model(config_.bonus_scale), state_.reward_means(),
                                state_.cost_means(), state_.bonuses(config_.bonus_scale));
    if (!last_.constrained)
      log_event(state_.episodes(), "infeasible_fallback", "optimistic LP empty; constraints dropped");
    return last_.policy;
  }

  BaselineState& state() { return state_; }
  const OptimisticLpResult& last_solution() const { return last_; }

 private:
  OptCmdpConfig config_;
  std::string name_;
  BaselineState state_;
  Policy policy_;
  OptimisticLpResult last_;
};

inline OptCmdpLearner make_greedy(const Layout& layout, std::size_t num_constraints,
                                  std::size_t horizon, double delta = 0.01) {
  return OptCmdpLearner(layout, num_constraints, horizon, {delta, 0.0}, "greedy");
}

struct OptPrimalDualConfig {
  double delta = 0.01;
  double bonus_scale = 1.0;
  /// Safety margin estimate used for lambda_max = L / max(rho, 0.1).
  double rho = 0.0;
  /// Non-positive selects 1/sqrt(T).
  double dual_step = 0.0;
  /// Non-positive selects sqrt(2 ln|A| / T) / L.
  double policy_step = 0.0;
};

class OptPrimalDualLearner : public Learner {
 public:
  OptPrimalDualLearner(const Layout& layout, std::size_t num_constraints, std::size_t horizon,
                       OptPrimalDualConfig config = {})
      : config_(config),
        state_(layout, num_constraints, horizon, config.delta),
        policy_(Policy::uniform(layout)),
        lambda_(num_constraints, 0.0) {
    const double T = static_cast<double>(std::max<std::size_t>(1, horizon));
    const double L = static_cast<double>(layout.num_layers());
    dual_step_ = config.dual_step > 0.0 ? config.dual_step : 1.0 / std::sqrt(T);
    policy_step_ = config.policy_step > 0.0
                       ? config.policy_step
                       : std::sqrt(2.0 * std::log(static_cast<double>(layout.num_actions())) / T) / L;
    if (policy_step_ <= 0.0) policy_step_ = 1.0 / std::sqrt(T);
    lambda_max_ = L / std::max(config.rho, 0.1);
  }

  std::string name() const override { return "optprimaldual"; }
  Policy act() override { return policy_; }

  void observe(const EpisodeTrace& trace) override {
    state_.update(trace);
    step();
  }

  /// One primal and one dual update from the current state.
  void step() {
    const Layout& layout = state_.layout();
    const ConfidenceModel model = state_.model(config_.bonus_scale);
    const PairVector b = state_.bonuses(config_.bonus_scale);
    const PairVector r = state_.reward_means();
    const CostMatrix g = state_.cost_means();

    PairVector lagrangian(r.size());
    for (std::size_t p = 0; p < r.size(); ++p) {
      lagrangian[p] = std::clamp(r[p] + b[p], 0.0, 1.0);
      for (std::size_t i = 0; i < g.size(); ++i) lagrangian[p] -= lambda_[i] * (g[i][p] - b[p]);
    }
    const OptimisticPlan plan = plan_in_box(model, lagrangian, true, &policy_);

    // Dual ascent uses the occupancy of the policy just played.
    const PairVector q = compute_pair_occupancy(model.center(), policy_);
    for (std::size_t i = 0; i < g.size(); ++i)
      lambda_[i] = std::clamp(lambda_[i] + dual_step_ * dot_pairs(g[i], q), 0.0, lambda_max_);

    std::vector<double> probs(policy_.probs().begin(), policy_.probs().end());
    for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < layout.num_actions(); ++a)
        top = std::max(top, plan.q_values[layout.pair_index(x, a)]);
      double z = 0.0;
      for (std::size_t a = 0; a < layout.num_actions(); ++a) {
        const std::size_t p = layout.pair_index(x, a);
        probs[p] *= std::exp(policy_step_ * (plan.q_values[p] - top));
        z += probs[p];
      }
      for (std::size_t a = 0; a < layout.num_actions(); ++a) {
        // Floor keeps every action reachable after long one-sided runs.
        double& v = probs[layout.pair_index(x, a)];
        v = std::max(v / z, 1e-300);
      }
      double s = 0.0;
      for (std::size_t a = 0; a < layout.num_actions(); ++a) s += probs[layout.pair_index(x, a)];
      for (std::size_t a = 0; a < layout.num_actions(); ++a) probs[layout.pair_index(x, a)] /= s;
    }
    policy_ = Policy(layout, std::move(probs));
  }

  BaselineState& state() { return state_; }
  const std::vector<double>& lambda() const { return lambda_; }
  double lambda_max() const { return lambda_max_; }
  double dual_step() const { return dual_step_; }
  double policy_step() const { return policy_step_; }

 private:
  OptPrimalDualConfig config_;
  BaselineState state_;
  Policy policy_;
  std::vector<double> lambda_;
  double dual_step_ = 0.0;
  double policy_step_ = 0.0;
  double lambda_max_ = 0.0;
};

}  // namespace wcops
