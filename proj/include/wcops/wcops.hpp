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

// Weighted Constrained Optimistic Policy Search.
//
// Each episode plays the policy of the current occupancy iterate, builds an
// implicit-exploration loss estimate from an upper occupancy bound, updates
// the weighted constraint estimates, and takes one KL mirror-descent step
// over the occupancy measures that are optimistically safe under the
// refreshed confidence set.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "wcops/estimation.hpp"
#include "wcops/feasible_set.hpp"
#include "wcops/learner.hpp"
#include "wcops/omd_solver.hpp"

namespace wcops {

struct WcopsConfig {
  double delta = 0.01;
  /// Overrides for eta and gamma; by default both equal
  /// sqrt(L ln(L|X||A|/delta) / (T |X| |A|)).
  std::optional<double> eta;
  std::optional<double> gamma;
  ConstraintMode mode = ConstraintMode::kStochastic;
  OmdOptions solver;
};

inline double default_step_size(const ProblemSizes& n, double delta) {
  check_delta(delta);
  const double L = static_cast<double>(n.num_layers);
  const double XA = static_cast<double>(n.num_states) * static_cast<double>(n.num_actions);
  return std::sqrt(L * std::log(L * XA / delta) / (static_cast<double>(n.horizon) * XA));
}

/// Per-episode diagnostics of the last observe() call.
struct WcopsStepInfo {
  PairVector upper_occupancy;   // u_t, from the confidence set before episode t
  PairVector loss_estimate;     // loss-hat_t
  bool fallback = false;        // constraint set was empty; projected on Delta(P_t)
  OmdResult solve;
};

class WcopsLearner : public Learner {
 public:
  WcopsLearner(const Layout& layout, std::size_t num_constraints, std::size_t horizon,
               WcopsConfig config = {})
      : layout_(layout),
        sizes_(ProblemSizes::of(layout, num_constraints, horizon)),
        config_(std::move(config)),
        q_hat_(OccupancyMeasure::uniform(layout)),
        counters_(layout),
        estimator_(layout, sizes_, config_.delta),
        model_(ConfidenceModel::from_counters(counters_, sizes_, config_.delta)) {
    const double step = default_step_size(sizes_, config_.delta);
    eta_ = config_.eta.value_or(step);
    gamma_ = config_.gamma.value_or(step);
    if (!(eta_ > 0.0) || !(gamma_ > 0.0)) throw ParameterError("eta and gamma must be positive");
    policy_ = occupancy_to_policy(q_hat_);
  }

  std::string name() const override { return "wcops"; }

  Policy act() override { return policy_; }

  void observe(const EpisodeTrace& trace) override {
    const std::size_t t = counters_.episodes() + 1;
    WcopsStepInfo info;
    // u_t and the loss estimate use the confidence set built before episode t.
    info.upper_occupancy = upper_occupancy(model_, policy_);
    info.loss_estimate = estimate_loss(layout_, trace, info.upper_occupancy, gamma_);

    counters_.update(trace);
    const bool was_active = estimator_.gamma_activated();
    const std::size_t early_before = estimator_.first_visits_with_positive_gamma();
    estimator_.update(trace, counters_);
    if (!was_active && estimator_.gamma_activated())
      log_event(t, "gamma_activated", "adaptive learning rate engaged");
    if (estimator_.first_visits_with_positive_gamma() > early_before)
      log_event(t, "first_visit_with_gamma", "first visit of a pair while Gamma > 0");

    model_ = ConfidenceModel::from_counters(counters_, sizes_, config_.delta);
    bonuses_ = bonus_vector(counters_, sizes_, config_.delta);
    spec_ = build_feasible_spec(model_, estimator_.estimates(), bonuses_, config_.mode);

    OmdProblem problem;
    problem.loss = info.loss_estimate;
    problem.anchor = q_hat_;
    problem.feasible = &spec_;
    problem.eta = eta_;
    problem.options = config_.solver;
    info.solve = solve_guarded(problem, t);
    if (info.solve.status == OmdStatus::kInfeasible) {
      info.fallback = true;
      log_event(t, "infeasible_fallback", "optimistic safe set empty; constraints dropped");
      problem.enforce_constraints = false;
      info.solve = solve_guarded(problem, t);
    }
    q_hat_ = info.solve.q;
    policy_ = occupancy_to_policy(q_hat_, 1e-7);
    last_ = std::move(info);
  }

  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  double delta() const { return config_.delta; }
  const ProblemSizes& sizes() const { return sizes_; }
  const OccupancyMeasure& occupancy() const { return q_hat_; }
  const CounterState& counters() const { return counters_; }
  const ConstraintEstimator& estimator() const { return estimator_; }
  /// Confidence set after the latest episode (P_t).
  const ConfidenceModel& confidence() const { return model_; }
  const PairVector& bonuses() const { return bonuses_; }
  const FeasibleSetSpec& feasible_set() const { return spec_; }
  const WcopsStepInfo& last_step() const { return last_; }

 private:
  /// Non-convergence with a primal-feasible best iterate is tolerated and
  /// logged; anything else propagates.
  OmdResult solve_guarded(const OmdProblem& problem, std::size_t t) {
    try {
      return solve_omd_step(problem);
    } catch (const SolverError& e) {
      if (e.primal_residual() > 1e-7 || e.best_iterate().empty()) throw;
      log_event(t, "solver_tolerance", e.what());
      OmdResult r;
      r.status = OmdStatus::kSolved;
      std::vector<double> q = e.best_iterate();
      for (auto& v : q) v = std::max(v, 0.0);
      r.q = OccupancyMeasure(layout_, std::move(q));
      r.primal_residual = e.primal_residual();
      r.dual_residual = e.dual_residual();
      r.gap = e.gap();
      r.max_constraint = spec_.max_constraint(r.q.pair_marginals());
      return r;
    }
  }

  Layout layout_;
  ProblemSizes sizes_;
  WcopsConfig config_;
  double eta_ = 0.0;
  double gamma_ = 0.0;
  OccupancyMeasure q_hat_;
  Policy policy_;
  CounterState counters_;
  ConstraintEstimator estimator_;
  ConfidenceModel model_;
  PairVector bonuses_;
  FeasibleSetSpec spec_;
  WcopsStepInfo last_;
};

}  // namespace wcops
