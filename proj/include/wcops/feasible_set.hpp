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

// Per-episode decision space: the transition confidence box around the
// empirical model, upper occupancy bounds, optimistic constraint bonuses and
// the shifted constraint vectors that cut the optimistically safe set.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "wcops/cmdp.hpp"
#include "wcops/estimation.hpp"

namespace wcops {

/// eps_t(x, a) = sqrt(2 |X_{k(x)+1}| ln(T |X| |A| / delta) / max(1, N)).
inline double confidence_width(std::uint64_t visits, std::size_t next_layer_size,
                               const ProblemSizes& n, double delta) {
  check_delta(delta);
  const double log_term = std::log(static_cast<double>(n.horizon) *
                                   static_cast<double>(n.num_states) *
                                   static_cast<double>(n.num_actions) / delta);
  return std::sqrt(2.0 * static_cast<double>(next_layer_size) * log_term /
                   static_cast<double>(std::max<std::uint64_t>(1, visits)));
}

/// b_t(x, a) = sqrt(2 ln(2 m |X| |A| T / delta) / max(1, N)).
inline double bonus(std::uint64_t visits, const ProblemSizes& n, double delta) {
  check_delta(delta);
  const double m = static_cast<double>(std::max<std::size_t>(1, n.num_constraints));
  const double log_term = std::log(2.0 * m * static_cast<double>(n.num_states) *
                                   static_cast<double>(n.num_actions) *
                                   static_cast<double>(n.horizon) / delta);
  return std::sqrt(2.0 * log_term / static_cast<double>(std::max<std::uint64_t>(1, visits)));
}

inline PairVector bonus_vector(const CounterState& counters, const ProblemSizes& n,
                               double delta) {
  PairVector b(counters.layout().num_pairs());
  for (std::size_t p = 0; p < b.size(); ++p) b[p] = bonus(counters.visits(p), n, delta);
  return b;
}

/// Empirical rows M / max(1, N); unvisited pairs keep an all-zero row unless
/// `fill_unvisited` asks for a uniform one.
inline TransitionModel empirical_transitions(const CounterState& counters,
                                             bool fill_unvisited = false) {
  const Layout& layout = counters.layout();
  TransitionModel model(layout);
  for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
    const std::size_t x = layout.pair_state(p);
    const std::size_t a = layout.pair_action(p);
    auto row = model.row(p);
    const auto n = counters.visits(p);
    if (n == 0) {
      if (fill_unvisited)
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
      continue;
    }
    const std::size_t first_next = layout.first_state(layout.layer_of(x) + 1);
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = static_cast<double>(counters.transitions(x, a, first_next + j)) /
               static_cast<double>(n);
  }
  return model;
}

/// Box {P : |P(x'|x,a) - center(x'|x,a)| <= eps(x,a)} intersected with the
/// probability simplex, row by row.
class ConfidenceModel {
 public:
  ConfidenceModel() = default;
  ConfidenceModel(TransitionModel center, PairVector widths)
      : center_(std::move(center)), widths_(std::move(widths)) {
    if (widths_.size() != center_.layout().num_pairs())
      throw StructuralError("confidence widths size");
  }

  /// The set P_t after the counters of episode t.
  static ConfidenceModel from_counters(const CounterState& counters, const ProblemSizes& n,
                                       double delta) {
    const Layout& layout = counters.layout();
    PairVector widths(layout.num_pairs());
    for (std::size_t p = 0; p < widths.size(); ++p)
      widths[p] = confidence_width(counters.visits(p),
                                   layout.next_layer_size(layout.pair_state(p)), n, delta);
    return ConfidenceModel(empirical_transitions(counters), std::move(widths));
  }

  const Layout& layout() const { return center_.layout(); }
  const TransitionModel& center() const { return center_; }
  const PairVector& widths() const { return widths_; }
  double width(std::size_t pair) const { return widths_[pair]; }

  /// True if every entry of `p` lies in the box.
  bool contains(const TransitionModel& p) const {
    for (std::size_t pair = 0; pair < widths_.size(); ++pair) {
      const auto c = center_.row(pair);
      const auto r = p.row(pair);
      for (std::size_t j = 0; j < c.size(); ++j)
        if (std::abs(r[j] - c[j]) > widths_[pair]) return false;
    }
    return true;
  }

  /// Largest value of entry j over rows of the box that sum to one:
  /// min(1, c_j + eps, 1 - sum_{k != j} max(0, c_k - eps)).
  double max_entry(std::size_t pair, std::size_t j) const {
    const auto c = center_.row(pair);
    const double eps = widths_[pair];
    double others_low = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (k != j) others_low += std::max(0.0, c[k] - eps);
    return std::max(0.0, std::min({1.0, c[j] + eps, 1.0 - others_low}));
  }

 private:
  TransitionModel center_;
  PairVector widths_;
};

/// Upper bound u_t(x, a) on the probability of visiting (x, a) under any
/// transition model in the box, playing `policy`. Layer-wise relaxation with
/// state masses capped at one.
inline PairVector upper_occupancy(const ConfidenceModel& model, const Policy& policy) {
  const Layout& layout = model.layout();
  PairVector u(layout.num_pairs(), 0.0);
  std::vector<double> state_mass(layout.num_states(), 0.0);
  state_mass[layout.initial_state()] = 1.0;
  for (std::size_t k = 0; k < layout.num_layers(); ++k) {
    const std::size_t first = layout.first_state(k);
    const std::size_t first_next = layout.first_state(k + 1);
    for (std::size_t s = 0; s < layout.layer_size(k); ++s) {
      const std::size_t x = first + s;
      for (std::size_t a = 0; a < layout.num_actions(); ++a) {
        const std::size_t p = layout.pair_index(x, a);
        u[p] = state_mass[x] * policy(x, a);
        if (u[p] == 0.0) continue;
        for (std::size_t j = 0; j < layout.layer_size(k + 1); ++j)
          state_mass[first_next + j] += u[p] * model.max_entry(p, j);
      }
    }
    for (std::size_t j = 0; j < layout.layer_size(k + 1); ++j)
      state_mass[first_next + j] = std::min(1.0, state_mass[first_next + j]);
  }
  return u;
}

/// Best row of the box for the linear objective sum_j values_j p_j
/// (fractional knapsack: fill lower bounds, then the best entries first).
/// Empty if the box holds no probability row.
inline std::optional<double> best_row_in_box(std::span<const double> center, double eps,
                                             std::span<const double> values, bool maximize,
                                             std::vector<double>* row_out = nullptr) {
  const std::size_t n = center.size();
  std::vector<double> row(n);
  double remaining = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = std::max(0.0, center[j] - eps);
    remaining -= row[j];
  }
  if (remaining < -1e-12) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return maximize ? values[a] > values[b] : values[a] < values[b];
  });
  for (std::size_t j : order) {
    if (remaining <= 0.0) break;
    const double room = std::min(1.0, center[j] + eps) - row[j];
    const double add = std::clamp(room, 0.0, remaining);
    row[j] += add;
    remaining -= add;
  }
  if (remaining > 1e-12) return std::nullopt;
  double v = 0.0;
  for (std::size_t j = 0; j < n; ++j) v += values[j] * row[j];
  if (row_out) *row_out = std::move(row);
  return v;
}

/// Extended value iteration over the box: per pair, Q(x,a) = r(x,a) plus the
/// best (or worst) continuation over admissible rows. When `policy` is given
/// states are evaluated under it; otherwise the best action is taken.
struct OptimisticPlan {
  std::vector<double> state_values;
  PairVector q_values;
  std::vector<std::size_t> greedy_actions;
  double value = 0.0;
};

inline OptimisticPlan plan_in_box(const ConfidenceModel& model, const PairVector& reward,
                                  bool maximize, const Policy* policy = nullptr) {
  const Layout& layout = model.layout();
  OptimisticPlan plan;
  plan.state_values.assign(layout.num_states(), 0.0);
  plan.q_values.assign(layout.num_pairs(), 0.0);
  plan.greedy_actions.assign(layout.num_states(), 0);
  const double worst = maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
  for (std::size_t k = layout.num_layers(); k-- > 0;) {
    const std::size_t first_next = layout.first_state(k + 1);
    std::span<const double> next_values(plan.state_values.data() + first_next,
                                        layout.layer_size(k + 1));
    for (std::size_t s = 0; s < layout.layer_size(k); ++s) {
      const std::size_t x = layout.first_state(k) + s;
      double best = worst;
      double expected = 0.0;
      for (std::size_t a = 0; a < layout.num_actions(); ++a) {
        const std::size_t p = layout.pair_index(x, a);
        const auto cont = best_row_in_box(model.center().row(p), model.width(p), next_values,
                                          maximize);
        plan.q_values[p] = reward[p] + cont.value_or(worst);
        if (policy) expected += (*policy)(x, a) * plan.q_values[p];
        if (maximize ? plan.q_values[p] > best : plan.q_values[p] < best) {
          best = plan.q_values[p];
          plan.greedy_actions[x] = a;
        }
      }
      plan.state_values[x] = policy ? expected : best;
    }
  }
  plan.value = plan.state_values[layout.initial_state()];
  return plan;
}

enum class ConstraintMode { kStochastic, kAdversarial };

inline const char* to_string(ConstraintMode mode) {
  return mode == ConstraintMode::kStochastic ? "stochastic" : "adversarial";
}

/// Describes {q in Delta(P_t) : c_i^T q <= 0 for all i} with
/// c_i = g_hat_i - b.
struct FeasibleSetSpec {
  ConfidenceModel model;
  CostMatrix shifted;
  ConstraintMode mode = ConstraintMode::kStochastic;

  /// max_i c_i^T q for a pair-space occupancy (-inf without constraints).
  double max_constraint(const PairVector& pair_occupancy) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : shifted) worst = std::max(worst, dot_pairs(c, pair_occupancy));
    return worst;
  }
};

/// The bonus is subtracted in both modes; `mode` is only a label.
inline FeasibleSetSpec build_feasible_spec(ConfidenceModel model, const CostMatrix& g_hat,
                                           const PairVector& b, ConstraintMode mode) {
  FeasibleSetSpec spec;
  const std::size_t num_pairs = model.layout().num_pairs();
  if (b.size() != num_pairs) throw StructuralError("bonus vector size");
  spec.shifted.reserve(g_hat.size());
  for (const auto& g : g_hat) {
    if (g.size() != num_pairs) throw StructuralError("constraint estimate size");
    PairVector c(num_pairs);
    for (std::size_t p = 0; p < num_pairs; ++p) c[p] = g[p] - b[p];
    spec.shifted.push_back(std::move(c));
  }
  spec.model = std::move(model);
  spec.mode = mode;
  return spec;
}

}  // namespace wcops
