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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcops/cmdp.hpp"

namespace wcops {

/// Sizes entering the confidence and threshold formulas. num_states counts
/// every state, x0 and xL included.
struct ProblemSizes {
  std::size_t num_layers = 1;       // L
  std::size_t num_states = 2;       // |X|
  std::size_t num_actions = 1;      // |A|
  std::size_t num_constraints = 1;  // m
  std::size_t horizon = 1;          // T

  static ProblemSizes of(const Layout& layout, std::size_t m, std::size_t horizon) {
    return {layout.num_layers(), layout.num_states(), layout.num_actions(), m, horizon};
  }
};

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
}

/// Visit counters N_t(x, a) and transition counters M_t(x'|x, a).
class CounterState {
 public:
  CounterState() = default;
  explicit CounterState(const Layout& layout)
      : layout_(layout),
        visits_(layout.num_pairs(), 0),
        transitions_(layout.num_triples(), 0) {}

  void update(const EpisodeTrace& trace) {
    for (const auto& s : trace.steps) {
      ++visits_[layout_.pair_index(s.state, s.action)];
      ++transitions_[layout_.triple_index(s.state, s.action, s.next_state)];
    }
    ++episodes_;
  }

  const Layout& layout() const { return layout_; }
  std::uint64_t visits(std::size_t pair) const { return visits_[pair]; }
  std::uint64_t visits(std::size_t x, std::size_t a) const {
    return visits_[layout_.pair_index(x, a)];
  }
  std::uint64_t transitions(std::size_t x, std::size_t a, std::size_t next) const {
    return transitions_[layout_.triple_index(x, a, next)];
  }
  std::uint64_t transitions_at(std::size_t triple) const { return transitions_[triple]; }
  /// Number of episodes folded in so far (t).
  std::uint64_t episodes() const { return episodes_; }

 private:
  Layout layout_;
  std::vector<std::uint64_t> visits_;
  std::vector<std::uint64_t> transitions_;
  std::uint64_t episodes_ = 0;
};

/// C_t = 21 L |X| sqrt(2 t |A| ln(2 m T^2 |X| |A| / delta)).
inline double constraint_threshold(std::uint64_t t, const ProblemSizes& n, double delta) {
  check_delta(delta);
  if (t < 1) throw ParameterError("episode index must be at least 1");
  if (n.num_constraints < 1) throw ParameterError("threshold needs m >= 1");
  const double X = static_cast<double>(n.num_states);
  const double A = static_cast<double>(n.num_actions);
  const double T = static_cast<double>(n.horizon);
  const double m = static_cast<double>(n.num_constraints);
  const double log_term = std::log(2.0 * m * T * T * X * A / delta);
  return 21.0 * static_cast<double>(n.num_layers) * X *
         std::sqrt(2.0 * static_cast<double>(t) * A * log_term);
}

/// One step of the weighted estimator: (1 - beta) prev + beta g.
inline double weighted_step(double previous, double beta, double observed) {
  return (1.0 - beta) * previous + beta * observed;
}

/// Weighted adaptive estimates g_hat_{t,i}(x, a) with learning rates
/// beta = (1 + Gamma_{t,i}) / N_t(x, a), where
/// Gamma_{t,i} = clamp(sum of observed costs - C_t, 0, C_t).
/// With Gamma = 0 at every visit this is the running empirical mean.
class ConstraintEstimator {
 public:
  ConstraintEstimator() = default;
  ConstraintEstimator(const Layout& layout, const ProblemSizes& sizes, double delta)
      : layout_(layout),
        sizes_(sizes),
        delta_(delta),
        estimates_(sizes.num_constraints, PairVector(layout.num_pairs(), 0.0)),
        cum_cost_(sizes.num_constraints, 0.0),
        gamma_(sizes.num_constraints, 0.0) {
    check_delta(delta);
  }

  /// Folds in episode t. `counters` must already include the episode.
  void update(const EpisodeTrace& trace, const CounterState& counters) {
    const std::size_t m = estimates_.size();
    if (m == 0) return;
    const std::uint64_t t = counters.episodes();
    threshold_ = constraint_threshold(t, sizes_, delta_);
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& s : trace.steps) cum_cost_[i] += s.costs[i];
      gamma_[i] = std::clamp(cum_cost_[i] - threshold_, 0.0, threshold_);
      if (gamma_[i] > 0.0) gamma_activated_ = true;
    }
    for (const auto& s : trace.steps) {
      const std::size_t p = layout_.pair_index(s.state, s.action);
      const double n = static_cast<double>(counters.visits(p));
      for (std::size_t i = 0; i < m; ++i) {
        const double beta = (1.0 + gamma_[i]) / n;
        if (counters.visits(p) == 1 && gamma_[i] > 0.0) ++first_visits_with_gamma_;
        estimates_[i][p] = weighted_step(estimates_[i][p], beta, s.costs[i]);
      }
    }
  }

  double estimate(std::size_t i, std::size_t pair) const { return estimates_[i][pair]; }
  const CostMatrix& estimates() const { return estimates_; }
  double gamma(std::size_t i) const { return gamma_[i]; }
  double cum_cost(std::size_t i) const { return cum_cost_[i]; }
  /// C_t of the last update (0 before any update).
  double threshold() const { return threshold_; }
  bool gamma_activated() const { return gamma_activated_; }
  /// First visits of a pair that happened while some Gamma was positive;
  /// there the initial value keeps weight 1 - beta < 0.
  std::size_t first_visits_with_positive_gamma() const { return first_visits_with_gamma_; }

  nlohmann::json snapshot() const {
    nlohmann::json j;
    auto g = nlohmann::json::object();
    for (std::size_t p = 0; p < layout_.num_pairs(); ++p)
      for (std::size_t i = 0; i < estimates_.size(); ++i)
        g[std::to_string(layout_.pair_state(p)) + "," + std::to_string(layout_.pair_action(p)) +
          "," + std::to_string(i)] = estimates_[i][p];
    j["g_hat"] = g;
    j["gamma"] = gamma_;
    j["cum_cost"] = cum_cost_;
    return j;
  }

 private:
  Layout layout_;
  ProblemSizes sizes_;
  double delta_ = 0.5;
  CostMatrix estimates_;
  std::vector<double> cum_cost_;
  std::vector<double> gamma_;
  double threshold_ = 0.0;
  bool gamma_activated_ = false;
  std::size_t first_visits_with_gamma_ = 0;
};

/// Implicit-exploration loss estimate: (1 - r_t(x,a)) / (u_t(x,a) + gamma)
/// on visited pairs, zero elsewhere.
inline PairVector estimate_loss(const Layout& layout, const EpisodeTrace& trace,
                                const PairVector& upper_occupancy, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("implicit exploration gamma must be positive");
  if (upper_occupancy.size() != layout.num_pairs())
    throw StructuralError("upper occupancy size");
  PairVector loss(layout.num_pairs(), 0.0);
  for (const auto& s : trace.steps) {
    const std::size_t p = layout.pair_index(s.state, s.action);
    loss[p] = (1.0 - s.reward) / (upper_occupancy[p] + gamma);
  }
  return loss;
}

}  // namespace wcops
