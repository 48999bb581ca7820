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

// Loop-free layered CMDP model: layer layout, transition models, policies,
// occupancy measures and episode simulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "wcops/errors.hpp"
#include "wcops/random.hpp"

namespace wcops {

/// Values indexed by state-action pair, see Layout::pair_index.
using PairVector = std::vector<double>;
/// Constraint costs, one PairVector per constraint.
using CostMatrix = std::vector<PairVector>;

/// Layer structure of a loop-free MDP. States are numbered consecutively in
/// layer order, so x0 = 0 and xL = num_states() - 1. Every non-terminal state
/// has the same action set {0, ..., num_actions() - 1}.
class Layout {
 public:
  Layout() = default;

  Layout(std::vector<std::size_t> layer_sizes, std::size_t num_actions)
      : sizes_(std::move(layer_sizes)), num_actions_(num_actions) {
    if (sizes_.size() < 2)
      throw StructuralError("layout needs at least two layers");
    if (sizes_.front() != 1 || sizes_.back() != 1)
      throw StructuralError("first and last layers must be singletons");
    if (num_actions_ == 0) throw StructuralError("layout needs at least one action");
    for (auto s : sizes_)
      if (s == 0) throw StructuralError("empty layer");

    first_.resize(sizes_.size());
    std::size_t acc = 0;
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      first_[k] = acc;
      acc += sizes_[k];
    }
    num_states_ = acc;
    layer_of_.resize(num_states_);
    for (std::size_t k = 0; k < sizes_.size(); ++k)
      for (std::size_t j = 0; j < sizes_[k]; ++j) layer_of_[first_[k] + j] = k;

    triple_offset_.resize(sizes_.size());
    acc = 0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      triple_offset_[k] = acc;
      acc += sizes_[k] * num_actions_ * sizes_[k + 1];
    }
    triple_offset_.back() = acc;
    num_triples_ = acc;
  }

  /// Number of transitions per episode (L).
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t layer_size(std::size_t k) const { return sizes_[k]; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t first_state(std::size_t k) const { return first_[k]; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t layer_of(std::size_t x) const { return layer_of_[x]; }
  std::size_t initial_state() const { return 0; }
  std::size_t terminal_state() const { return num_states_ - 1; }
  bool is_terminal(std::size_t x) const { return x + 1 == num_states_; }

  /// Size of the layer that follows state x.
  std::size_t next_layer_size(std::size_t x) const {
    return sizes_[layer_of_[x] + 1];
  }

  std::size_t num_pairs() const { return (num_states_ - 1) * num_actions_; }
  std::size_t pair_index(std::size_t x, std::size_t a) const {
    return x * num_actions_ + a;
  }
  std::size_t pair_state(std::size_t p) const { return p / num_actions_; }
  std::size_t pair_action(std::size_t p) const { return p % num_actions_; }

  std::size_t num_triples() const { return num_triples_; }
  /// Index of (x, a, x') where x' is given by its global state id.
  std::size_t triple_index(std::size_t x, std::size_t a, std::size_t next) const {
    const std::size_t k = layer_of_[x];
    return triple_offset_[k] +
           ((x - first_[k]) * num_actions_ + a) * sizes_[k + 1] +
           (next - first_[k + 1]);
  }
  /// First triple index of pair (x, a); its successors follow contiguously.
  std::size_t triple_begin(std::size_t x, std::size_t a) const {
    return triple_index(x, a, first_[layer_of_[x] + 1]);
  }

  bool operator==(const Layout& other) const {
    return sizes_ == other.sizes_ && num_actions_ == other.num_actions_;
  }

 private:
  std::vector<std::size_t> sizes_;
  std::size_t num_actions_ = 0;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> layer_of_;
  std::vector<std::size_t> triple_offset_;
  std::size_t num_states_ = 0;
  std::size_t num_triples_ = 0;
};

/// Dense transition rows P(.|x,a) over the layer following x.
class TransitionModel {
 public:
  TransitionModel() = default;

  /// All-zero rows.
  explicit TransitionModel(const Layout& layout) : layout_(layout) {
    rows_.resize(layout.num_pairs());
    for (std::size_t p = 0; p < rows_.size(); ++p)
      rows_[p].assign(layout.next_layer_size(layout.pair_state(p)), 0.0);
  }

  static TransitionModel uniform(const Layout& layout) {
    TransitionModel model(layout);
    for (auto& row : model.rows_)
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    return model;
  }

  const Layout& layout() const { return layout_; }
  std::span<const double> row(std::size_t pair) const { return rows_[pair]; }
  std::span<double> row(std::size_t pair) { return rows_[pair]; }

  /// P(next | x, a) with next given as global state id.
  double operator()(std::size_t x, std::size_t a, std::size_t next) const {
    const std::size_t first_next = layout_.first_state(layout_.layer_of(x) + 1);
    return rows_[layout_.pair_index(x, a)][next - first_next];
  }

  /// Throws StructuralError if a row is negative or does not sum to one.
  void validate(double tol = 1e-12) const {
    for (std::size_t p = 0; p < rows_.size(); ++p) {
      double sum = 0.0;
      for (double v : rows_[p]) {
        if (!(v >= 0.0)) {
          throw StructuralError("negative transition probability at pair " +
                                std::to_string(p));
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) {
        std::ostringstream msg;
        msg << "transition row of pair " << p << " sums to " << sum;
        throw StructuralError(msg.str());
      }
    }
  }

 private:
  Layout layout_;
  std::vector<std::vector<double>> rows_;
};

struct CmdpInstance {
  Layout layout;
  TransitionModel transitions;
  std::size_t num_constraints = 0;  // m
  std::size_t horizon = 1;          // T

  void validate(double tol = 1e-12) const {
    if (!(transitions.layout() == layout))
      throw StructuralError("transition model does not match the layout");
    transitions.validate(tol);
  }
};

/// Stochastic policy, one distribution over actions per non-terminal state.
class Policy {
 public:
  Policy() = default;
  Policy(const Layout& layout, std::vector<double> probs)
      : layout_(layout), probs_(std::move(probs)) {
    if (probs_.size() != layout_.num_pairs())
      throw StructuralError("policy size does not match the layout");
  }

  static Policy uniform(const Layout& layout) {
    return Policy(layout, std::vector<double>(layout.num_pairs(),
                                              1.0 / static_cast<double>(layout.num_actions())));
  }

  /// Deterministic policy from one action per non-terminal state.
  static Policy deterministic(const Layout& layout, std::span<const std::size_t> actions) {
    std::vector<double> probs(layout.num_pairs(), 0.0);
    for (std::size_t x = 0; x + 1 < layout.num_states(); ++x)
      probs[layout.pair_index(x, actions[x])] = 1.0;
    return Policy(layout, std::move(probs));
  }

  const Layout& layout() const { return layout_; }
  double operator()(std::size_t x, std::size_t a) const {
    return probs_[layout_.pair_index(x, a)];
  }
  std::span<const double> row(std::size_t x) const {
    return std::span<const double>(probs_).subspan(x * layout_.num_actions(),
                                                   layout_.num_actions());
  }
  const std::vector<double>& probs() const { return probs_; }

  void validate(double tol = 1e-12) const {
    for (std::size_t x = 0; x + 1 < layout_.num_states(); ++x) {
      double sum = 0.0;
      for (double v : row(x)) {
        if (!(v >= 0.0)) throw ValidationError("negative action probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol)
        throw ValidationError("policy row of state " + std::to_string(x) +
                              " does not sum to one");
    }
  }

  bool operator==(const Policy& other) const {
    return layout_ == other.layout_ && probs_ == other.probs_;
  }

 private:
  Layout layout_;
  std::vector<double> probs_;
};

/// q(x, a, x') over consecutive-layer triples.
class OccupancyMeasure {
 public:
  OccupancyMeasure() = default;
  explicit OccupancyMeasure(const Layout& layout)
      : layout_(layout), values_(layout.num_triples(), 0.0) {}
  OccupancyMeasure(const Layout& layout, std::vector<double> values)
      : layout_(layout), values_(std::move(values)) {
    if (values_.size() != layout_.num_triples())
      throw StructuralError("occupancy size does not match the layout");
  }

  /// Uniform over X_k x A x X_{k+1} within each layer.
  static OccupancyMeasure uniform(const Layout& layout) {
    OccupancyMeasure q(layout);
    for (std::size_t k = 0; k < layout.num_layers(); ++k) {
      const double v = 1.0 / static_cast<double>(layout.layer_size(k) *
                                                 layout.num_actions() *
                                                 layout.layer_size(k + 1));
      for (std::size_t j = 0; j < layout.layer_size(k); ++j) {
        const std::size_t x = layout.first_state(k) + j;
        for (std::size_t a = 0; a < layout.num_actions(); ++a) {
          const std::size_t b = layout.triple_begin(x, a);
          std::fill_n(q.values_.begin() + static_cast<std::ptrdiff_t>(b),
                      layout.layer_size(k + 1), v);
        }
      }
    }
    return q;
  }

  const Layout& layout() const { return layout_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double operator()(std::size_t x, std::size_t a, std::size_t next) const {
    return values_[layout_.triple_index(x, a, next)];
  }

  /// q(x, a) = sum over successors.
  double pair_mass(std::size_t x, std::size_t a) const {
    const std::size_t b = layout_.triple_begin(x, a);
    double s = 0.0;
    for (std::size_t j = 0; j < layout_.next_layer_size(x); ++j) s += values_[b + j];
    return s;
  }

  /// q(x); for the terminal state this is the incoming mass.
  double state_mass(std::size_t x) const {
    if (layout_.is_terminal(x)) return inflow(x);
    double s = 0.0;
    for (std::size_t a = 0; a < layout_.num_actions(); ++a) s += pair_mass(x, a);
    return s;
  }

  /// Mass entering x from the previous layer.
  double inflow(std::size_t x) const {
    const std::size_t k = layout_.layer_of(x);
    if (k == 0) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < layout_.layer_size(k - 1); ++j) {
      const std::size_t prev = layout_.first_state(k - 1) + j;
      for (std::size_t a = 0; a < layout_.num_actions(); ++a) s += (*this)(prev, a, x);
    }
    return s;
  }

  PairVector pair_marginals() const {
    PairVector out(layout_.num_pairs(), 0.0);
    for (std::size_t p = 0; p < out.size(); ++p)
      out[p] = pair_mass(layout_.pair_state(p), layout_.pair_action(p));
    return out;
  }

 private:
  Layout layout_;
  std::vector<double> values_;
};

/// Sum over pairs of v(x, a) q(x, a).
inline double dot_pairs(const PairVector& v, const PairVector& q) {
  double s = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) s += v[p] * q[p];
  return s;
}

/// Forward recursion from x0 with unit mass.
inline OccupancyMeasure compute_occupancy(const TransitionModel& transitions,
                                          const Policy& policy) {
  const Layout& layout = transitions.layout();
  if (!(policy.layout() == layout))
    throw StructuralError("policy and transition model have different layouts");
  OccupancyMeasure q(layout);
  std::vector<double> mass(layout.num_states(), 0.0);
  mass[layout.initial_state()] = 1.0;
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    if (mass[x] == 0.0) continue;
    const std::size_t first_next = layout.first_state(layout.layer_of(x) + 1);
    for (std::size_t a = 0; a < layout.num_actions(); ++a) {
      const double qa = mass[x] * policy(x, a);
      if (qa == 0.0) continue;
      const auto row = transitions.row(layout.pair_index(x, a));
      const std::size_t b = layout.triple_begin(x, a);
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double v = qa * row[j];
        q.values()[b + j] = v;
        mass[first_next + j] += v;
      }
    }
  }
  return q;
}

/// Pair occupancy q(x, a) of a policy, without materializing triples.
inline PairVector compute_pair_occupancy(const TransitionModel& transitions,
                                         const Policy& policy) {
  const Layout& layout = transitions.layout();
  PairVector out(layout.num_pairs(), 0.0);
  std::vector<double> mass(layout.num_states(), 0.0);
  mass[0] = 1.0;
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    const std::size_t first_next = layout.first_state(layout.layer_of(x) + 1);
    for (std::size_t a = 0; a < layout.num_actions(); ++a) {
      const std::size_t p = layout.pair_index(x, a);
      out[p] = mass[x] * policy(x, a);
      const auto row = transitions.row(p);
      for (std::size_t j = 0; j < row.size(); ++j) mass[first_next + j] += out[p] * row[j];
    }
  }
  return out;
}

enum class OccupancyCondition { kNonNegative, kLayerMass, kFlowConservation };

struct OccupancyViolation {
  OccupancyCondition condition;
  std::size_t layer = 0;
  std::size_t state = 0;  // meaningful for flow conservation
  double residual = 0.0;
};

inline std::vector<OccupancyViolation> validate_occupancy(const OccupancyMeasure& q,
                                                          double tol = 1e-9) {
  const Layout& layout = q.layout();
  std::vector<OccupancyViolation> out;
  for (std::size_t i = 0; i < q.values().size(); ++i) {
    if (q.values()[i] < -tol) {
      out.push_back({OccupancyCondition::kNonNegative, 0, i, q.values()[i]});
      break;
    }
  }
  for (std::size_t k = 0; k < layout.num_layers(); ++k) {
    double mass = 0.0;
    for (std::size_t j = 0; j < layout.layer_size(k); ++j)
      mass += q.state_mass(layout.first_state(k) + j);
    if (std::abs(mass - 1.0) > tol)
      out.push_back({OccupancyCondition::kLayerMass, k, 0, mass - 1.0});
  }
  for (std::size_t k = 1; k < layout.num_layers(); ++k) {
    for (std::size_t j = 0; j < layout.layer_size(k); ++j) {
      const std::size_t x = layout.first_state(k) + j;
      const double residual = q.state_mass(x) - q.inflow(x);
      if (std::abs(residual) > tol)
        out.push_back({OccupancyCondition::kFlowConservation, k, x, residual});
    }
  }
  return out;
}

/// pi(a|x) = q(x,a) / q(x); uniform rows where q(x) = 0.
inline Policy occupancy_to_policy(const OccupancyMeasure& q, double tol = 1e-9) {
  if (!validate_occupancy(q, tol).empty())
    throw ValidationError("occupancy measure violates validity conditions");
  const Layout& layout = q.layout();
  const std::size_t num_actions = layout.num_actions();
  std::vector<double> probs(layout.num_pairs(), 0.0);
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    double total = 0.0;
    for (std::size_t a = 0; a < num_actions; ++a) {
      const double v = std::max(0.0, q.pair_mass(x, a));
      probs[layout.pair_index(x, a)] = v;
      total += v;
    }
    for (std::size_t a = 0; a < num_actions; ++a) {
      double& p = probs[layout.pair_index(x, a)];
      p = total > 0.0 ? p / total : 1.0 / static_cast<double>(num_actions);
    }
  }
  return Policy(layout, std::move(probs));
}

/// Policy from a pair-space occupancy (rows renormalized, uniform where empty).
inline Policy pair_occupancy_to_policy(const Layout& layout, const PairVector& q) {
  const std::size_t num_actions = layout.num_actions();
  std::vector<double> probs(layout.num_pairs(), 0.0);
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    double total = 0.0;
    for (std::size_t a = 0; a < num_actions; ++a)
      total += std::max(0.0, q[layout.pair_index(x, a)]);
    for (std::size_t a = 0; a < num_actions; ++a) {
      const std::size_t p = layout.pair_index(x, a);
      probs[p] = total > 0.0 ? std::max(0.0, q[p]) / total
                             : 1.0 / static_cast<double>(num_actions);
    }
  }
  return Policy(layout, std::move(probs));
}

struct EpisodeStep {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
  double reward = 0.0;
  std::vector<double> costs;  // g_{t,i}(x, a) for every constraint i
};

/// Bandit feedback of one episode: exactly L steps through consecutive layers.
struct EpisodeTrace {
  std::vector<EpisodeStep> steps;

  bool visited(std::size_t x, std::size_t a) const {
    return std::any_of(steps.begin(), steps.end(), [&](const EpisodeStep& s) {
      return s.state == x && s.action == a;
    });
  }
};

inline EpisodeTrace simulate_episode(const CmdpInstance& instance, const Policy& policy,
                                     const PairVector& rewards, const CostMatrix& costs,
                                     Rng& rng) {
  const Layout& layout = instance.layout;
  if (!(policy.layout() == layout)) throw StructuralError("policy layout mismatch");
  if (rewards.size() != layout.num_pairs()) throw StructuralError("reward vector size");
  if (costs.size() != instance.num_constraints) throw StructuralError("cost matrix size");
  for (const auto& c : costs)
    if (c.size() != layout.num_pairs()) throw StructuralError("cost vector size");

  EpisodeTrace trace;
  trace.steps.reserve(layout.num_layers());
  std::size_t x = layout.initial_state();
  for (std::size_t k = 0; k < layout.num_layers(); ++k) {
    const std::size_t a = sample_discrete(policy.row(x), rng);
    const std::size_t p = layout.pair_index(x, a);
    const std::size_t j = sample_discrete(instance.transitions.row(p), rng);
    EpisodeStep step;
    step.state = x;
    step.action = a;
    step.next_state = layout.first_state(k + 1) + j;
    step.reward = rewards[p];
    step.costs.resize(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i) step.costs[i] = costs[i][p];
    trace.steps.push_back(std::move(step));
    x = trace.steps.back().next_state;
  }
  return trace;
}

}  // namespace wcops
