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

// Synthetic environments: random layered instances, Bernoulli reward and
// constraint processes, and OGD adversaries reacting to the played policy.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "wcops/cmdp.hpp"
#include "wcops/random.hpp"

namespace wcops {

enum class ProcessKind { kStochastic, kAdversarial };

inline const char* to_string(ProcessKind k) {
  return k == ProcessKind::kStochastic ? "stochastic" : "adversarial";
}

/// Reward process or one constraint process. For stochastic processes
/// `values` are the means; for adversarial ones the fixed base vector, which
/// is also the adversary's initial parameter.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::kStochastic;
  PairVector values;
  /// OGD step size; non-positive selects 1/sqrt(T).
  double step = 0.0;
};

struct EnvSpec {
  std::vector<std::size_t> layer_sizes;
  std::size_t num_actions = 1;
  std::size_t num_constraints = 0;
  std::uint64_t transition_seed = 0;
  /// Shape of the positive draws normalized into each transition row.
  double concentration = 1.0;
  ProcessSpec reward;
  std::vector<ProcessSpec> constraints;

  Layout layout() const { return Layout(layer_sizes, num_actions); }

  void validate() const {
    const Layout l = layout();
    if (!(concentration > 0.0)) throw ParameterError("concentration must be positive");
    if (reward.values.size() != l.num_pairs()) throw StructuralError("reward vector size");
    for (double v : reward.values)
      if (v < 0.0 || v > 1.0) throw ParameterError("reward parameters must lie in [0,1]");
    if (constraints.size() != num_constraints) throw StructuralError("need one process per constraint");
    for (const auto& c : constraints) {
      if (c.values.size() != l.num_pairs()) throw StructuralError("constraint vector size");
      for (double v : c.values)
        if (v < -1.0 || v > 1.0) throw ParameterError("constraint parameters must lie in [-1,1]");
    }
  }
};

namespace detail {

inline double standard_normal(Rng& rng) {
  // Box-Muller on (0,1] uniforms.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Marsaglia-Tsang gamma sampler with unit scale.
inline double gamma_draw(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = 1.0 - uniform01(rng);
    return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace detail

/// Transition rows from normalized gamma draws (a symmetric Dirichlet).
inline CmdpInstance generate_instance(const EnvSpec& spec, Rng& rng, std::size_t horizon = 1) {
  CmdpInstance inst;
  inst.layout = spec.layout();
  inst.num_constraints = spec.num_constraints;
  inst.horizon = horizon;
  inst.transitions = TransitionModel(inst.layout);
  for (std::size_t p = 0; p < inst.layout.num_pairs(); ++p) {
    auto row = inst.transitions.row(p);
    double sum = 0.0;
    for (auto& v : row) {
      v = detail::gamma_draw(spec.concentration, rng);
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
  return inst;
}

inline CmdpInstance generate_instance(const EnvSpec& spec, std::size_t horizon = 1) {
  Rng rng(spec.transition_seed);
  return generate_instance(spec, rng, horizon);
}

/// reward ~ Bernoulli(r_bar); cost_i = 2 Bernoulli((g_bar_i + 1)/2) - 1.
inline std::pair<PairVector, CostMatrix> emit_stochastic(const PairVector& reward_means,
                                                         const CostMatrix& cost_means, Rng& rng) {
  PairVector r(reward_means.size());
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = bernoulli(reward_means[p], rng) ? 1.0 : 0.0;
  CostMatrix g(cost_means.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i].resize(cost_means[i].size());
    for (std::size_t p = 0; p < g[i].size(); ++p)
      g[i][p] = bernoulli((cost_means[i][p] + 1.0) / 2.0, rng) ? 1.0 : -1.0;
  }
  return {std::move(r), std::move(g)};
}

struct AdversaryState {
  PairVector params;
  double step = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

/// One OGD step with gradient -pi(a|x) * base(x, a), projected on the legal
/// range. Returns the emitted (updated) parameter vector.
inline const PairVector& emit_adversarial(AdversaryState& adv, const Policy& last_policy,
                                          const PairVector& base) {
  for (std::size_t p = 0; p < adv.params.size(); ++p) {
    const double gradient = -last_policy.probs()[p] * base[p];
    adv.params[p] = std::clamp(adv.params[p] - adv.step * gradient, adv.lower, adv.upper);
  }
  return adv.params;
}

/// Runtime environment of one run: owns the instance, adversary states and
/// emits (r_t, G_t) before each episode.
class Environment {
 public:
  struct Emission {
    PairVector rewards;
    CostMatrix costs;
  };

  Environment(EnvSpec spec, std::size_t horizon)
      : spec_(std::move(spec)), instance_(generate_instance(spec_, horizon)) {
    spec_.validate();
    const double default_step = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, horizon)));
    auto make = [&](const ProcessSpec& ps, double lo, double hi) {
      AdversaryState a;
      a.params = ps.values;
      a.step = ps.step > 0.0 ? ps.step : default_step;
      a.lower = lo;
      a.upper = hi;
      return a;
    };
    reward_adv_ = make(spec_.reward, 0.0, 1.0);
    for (const auto& c : spec_.constraints) cost_adv_.push_back(make(c, -1.0, 1.0));
  }

  const CmdpInstance& instance() const { return instance_; }
  const EnvSpec& spec() const { return spec_; }

  bool constraints_stochastic() const {
    for (const auto& c : spec_.constraints)
      if (c.kind != ProcessKind::kStochastic) return false;
    return true;
  }
  bool rewards_stochastic() const { return spec_.reward.kind == ProcessKind::kStochastic; }

  /// True means of the constraint processes when all are stochastic.
  std::optional<CostMatrix> cost_means() const {
    if (!constraints_stochastic()) return std::nullopt;
    CostMatrix g;
    for (const auto& c : spec_.constraints) g.push_back(c.values);
    return g;
  }

  /// (r_t, G_t). Draws the full vectors so the stream does not depend on the
  /// learner's actions.
  Emission emit(Rng& rng) const {
    Emission e;
    const std::size_t np = instance_.layout.num_pairs();
    e.rewards.resize(np);
    if (spec_.reward.kind == ProcessKind::kStochastic) {
      for (std::size_t p = 0; p < np; ++p)
        e.rewards[p] = bernoulli(spec_.reward.values[p], rng) ? 1.0 : 0.0;
    } else {
      e.rewards = reward_adv_.params;
    }
    e.costs.resize(spec_.constraints.size());
    for (std::size_t i = 0; i < spec_.constraints.size(); ++i) {
      const auto& c = spec_.constraints[i];
      if (c.kind == ProcessKind::kStochastic) {
        e.costs[i].resize(np);
        for (std::size_t p = 0; p < np; ++p)
          e.costs[i][p] = bernoulli((c.values[p] + 1.0) / 2.0, rng) ? 1.0 : -1.0;
      } else {
        e.costs[i] = cost_adv_[i].params;
      }
    }
    return e;
  }

  /// Feeds the policy played in the finished episode to the adversaries.
  void notify_policy(const Policy& played) {
    if (spec_.reward.kind == ProcessKind::kAdversarial)
      emit_adversarial(reward_adv_, played, spec_.reward.values);
    for (std::size_t i = 0; i < spec_.constraints.size(); ++i)
      if (spec_.constraints[i].kind == ProcessKind::kAdversarial)
        emit_adversarial(cost_adv_[i], played, spec_.constraints[i].values);
  }

 private:
  EnvSpec spec_;
  CmdpInstance instance_;
  AdversaryState reward_adv_;
  std::vector<AdversaryState> cost_adv_;
};

}  // namespace wcops
