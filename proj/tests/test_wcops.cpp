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

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "wcops/wcops.hpp"

namespace wcops {
namespace {

CmdpInstance random_instance(const Layout& l, std::size_t m, Rng& rng) {
  CmdpInstance inst;
  inst.layout = l;
  inst.transitions = testing::random_transitions(l, rng);
  inst.num_constraints = m;
  return inst;
}

TEST(Wcops, DefaultStepSize) {
  Layout l({1, 2, 3, 1}, 2);  // L = 3, |X| = 7
  WcopsLearner w(l, 1, 1000, {0.05});
  const double want = std::sqrt(3.0 * std::log(3.0 * 14.0 / 0.05) / (1000.0 * 14.0));
  EXPECT_DOUBLE_EQ(w.eta(), want);
  EXPECT_DOUBLE_EQ(w.gamma(), want);
  WcopsConfig c;
  c.eta = 0.3;
  c.gamma = 0.01;
  WcopsLearner o(l, 1, 1000, c);
  EXPECT_EQ(o.eta(), 0.3);
  EXPECT_EQ(o.gamma(), 0.01);
  c.eta = 0.0;
  EXPECT_THROW(WcopsLearner(l, 1, 1000, c), ParameterError);
}

TEST(Wcops, StartsUniform) {
  Layout l({1, 2, 1}, 3);
  WcopsLearner w(l, 2, 10);
  EXPECT_EQ(w.act(), Policy::uniform(l));
}

TEST(Wcops, StepDiagnosticsFollowTheUpdateOrder) {
  Rng rng(1);
  Layout l({1, 2, 2, 1}, 2);
  const auto inst = random_instance(l, 1, rng);
  WcopsLearner w(l, 1, 300);
  Rng sim(2);
  for (int t = 0; t < 60; ++t) {
    const Policy pi = w.act();
    const ConfidenceModel before = w.confidence();
    const auto trace = simulate_episode(inst, pi, testing::random_vector(l.num_pairs(), rng, 0, 1),
                                        {testing::random_vector(l.num_pairs(), rng, -1, 1)}, sim);
    w.observe(trace);
    const auto& info = w.last_step();
    const auto u = upper_occupancy(before, pi);
    EXPECT_EQ(info.upper_occupancy, u);
    EXPECT_EQ(info.loss_estimate, estimate_loss(l, trace, u, w.gamma()));
    // Confidence set and bonuses reflect the counters including episode t.
    const auto fresh = ConfidenceModel::from_counters(w.counters(), w.sizes(), w.delta());
    EXPECT_EQ(w.confidence().widths(), fresh.widths());
    EXPECT_EQ(w.bonuses(), bonus_vector(w.counters(), w.sizes(), w.delta()));
    for (std::size_t p = 0; p < l.num_pairs(); ++p)
      EXPECT_DOUBLE_EQ(w.feasible_set().shifted[0][p], w.estimator().estimate(0, p) - w.bonuses()[p]);
  }
}

TEST(Wcops, IteratesStayValid) {
  Rng rng(3);
  Layout l({1, 2, 3, 2, 1}, 3);
  const auto inst = random_instance(l, 2, rng);
  WcopsLearner w(l, 2, 500);
  Rng sim(4);
  for (int t = 0; t < 150; ++t) {
    const Policy pi = w.act();
    ASSERT_NO_THROW(pi.validate(1e-9));
    w.observe(simulate_episode(inst, pi, testing::random_vector(l.num_pairs(), rng, 0, 1),
                               {testing::random_vector(l.num_pairs(), rng, -1, 1),
                                testing::random_vector(l.num_pairs(), rng, -1, 1)},
                               sim));
    EXPECT_TRUE(validate_occupancy(w.occupancy(), 1e-7).empty());
    if (!w.last_step().fallback) EXPECT_LE(w.last_step().solve.max_constraint, 1e-8);
  }
}

TEST(Wcops, UpperOccupancyDominatesTrueOccupancyWhenModelIsCovered) {
  Rng rng(5);
  Layout l({1, 2, 2, 1}, 2);
  const auto inst = random_instance(l, 1, rng);
  WcopsLearner w(l, 1, 2000, {0.1});
  Rng sim(6);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const Policy pi = w.act();
    const bool covered = w.confidence().contains(inst.transitions);
    w.observe(simulate_episode(inst, pi, PairVector(l.num_pairs(), 0.5), {PairVector(l.num_pairs(), -0.5)}, sim));
    if (!covered) continue;
    ++checked;
    const auto q = compute_pair_occupancy(inst.transitions, pi);
    for (std::size_t p = 0; p < l.num_pairs(); ++p) EXPECT_GE(w.last_step().upper_occupancy[p], q[p] - 1e-12);
  }
  EXPECT_GT(checked, 100);
}

TEST(Wcops, AlwaysViolatedConstraintsTriggerFallback) {
  Rng rng(7);
  Layout l({1, 2, 1}, 2);
  const auto inst = random_instance(l, 1, rng);
  WcopsLearner w(l, 1, 3000);
  Rng sim(8);
  const CostMatrix g{PairVector(l.num_pairs(), 1.0)};
  for (int t = 0; t < 3000; ++t) w.observe(simulate_episode(inst, w.act(), PairVector(l.num_pairs(), 0.5), g, sim));
  bool saw = false;
  for (const auto& e : w.events()) saw = saw || e.kind == "infeasible_fallback";
  EXPECT_TRUE(saw);
  EXPECT_TRUE(w.last_step().fallback);
  EXPECT_TRUE(validate_occupancy(w.occupancy(), 1e-7).empty());
}

TEST(Wcops, Deterministic) {
  Rng rng(9);
  Layout l({1, 2, 2, 1}, 2);
  const auto inst = random_instance(l, 1, rng);
  std::vector<EpisodeTrace> traces;
  Rng sim(10);
  for (int t = 0; t < 50; ++t)
    traces.push_back(simulate_episode(inst, testing::random_policy(l, rng),
                                      testing::random_vector(l.num_pairs(), rng, 0, 1),
                                      {testing::random_vector(l.num_pairs(), rng, -1, 1)}, sim));
  WcopsLearner a(l, 1, 50), b(l, 1, 50);
  for (const auto& tr : traces) {
    a.observe(tr);
    b.observe(tr);
  }
  EXPECT_EQ(a.occupancy().values(), b.occupancy().values());
  EXPECT_EQ(a.act(), b.act());
}

TEST(Wcops, LossEstimateOnlyOnVisitedPairs) {
  Rng rng(11);
  Layout l({1, 3, 1}, 3);
  const auto inst = random_instance(l, 1, rng);
  WcopsLearner w(l, 1, 100);
  Rng sim(12);
  const auto trace = simulate_episode(inst, w.act(), PairVector(l.num_pairs(), 0.25), {PairVector(l.num_pairs(), 0.0)}, sim);
  w.observe(trace);
  const auto& info = w.last_step();
  for (std::size_t p = 0; p < l.num_pairs(); ++p) {
    if (trace.visited(l.pair_state(p), l.pair_action(p)))
      EXPECT_DOUBLE_EQ(info.loss_estimate[p], 0.75 / (info.upper_occupancy[p] + w.gamma()));
    else
      EXPECT_EQ(info.loss_estimate[p], 0.0);
  }
}

}  // namespace
}  // namespace wcops
