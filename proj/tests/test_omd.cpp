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
#include <sstream>

#include "test_util.hpp"
#include "wcops/omd_solver.hpp"

namespace wcops {
namespace {

TEST(Bregman, KnownValues) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_NEAR(bregman(std::vector<double>{1.0, 0.0}, p), std::log(2.0), 1e-15);
  EXPECT_EQ(bregman(p, p), 0.0);
  EXPECT_THROW(bregman(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}), DomainError);
}

TEST(Bregman, PinskerOnRandomPairs) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> q(5), p(5);
    double sq = 0, sp = 0;
    for (auto& v : q) sq += v = uniform01(rng);
    for (auto& v : p) sp += v = uniform01(rng) + 1e-3;
    for (auto& v : q) v /= sq;
    for (auto& v : p) v /= sp;
    double l1 = 0.0, direct = 0.0;
    for (int j = 0; j < 5; ++j) {
      l1 += std::abs(q[j] - p[j]);
      direct += q[j] * std::log(q[j] / p[j]) - q[j] + p[j];
    }
    const double b = bregman(q, p);
    EXPECT_NEAR(b, direct, 1e-14);
    EXPECT_GE(b, 0.5 * l1 * l1 - 1e-14);
  }
}

FeasibleSetSpec single_state_spec(std::size_t actions, CostMatrix g) {
  Layout l({1, 1}, actions);
  ConfidenceModel m(TransitionModel::uniform(l), PairVector(actions, 0.0));
  return build_feasible_spec(m, g, PairVector(actions, 0.0), ConstraintMode::kStochastic);
}

TEST(OmdStep, ExponentiatedGradientClosedForm) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t A = 2 + trial % 3;
    Layout l({1, 1}, A);
    const auto spec = single_state_spec(A, {});
    OmdProblem prob;
    prob.loss = testing::random_vector(A, rng, 0, 3);
    std::vector<double> p(A);
    double s = 0;
    for (auto& v : p) s += v = uniform01(rng) + 0.05;
    for (auto& v : p) v /= s;
    prob.anchor = OccupancyMeasure(l, p);
    prob.feasible = &spec;
    prob.eta = 0.1 + uniform01(rng);
    const auto r = solve_omd_step(prob);
    ASSERT_EQ(r.status, OmdStatus::kSolved);
    double z = 0.0;
    for (std::size_t a = 0; a < A; ++a) z += p[a] * std::exp(-prob.eta * prob.loss[a]);
    for (std::size_t a = 0; a < A; ++a)
      EXPECT_NEAR(r.q.values()[a], p[a] * std::exp(-prob.eta * prob.loss[a]) / z, 1e-10);
  }
}

TEST(OmdStep, ZeroLossKeepsAnchor) {
  Rng rng(5);
  Layout l({1, 2, 2, 1}, 2);
  const auto P = testing::random_transitions(l, rng);
  ConfidenceModel m(P, PairVector(l.num_pairs(), 0.1));
  const auto anchor = compute_occupancy(P, testing::random_policy(l, rng));
  const auto spec = build_feasible_spec(m, {PairVector(l.num_pairs(), -0.5)}, PairVector(l.num_pairs(), 0.0),
                                        ConstraintMode::kStochastic);
  OmdProblem prob{PairVector(l.num_pairs(), 0.0), anchor, &spec, 1.0, true, {}};
  const auto r = solve_omd_step(prob);
  for (std::size_t k = 0; k < anchor.values().size(); ++k) EXPECT_NEAR(r.q.values()[k], anchor.values()[k], 1e-9);
}

TEST(OmdStep, WorkedSingleStateMatchesGrid) {
  const std::array<double, 3> c{0.4, -0.6, 0.0};
  const auto spec = single_state_spec(3, {{c[0], c[1], c[2]}});
  Layout l({1, 1}, 3);
  OmdProblem prob;
  prob.loss = {0.1, 0.9, 0.5};
  prob.eta = 5.0;
  prob.anchor = OccupancyMeasure::uniform(l);
  prob.feasible = &spec;
  const auto r = solve_omd_step(prob);
  ASSERT_EQ(r.status, OmdStatus::kSolved);
  const std::array<double, 3> lin{0.5, 4.5, 2.5};
  const std::array<double, 3> p{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto [gq, gv] = testing::grid_kl_minimum(lin, p, c);
  EXPECT_NEAR(r.objective, gv, 1e-4);
  EXPECT_LE(r.objective, gv + 1e-9);
  EXPECT_LE(r.max_constraint, 1e-8);
}

TEST(OmdStep, RandomConstrainedProblemsMatchGrid) {
  Rng rng(77);
  Layout l({1, 1}, 3);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<double, 3> c{}, p{}, lin{};
    double s = 0;
    for (auto& v : p) s += v = uniform01(rng) + 0.05;
    for (auto& v : p) v /= s;
    for (auto& v : c) v = 2 * uniform01(rng) - 1;
    c[trial % 3] = -std::abs(c[trial % 3]) - 0.05;  // keep the set nonempty
    const double eta = 0.5 + 2 * uniform01(rng);
    PairVector loss(3);
    for (int k = 0; k < 3; ++k) lin[k] = eta * (loss[k] = 2 * uniform01(rng));
    const auto spec = single_state_spec(3, {{c[0], c[1], c[2]}});
    OmdProblem prob{loss, OccupancyMeasure(l, {p[0], p[1], p[2]}), &spec, eta, true, {}};
    const auto r = solve_omd_step(prob);
    ASSERT_EQ(r.status, OmdStatus::kSolved);
    const auto [gq, gv] = testing::grid_kl_minimum(lin, p, c);
    EXPECT_NEAR(r.objective, gv, 1e-4);
    EXPECT_LE(r.max_constraint, 1e-8);
  }
}

TEST(OmdStep, LayeredSolutionIsValidAndOptimalAgainstSamples) {
  Rng rng(31);
  Layout l({1, 2, 3, 2, 1}, 3);
  const auto P = testing::random_transitions(l, rng);
  ConfidenceModel m(P, testing::random_vector(l.num_pairs(), rng, 0.0, 0.2));
  CostMatrix g{testing::random_vector(l.num_pairs(), rng, -1, 1), testing::random_vector(l.num_pairs(), rng, -1, 1)};
  // Make the centre's uniform-policy occupancy strictly feasible.
  const auto q_uniform = compute_pair_occupancy(P, Policy::uniform(l));
  for (auto& gi : g) {
    const double v = dot_pairs(gi, q_uniform);
    for (auto& x : gi) x -= (v + 0.1) / static_cast<double>(l.num_layers());
  }
  const auto spec = build_feasible_spec(m, g, PairVector(l.num_pairs(), 0.0), ConstraintMode::kStochastic);
  OmdProblem prob{testing::random_vector(l.num_pairs(), rng, 0, 2), OccupancyMeasure::uniform(l), &spec, 0.7, true, {}};
  const auto r = solve_omd_step(prob);
  ASSERT_EQ(r.status, OmdStatus::kSolved);
  EXPECT_TRUE(validate_occupancy(r.q, 1e-7).empty());
  EXPECT_LE(r.max_constraint, 1e-8);
  // Row-wise the induced transitions lie in the box.
  for (std::size_t pr = 0; pr < l.num_pairs(); ++pr) {
    const std::size_t x = l.pair_state(pr), a = l.pair_action(pr);
    const double mass = r.q.pair_mass(x, a);
    if (mass < 1e-9) continue;
    for (std::size_t j = 0; j < l.next_layer_size(x); ++j) {
      const double ratio = r.q.values()[l.triple_begin(x, a) + j] / mass;
      EXPECT_LE(std::abs(ratio - m.center().row(pr)[j]), m.width(pr) + 1e-6);
    }
  }
  // Objective below feasible candidates built from random policies on P.
  const Eigen::VectorXd lin = prob.eta * lift_to_triples(l, prob.loss);
  for (int k = 0; k < 200; ++k) {
    const auto q = compute_occupancy(P, testing::random_policy(l, rng));
    if (spec.max_constraint(q.pair_marginals()) > 0) continue;
    const double v = lin.dot(to_eigen(q.values())) + bregman(q, prob.anchor);
    EXPECT_LE(r.objective, v + 1e-9);
  }
}

TEST(OmdStep, ReportsInfeasibleConstraints) {
  const auto spec = single_state_spec(3, {{0.2, 0.3, 0.1}});
  OmdProblem prob{{0.1, 0.2, 0.3}, OccupancyMeasure::uniform(Layout({1, 1}, 3)), &spec, 1.0, true, {}};
  const auto r = solve_omd_step(prob);
  EXPECT_EQ(r.status, OmdStatus::kInfeasible);
  EXPECT_NEAR(r.max_constraint, 0.1, 1e-9);
  prob.enforce_constraints = false;
  EXPECT_EQ(solve_omd_step(prob).status, OmdStatus::kSolved);
}

TEST(OmdStep, IterationCapRaisesWithBestIterate) {
  const auto spec = single_state_spec(3, {{0.4, -0.6, 0.0}});
  Layout l({1, 1}, 3);
  OmdProblem prob{{0.1, 0.9, 0.5}, OccupancyMeasure::uniform(l), &spec, 5.0, true, {}};
  prob.options.max_iterations = 1;
  try {
    solve_omd_step(prob);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.best_iterate().size(), 3u);
    EXPECT_GT(e.primal_residual() + e.dual_residual() + e.gap(), 0.0);
  }
}

TEST(OmdStep, DebugLineIsJson) {
  const auto spec = single_state_spec(3, {{0.4, -0.6, 0.0}});
  std::ostringstream out;
  OmdProblem prob{{0.1, 0.9, 0.5}, OccupancyMeasure::uniform(Layout({1, 1}, 3)), &spec, 5.0, true, {}};
  prob.options.debug = &out;
  solve_omd_step(prob);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_TRUE(j.contains("iterations"));
  EXPECT_EQ(j["multipliers"].size(), 1u);
}

TEST(OmdStep, AnchorSmoothing) {
  Layout l({1, 1}, 3);
  const auto s = smooth_anchor(OccupancyMeasure(l, {1.0, 0.0, 0.0}));
  for (double v : s.values()) EXPECT_GT(v, 0.0);
  EXPECT_NEAR(s.values()[0] + s.values()[1] + s.values()[2], 1.0, 1e-15);
}

}  // namespace
}  // namespace wcops
