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
#include "wcops/feasible_set.hpp"
#include "wcops/linprog.hpp"

namespace wcops {
namespace {

TEST(Widths, Formulas) {
  ProblemSizes n{4, 9, 3, 2, 5000};
  EXPECT_NEAR(confidence_width(10, 3, n, 0.01), std::sqrt(2.0 * 3 * std::log(5000.0 * 9 * 3 / 0.01) / 10), 1e-14);
  EXPECT_NEAR(confidence_width(0, 3, n, 0.01), confidence_width(1, 3, n, 0.01), 0.0);
  EXPECT_NEAR(bonus(25, n, 0.01), std::sqrt(2.0 * std::log(2.0 * 2 * 9 * 3 * 5000 / 0.01) / 25), 1e-14);
  EXPECT_THROW(bonus(1, n, 0.0), ParameterError);
  EXPECT_LT(bonus(100, n, 0.01), bonus(10, n, 0.01));
}

TEST(EmpiricalTransitions, RowsAreFrequencies) {
  Layout l({1, 3, 1}, 1);
  CounterState c(l);
  for (std::size_t j : {1, 1, 2, 3}) {
    EpisodeTrace tr;
    tr.steps.push_back({0, 0, j, 0, {}});
    tr.steps.push_back({j, 0, 4, 0, {}});
    c.update(tr);
  }
  const auto P = empirical_transitions(c);
  EXPECT_DOUBLE_EQ(P(0, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(P(0, 0, 2), 0.25);
  EXPECT_DOUBLE_EQ(P(0, 0, 3), 0.25);
  const auto filled = empirical_transitions(c, true);
  EXPECT_DOUBLE_EQ(filled(1, 0, 4), 1.0);
}

/// Row of the box: center moved a fraction of the way to a random row.
TransitionModel perturb_within(const ConfidenceModel& m, Rng& rng) {
  TransitionModel P = m.center();
  const Layout& l = m.layout();
  for (std::size_t p = 0; p < l.num_pairs(); ++p) {
    auto row = P.row(p);
    std::vector<double> target(row.size());
    double s = 0.0;
    for (auto& v : target) s += v = uniform01(rng);
    for (auto& v : target) v /= s;
    double dev = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) dev = std::max(dev, std::abs(target[j] - row[j]));
    const double lam = dev > 0 ? std::min(1.0, m.width(p) / dev) * uniform01(rng) : 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += lam * (target[j] - row[j]);
  }
  return P;
}

TEST(UpperOccupancy, DominatesEveryModelInTheBox) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Layout l({1, 2, 3, 2, 1}, 3);
    const auto center = testing::random_transitions(l, rng);
    const ConfidenceModel m(center, testing::random_vector(l.num_pairs(), rng, 0.0, 0.4));
    const auto pi = testing::random_policy(l, rng);
    const auto u = upper_occupancy(m, pi);
    for (int s = 0; s < 10; ++s) {
      const auto P = perturb_within(m, rng);
      ASSERT_TRUE(m.contains(P));
      const auto q = compute_pair_occupancy(P, pi);
      for (std::size_t p = 0; p < q.size(); ++p) EXPECT_GE(u[p], q[p] - 1e-12);
    }
    for (double v : u) EXPECT_LE(v, 1.0);
  }
}

TEST(UpperOccupancy, ZeroWidthIsExact) {
  Rng rng(2);
  Layout l({1, 3, 2, 1}, 2);
  const auto P = testing::random_transitions(l, rng);
  const auto pi = testing::random_policy(l, rng);
  const auto u = upper_occupancy(ConfidenceModel(P, PairVector(l.num_pairs(), 0.0)), pi);
  const auto q = compute_pair_occupancy(P, pi);
  for (std::size_t p = 0; p < q.size(); ++p) EXPECT_NEAR(u[p], q[p], 1e-12);
}

TEST(MaxEntry, Formula) {
  Layout l({1, 3, 1}, 1);
  TransitionModel P(l);
  auto r = P.row(0);
  r[0] = 0.6, r[1] = 0.3, r[2] = 0.1;
  for (std::size_t x = 1; x <= 3; ++x) P.row(l.pair_index(x, 0))[0] = 1.0;
  ConfidenceModel m(P, PairVector(l.num_pairs(), 0.2));
  EXPECT_NEAR(m.max_entry(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(m.max_entry(0, 2), std::min({1.0, 0.3, 1.0 - 0.4 - 0.1}), 1e-15);
}

TEST(BestRow, MatchesLinearProgram) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> c(n), v(n);
    double s = 0.0;
    for (auto& x : c) s += x = uniform01(rng);
    for (auto& x : c) x /= s;
    for (auto& x : v) x = uniform01(rng) * 4 - 2;
    const double eps = uniform01(rng) * 0.5;
    const bool maximize = trial % 2 == 0;
    std::vector<double> row;
    const auto got = best_row_in_box(c, eps, v, maximize, &row);
    ASSERT_TRUE(got);

    // max (+/-v)^T p, sum p = 1, p_j <= min(1, c_j + eps), -p_j <= -(c_j - eps).
    PolyhedralSet set;
    set.eq = Eigen::MatrixXd::Ones(1, static_cast<Eigen::Index>(n));
    set.eq_rhs = Eigen::VectorXd::Ones(1);
    for (std::size_t j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      e(static_cast<Eigen::Index>(j)) = 1.0;
      set.add_inequality(e, std::min(1.0, c[j] + eps));
      if (c[j] - eps > 0) set.add_inequality(-e, -(c[j] - eps));
    }
    Eigen::VectorXd obj(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) obj(static_cast<Eigen::Index>(j)) = maximize ? v[j] : -v[j];
    const auto lp = solve_lp(obj, set);
    ASSERT_EQ(lp.status, LpStatus::kOptimal);
    EXPECT_NEAR(*got, maximize ? lp.value : -lp.value, 1e-10);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += row[j];
      EXPECT_LE(std::abs(row[j] - c[j]), eps + 1e-12);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(PlanInBox, OptimisticOverSampledModels) {
  Rng rng(17);
  Layout l({1, 2, 2, 1}, 2);
  const ConfidenceModel m(testing::random_transitions(l, rng), PairVector(l.num_pairs(), 0.15));
  const auto r = testing::random_vector(l.num_pairs(), rng, 0, 1);
  const auto plan = plan_in_box(m, r, true);
  const auto pi = testing::random_policy(l, rng);
  const auto plan_pi = plan_in_box(m, r, true, &pi);
  for (int s = 0; s < 50; ++s) {
    const auto P = perturb_within(m, rng);
    const auto q = compute_pair_occupancy(P, pi);
    EXPECT_LE(dot_pairs(r, q), plan_pi.value + 1e-12);
    EXPECT_LE(plan_pi.value, plan.value + 1e-12);
  }
  // Zero width: evaluation of the policy under the center.
  const ConfidenceModel exact(m.center(), PairVector(l.num_pairs(), 0.0));
  EXPECT_NEAR(plan_in_box(exact, r, true, &pi).value, dot_pairs(r, compute_pair_occupancy(m.center(), pi)), 1e-12);
}

TEST(FeasibleSpec, ShiftsByBonus) {
  Layout l({1, 1}, 2);
  ConfidenceModel m(TransitionModel::uniform(l), PairVector(2, 0.0));
  const auto spec = build_feasible_spec(m, {{0.5, -0.5}}, {0.1, 0.2}, ConstraintMode::kStochastic);
  EXPECT_DOUBLE_EQ(spec.shifted[0][0], 0.4);
  EXPECT_DOUBLE_EQ(spec.shifted[0][1], -0.7);
  EXPECT_DOUBLE_EQ(spec.max_constraint({0.5, 0.5}), 0.5 * 0.4 - 0.5 * 0.7);
  EXPECT_THROW(build_feasible_spec(m, {{0.5}}, {0.1, 0.2}, ConstraintMode::kStochastic), StructuralError);
}

}  // namespace
}  // namespace wcops
