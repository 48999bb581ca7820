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

// Linear descriptions of occupancy polytopes.
//  - box_occupancy_polytope: triple variables q(x,a,x') for Delta(P) with P
//    ranging over a confidence box.
//  - exact_occupancy_polytope: pair variables q(x,a) for a known model.

#include <Eigen/Dense>

#include "wcops/feasible_set.hpp"
#include "wcops/linprog.hpp"

namespace wcops {

namespace detail {

/// Unit mass out of x0 and flow conservation at internal states, in triple
/// variables.
inline void add_triple_flow_rows(const Layout& layout, PolyhedralSet& set) {
  const Eigen::Index n = static_cast<Eigen::Index>(layout.num_triples());
  const Eigen::Index rows = static_cast<Eigen::Index>(layout.num_states() - 1);
  set.eq = Eigen::MatrixXd::Zero(rows, n);
  set.eq_rhs = Eigen::VectorXd::Zero(rows);
  set.eq_rhs(0) = 1.0;
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    const auto r = static_cast<Eigen::Index>(x);
    for (std::size_t a = 0; a < layout.num_actions(); ++a) {
      const std::size_t b = layout.triple_begin(x, a);
      for (std::size_t j = 0; j < layout.next_layer_size(x); ++j)
        set.eq(r, static_cast<Eigen::Index>(b + j)) += 1.0;
    }
    const std::size_t k = layout.layer_of(x);
    if (k == 0) continue;
    for (std::size_t s = 0; s < layout.layer_size(k - 1); ++s) {
      const std::size_t prev = layout.first_state(k - 1) + s;
      for (std::size_t a = 0; a < layout.num_actions(); ++a)
        set.eq(r, static_cast<Eigen::Index>(layout.triple_index(prev, a, x))) -= 1.0;
    }
  }
}

}  // namespace detail

/// Triple-space description of Delta(P) for the box model. Bounds that every
/// probability row meets anyway (upper >= 1, lower <= 0) are omitted; a
/// zero width turns the box into equalities.
inline PolyhedralSet box_occupancy_polytope(const ConfidenceModel& model) {
  const Layout& layout = model.layout();
  PolyhedralSet set;
  detail::add_triple_flow_rows(layout, set);
  const Eigen::Index n = static_cast<Eigen::Index>(layout.num_triples());

  std::vector<Eigen::VectorXd> ineq_rows;
  std::vector<Eigen::VectorXd> eq_rows;
  for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
    const std::size_t x = layout.pair_state(p);
    const std::size_t a = layout.pair_action(p);
    const std::size_t begin = layout.triple_begin(x, a);
    const auto center = model.center().row(p);
    const double eps = model.width(p);
    const std::size_t width = center.size();
    double center_sum = 0.0;
    for (double c : center) center_sum += c;
    auto make_row = [&](std::size_t j, double coef_pair, double coef_self) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < width; ++k)
        row(static_cast<Eigen::Index>(begin + k)) = coef_pair;
      row(static_cast<Eigen::Index>(begin + j)) += coef_self;
      return row;
    };
    if (eps == 0.0) {
      // q(x,a,x'_j) = c_j q(x,a); one row is implied when the center sums to one.
      const bool drop_last = std::abs(center_sum - 1.0) < 1e-12 && width > 0;
      for (std::size_t j = 0; j + (drop_last ? 1 : 0) < width; ++j)
        eq_rows.push_back(make_row(j, -center[j], 1.0));
      continue;
    }
    for (std::size_t j = 0; j < width; ++j) {
      const double hi = center[j] + eps;
      const double lo = center[j] - eps;
      if (hi < 1.0) ineq_rows.push_back(make_row(j, -hi, 1.0));  // q_j - hi q <= 0
      if (lo > 0.0) ineq_rows.push_back(make_row(j, lo, -1.0));  // lo q - q_j <= 0
    }
  }
  if (!eq_rows.empty()) {
    const Eigen::Index base = set.eq.rows();
    set.eq.conservativeResize(base + static_cast<Eigen::Index>(eq_rows.size()), n);
    set.eq_rhs.conservativeResize(base + static_cast<Eigen::Index>(eq_rows.size()));
    for (std::size_t r = 0; r < eq_rows.size(); ++r) {
      set.eq.row(base + static_cast<Eigen::Index>(r)) = eq_rows[r].transpose();
      set.eq_rhs(base + static_cast<Eigen::Index>(r)) = 0.0;
    }
  }
  set.ineq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ineq_rows.size()), n);
  set.ineq_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ineq_rows.size()));
  for (std::size_t r = 0; r < ineq_rows.size(); ++r)
    set.ineq.row(static_cast<Eigen::Index>(r)) = ineq_rows[r].transpose();
  return set;
}

/// Pair-space description of Delta(P) for a fixed model.
inline PolyhedralSet exact_occupancy_polytope(const TransitionModel& transitions) {
  const Layout& layout = transitions.layout();
  const Eigen::Index n = static_cast<Eigen::Index>(layout.num_pairs());
  const Eigen::Index rows = static_cast<Eigen::Index>(layout.num_states() - 1);
  PolyhedralSet set;
  set.eq = Eigen::MatrixXd::Zero(rows, n);
  set.eq_rhs = Eigen::VectorXd::Zero(rows);
  set.eq_rhs(0) = 1.0;
  for (std::size_t x = 0; x + 1 < layout.num_states(); ++x) {
    const auto r = static_cast<Eigen::Index>(x);
    for (std::size_t a = 0; a < layout.num_actions(); ++a)
      set.eq(r, static_cast<Eigen::Index>(layout.pair_index(x, a))) += 1.0;
    const std::size_t k = layout.layer_of(x);
    if (k == 0) continue;
    for (std::size_t s = 0; s < layout.layer_size(k - 1); ++s) {
      const std::size_t prev = layout.first_state(k - 1) + s;
      for (std::size_t a = 0; a < layout.num_actions(); ++a)
        set.eq(r, static_cast<Eigen::Index>(layout.pair_index(prev, a))) -= transitions(prev, a, x);
    }
  }
  set.ineq = Eigen::MatrixXd::Zero(0, n);
  set.ineq_rhs = Eigen::VectorXd::Zero(0);
  return set;
}

/// Copies pair values onto every successor triple.
inline Eigen::VectorXd lift_to_triples(const Layout& layout, const PairVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(layout.num_triples()));
  for (std::size_t p = 0; p < layout.num_pairs(); ++p) {
    const std::size_t b = layout.triple_begin(layout.pair_state(p), layout.pair_action(p));
    for (std::size_t j = 0; j < layout.next_layer_size(layout.pair_state(p)); ++j)
      out(static_cast<Eigen::Index>(b + j)) = v[p];
  }
  return out;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace wcops
