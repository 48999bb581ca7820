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

// Dense two-phase simplex for small linear programs
//   maximize c^T x  s.t.  A x = b,  G x <= h,  x >= 0.
// Sized for desk-scale occupancy polytopes (a few hundred columns).

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace wcops {

struct PolyhedralSet {
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq;
  Eigen::VectorXd ineq_rhs;

  Eigen::Index num_vars() const { return std::max(eq.cols(), ineq.cols()); }

  /// Appends the row `coeffs^T x <= rhs`.
  void add_inequality(const Eigen::VectorXd& coeffs, double rhs) {
    const Eigen::Index r = ineq.rows();
    ineq.conservativeResize(r + 1, coeffs.size());
    ineq.row(r) = coeffs.transpose();
    ineq_rhs.conservativeResize(r + 1);
    ineq_rhs(r) = rhs;
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-10;
  std::size_t max_iterations = 50000;
};

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(rows, cols + 1), basis_(rows) {}

  Eigen::MatrixXd& data() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double rhs(Eigen::Index r) const { return t_(r, t_.cols() - 1); }

  void pivot(Eigen::Index r, Eigen::Index c, Eigen::VectorXd& reduced) {
    const double pv = t_(r, c);
    t_.row(r) /= pv;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double f = reduced(c);
    if (f != 0.0) reduced -= f * t_.row(r).transpose();
    basis_[static_cast<std::size_t>(r)] = c;
  }

  /// Maximizes cost^T x over the current basis; `allowed` masks entering
  /// columns. Returns kOptimal, kUnbounded or kIterationLimit.
  LpStatus optimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed,
                    const LpOptions& opt, std::size_t& iterations) {
    // reduced(j) = cost_j - cost_B^T column_j; the last entry tracks -objective.
    Eigen::VectorXd reduced = Eigen::VectorXd::Zero(t_.cols());
    reduced.head(cols()) = cost;
    for (Eigen::Index r = 0; r < rows(); ++r) {
      const double cb = cost(basis_[static_cast<std::size_t>(r)]);
      if (cb != 0.0) reduced -= cb * t_.row(r).transpose();
    }
    std::size_t degenerate_streak = 0;
    while (iterations < opt.max_iterations) {
      const bool bland = degenerate_streak > 50;
      Eigen::Index enter = -1;
      double best = opt.optimality_tol;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)]) continue;
        if (reduced(j) > best) {
          enter = j;
          if (bland) break;
          best = reduced(j);
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= opt.pivot_tol) continue;
        const double rr = std::max(0.0, rhs(r)) / a;
        if (leave < 0 || rr < ratio - 1e-12) {
          leave = r;
          ratio = rr;
        } else if (rr <= ratio + 1e-12) {
          const bool better = bland ? basis_[static_cast<std::size_t>(r)] <
                                          basis_[static_cast<std::size_t>(leave)]
                                    : a > t_(leave, enter);
          if (better) {
            leave = r;
            ratio = std::min(ratio, rr);
          }
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_streak = ratio <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(leave, enter, reduced);
      ++iterations;
    }
    return LpStatus::kIterationLimit;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// Solves maximize objective^T x over `set` with x >= 0. The returned basic
/// solution is re-solved against the original rows for accuracy.
inline LpResult solve_lp(const Eigen::VectorXd& objective, const PolyhedralSet& set,
                         const LpOptions& opt = {}) {
  const Eigen::Index n = objective.size();
  const Eigen::Index ne = set.eq.rows();
  const Eigen::Index ni = set.ineq.rows();
  const Eigen::Index rows = ne + ni;

  // Standard form: columns [x | slacks | artificials].
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n + ni);
  Eigen::VectorXd b(rows);
  if (ne > 0) {
    a.topLeftCorner(ne, n) = set.eq;
    b.head(ne) = set.eq_rhs;
  }
  if (ni > 0) {
    a.block(ne, 0, ni, n) = set.ineq;
    a.block(ne, n, ni, ni).setIdentity();
    b.tail(ni) = set.ineq_rhs;
  }
  std::vector<bool> needs_artificial(static_cast<std::size_t>(rows), false);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (b(r) < 0.0) {
      a.row(r) *= -1.0;
      b(r) *= -1.0;
    }
    needs_artificial[static_cast<std::size_t>(r)] = r < ne || a(r, n + (r - ne)) < 0.0;
  }
  Eigen::Index num_art = 0;
  for (bool v : needs_artificial) num_art += v ? 1 : 0;
  const Eigen::Index total = n + ni + num_art;

  detail::Tableau tab(rows, total);
  auto& t = tab.data();
  t.setZero();
  t.leftCols(n + ni) = a;
  t.col(total) = b;
  Eigen::Index next_art = n + ni;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (needs_artificial[static_cast<std::size_t>(r)]) {
      t(r, next_art) = 1.0;
      tab.basis()[static_cast<std::size_t>(r)] = next_art++;
    } else {
      tab.basis()[static_cast<std::size_t>(r)] = n + (r - ne);
    }
  }

  LpResult result;
  std::vector<bool> allowed(static_cast<std::size_t>(total), true);
  if (num_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    phase1.tail(num_art).setConstant(-1.0);
    const auto st = tab.optimize(phase1, allowed, opt, result.iterations);
    if (st == LpStatus::kIterationLimit) {
      result.status = st;
      return result;
    }
    double infeasibility = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r)
      if (tab.basis()[static_cast<std::size_t>(r)] >= n + ni) infeasibility += tab.rhs(r);
    if (infeasibility > opt.feasibility_tol * std::max(1.0, b.lpNorm<Eigen::Infinity>())) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive remaining artificials out of the basis where possible; rows
    // where that fails are redundant and keep a zero artificial.
    Eigen::VectorXd dummy = Eigen::VectorXd::Zero(total + 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < n + ni) continue;
      Eigen::Index best = -1;
      double best_abs = 1e-9;
      for (Eigen::Index j = 0; j < n + ni; ++j) {
        if (std::abs(t(r, j)) > best_abs) {
          best_abs = std::abs(t(r, j));
          best = j;
        }
      }
      if (best >= 0) tab.pivot(r, best, dummy);
    }
    for (Eigen::Index j = n + ni; j < total; ++j) allowed[static_cast<std::size_t>(j)] = false;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  cost.head(n) = objective;
  result.status = tab.optimize(cost, allowed, opt, result.iterations);
  if (result.status != LpStatus::kOptimal) return result;

  // Re-solve B x_B = b on the untouched standard-form columns.
  Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::Index art = n + ni;
  std::vector<Eigen::Index> art_row(static_cast<std::size_t>(num_art));
  for (Eigen::Index r = 0; r < rows; ++r)
    if (needs_artificial[static_cast<std::size_t>(r)]) art_row[static_cast<std::size_t>(art++ - n - ni)] = r;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(k)];
    if (j < n + ni) {
      basis_matrix.col(k) = a.col(j);
    } else {
      basis_matrix(art_row[static_cast<std::size_t>(j - n - ni)], k) = 1.0;
    }
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n + ni);
  if (rows > 0) {
    const Eigen::VectorXd xb = basis_matrix.partialPivLu().solve(b);
    for (Eigen::Index k = 0; k < rows; ++k) {
      const Eigen::Index j = tab.basis()[static_cast<std::size_t>(k)];
      if (j < n + ni) full(j) = std::max(0.0, xb(k));
    }
  }
  result.x = full.head(n);
  result.value = objective.dot(result.x);
  return result;
}

}  // namespace wcops
