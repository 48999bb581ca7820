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

// Mirror-descent step over the optimistic decision space:
//   argmin_q  eta * loss^T q + B(q || anchor)   over q in Delta(P_t),
//   subject to c_i^T q <= 0,
// with B the unnormalized KL divergence. The program is solved in triple
// space by a primal-dual interior-point method; the entropy keeps iterates
// strictly positive, so only the box and constraint rows carry slacks.

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wcops/errors.hpp"
#include "wcops/feasible_set.hpp"
#include "wcops/linprog.hpp"
#include "wcops/polytope.hpp"

namespace wcops {

/// sum q ln(q/p) - sum (q - p), with 0 ln 0 = 0.
inline double bregman(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw StructuralError("bregman: size mismatch");
  double v = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] < 0.0 || p[j] < 0.0) throw DomainError("bregman: negative entry");
    if (q[j] > 0.0) {
      if (p[j] <= 0.0) throw DomainError("bregman: q not absolutely continuous w.r.t. p");
      v += q[j] * std::log(q[j] / p[j]);
    }
    v -= q[j] - p[j];
  }
  return v;
}

inline double bregman(const OccupancyMeasure& q, const OccupancyMeasure& p) {
  return bregman(q.values(), p.values());
}

struct EntropicOptions {
  double tol_primal = 1e-11;
  double tol_dual = 1e-10;  // relative to the gradient terms
  double tol_gap = 1e-12;
  std::size_t max_iterations = 200;
};

struct EntropicSolution {
  Eigen::VectorXd q;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::vector<double> objective_trace;
};

/// Minimizes linear^T q + B(q || anchor) over {A q = b, G q <= h}.
/// Throws SolverError (with the best iterate) if tolerances are not met.
inline EntropicSolution solve_entropic(const Eigen::VectorXd& linear,
                                       const Eigen::VectorXd& anchor,
                                       const PolyhedralSet& set,
                                       const EntropicOptions& opt = {}) {
  using Eigen::Index;
  using Eigen::VectorXd;
  const Index n = anchor.size();
  const Index ne = set.eq.rows();
  const Index ni = set.ineq.rows();
  const auto& A = set.eq;
  const auto& G = set.ineq;

  VectorXd q = anchor;
  VectorXd y = VectorXd::Zero(ne);
  VectorXd s(ni), z(ni);
  if (ni > 0) {
    const VectorXd slack = set.ineq_rhs - G * q;
    for (Index i = 0; i < ni; ++i) {
      s(i) = std::max(slack(i), 1e-2);
      z(i) = 1e-2 / s(i);
    }
  }

  auto objective = [&](const VectorXd& v) {
    double f = linear.dot(v);
    for (Index j = 0; j < n; ++j) f += v(j) * std::log(v(j) / anchor(j)) - v(j) + anchor(j);
    return f;
  };

  EntropicSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd kkt(n + ne, n + ne);
  VectorXd rhs(n + ne);

  for (std::size_t it = 0; it <= opt.max_iterations; ++it) {
    VectorXd grad = linear;
    for (Index j = 0; j < n; ++j) grad(j) += std::log(q(j) / anchor(j));
    VectorXd rd = grad;
    // Dual residual is measured relative to the terms that cancel in it.
    double dual_scale = 1.0 + grad.lpNorm<Eigen::Infinity>();
    if (ne > 0) {
      const VectorXd t = A.transpose() * y;
      rd += t;
      dual_scale = std::max(dual_scale, 1.0 + t.lpNorm<Eigen::Infinity>());
    }
    if (ni > 0) {
      const VectorXd t = G.transpose() * z;
      rd += t;
      dual_scale = std::max(dual_scale, 1.0 + t.lpNorm<Eigen::Infinity>());
    }
    const VectorXd rp = ne > 0 ? VectorXd(A * q - set.eq_rhs) : VectorXd();
    const VectorXd ri = ni > 0 ? VectorXd(G * q + s - set.ineq_rhs) : VectorXd();
    const double mu = ni > 0 ? s.dot(z) / static_cast<double>(ni) : 0.0;
    const double res_p = std::max(ne > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0,
                                  ni > 0 ? ri.lpNorm<Eigen::Infinity>() : 0.0);
    const double res_d = rd.lpNorm<Eigen::Infinity>() / dual_scale;

    const double merit = std::max({res_p / opt.tol_primal, res_d / opt.tol_dual, mu / opt.tol_gap});
    if (merit < best_merit) {
      best_merit = merit;
      best.q = q;
      best.eq_duals = y;
      best.ineq_duals = z;
      best.iterations = it;
      best.primal_residual = res_p;
      best.dual_residual = res_d;
      best.gap = mu * static_cast<double>(ni);
    }
    best.objective_trace.push_back(objective(q));
    if (res_p <= opt.tol_primal && res_d <= opt.tol_dual && mu <= opt.tol_gap) {
      return best;
    }
    if (it == opt.max_iterations) break;

    // Reduced Newton system [M A^T; A 0], M = diag(1/q) + G^T diag(z/s) G.
    kkt.setZero();
    auto M = kkt.topLeftCorner(n, n);
    if (ni > 0) {
      const VectorXd d = z.cwiseQuotient(s);
      M.noalias() = G.transpose() * d.asDiagonal() * G;
    }
    for (Index j = 0; j < n; ++j) M(j, j) += 1.0 / q(j);
    if (ne > 0) {
      kkt.topRightCorner(n, ne) = A.transpose();
      kkt.bottomLeftCorner(ne, n) = A;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

    struct Direction {
      VectorXd dq, dy, ds, dz;
    };
    auto solve_direction = [&](const VectorXd& rc) {
      Direction dir;
      rhs.head(n) = -rd;
      if (ni > 0) {
        const VectorXd w = (-rc + z.cwiseProduct(ri)).cwiseQuotient(s);
        rhs.head(n) -= G.transpose() * w;
      }
      if (ne > 0) rhs.tail(ne) = -rp;
      const VectorXd sol = lu.solve(rhs);
      dir.dq = sol.head(n);
      dir.dy = sol.tail(ne);
      if (ni > 0) {
        dir.ds = -ri - G * dir.dq;
        dir.dz = (-rc - z.cwiseProduct(dir.ds)).cwiseQuotient(s);
      }
      return dir;
    };
    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (Index j = 0; j < v.size(); ++j)
        if (dv(j) < 0.0) a = std::min(a, -v(j) / dv(j));
      return a;
    };

    VectorXd rc = ni > 0 ? VectorXd(s.cwiseProduct(z)) : VectorXd();
    double sigma = 0.0;
    Direction dir = solve_direction(rc);
    if (ni > 0) {
      const double a_aff = std::min({max_step(q, dir.dq), max_step(s, dir.ds), max_step(z, dir.dz)});
      const double mu_aff =
          (s + a_aff * dir.ds).dot(z + a_aff * dir.dz) / static_cast<double>(ni);
      sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
      rc = s.cwiseProduct(z) + dir.ds.cwiseProduct(dir.dz) -
           VectorXd::Constant(ni, sigma * mu);
      dir = solve_direction(rc);
    }
    double step = max_step(q, dir.dq);
    if (ni > 0) step = std::min({step, max_step(s, dir.ds), max_step(z, dir.dz)});
    step = std::min(1.0, 0.99 * step);

    q += step * dir.dq;
    if (ne > 0) y += step * dir.dy;
    if (ni > 0) {
      s += step * dir.ds;
      z += step * dir.dz;
    }
  }
  throw SolverError("entropic solver did not converge", to_std(best.q), best.primal_residual,
                    best.dual_residual, best.gap);
}

struct OmdOptions {
  /// Objective tolerance; negative means 1e-6 * L.
  double tol_obj = -1.0;
  double tol_feas = 1e-8;
  std::size_t max_iterations = 200;
  /// When set, one JSON line of diagnostics per solve is written here.
  std::ostream* debug = nullptr;
};

struct OmdProblem {
  PairVector loss;
  OccupancyMeasure anchor;
  const FeasibleSetSpec* feasible = nullptr;
  double eta = 1.0;
  bool enforce_constraints = true;
  OmdOptions options;
};

enum class OmdStatus { kSolved, kInfeasible };

struct OmdResult {
  OmdStatus status = OmdStatus::kInfeasible;
  OccupancyMeasure q;
  /// eta * loss^T q + B(q || anchor).
  double objective = 0.0;
  /// max_i c_i^T q (or the smallest achievable value when infeasible).
  double max_constraint = -std::numeric_limits<double>::infinity();
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::vector<double> multipliers;
};

/// Mixes `anchor` with a tiny uniform component if any triple underflowed.
inline OccupancyMeasure smooth_anchor(const OccupancyMeasure& anchor, double floor = 1e-12) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : anchor.values()) smallest = std::min(smallest, v);
  if (smallest >= floor) return anchor;
  const OccupancyMeasure u = OccupancyMeasure::uniform(anchor.layout());
  std::vector<double> mixed(anchor.values().size());
  for (std::size_t j = 0; j < mixed.size(); ++j)
    mixed[j] = (1.0 - floor) * std::max(0.0, anchor.values()[j]) + floor * u.values()[j];
  return OccupancyMeasure(anchor.layout(), std::move(mixed));
}

/// Smallest achievable max_i c_i^T q over Delta(P); nullopt if Delta(P) itself
/// is empty.
inline std::optional<double> min_max_constraint(const PolyhedralSet& box,
                                                const std::vector<Eigen::VectorXd>& rows) {
  const Eigen::Index n = box.num_vars();
  double shift = 1.0;
  for (const auto& r : rows) shift += r.cwiseAbs().sum();
  // Variables [q | tau'] with tau = tau' - shift; minimize tau.
  PolyhedralSet lp;
  lp.eq = Eigen::MatrixXd::Zero(box.eq.rows(), n + 1);
  lp.eq.leftCols(n) = box.eq;
  lp.eq_rhs = box.eq_rhs;
  lp.ineq = Eigen::MatrixXd::Zero(box.ineq.rows() + static_cast<Eigen::Index>(rows.size()), n + 1);
  lp.ineq.topLeftCorner(box.ineq.rows(), n) = box.ineq;
  lp.ineq_rhs = Eigen::VectorXd::Zero(lp.ineq.rows());
  lp.ineq_rhs.head(box.ineq.rows()) = box.ineq_rhs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index r = box.ineq.rows() + static_cast<Eigen::Index>(i);
    lp.ineq.row(r).head(n) = rows[i].transpose();
    lp.ineq(r, n) = -1.0;
    lp.ineq_rhs(r) = -shift;
  }
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(n + 1);
  objective(n) = -1.0;
  const LpResult res = solve_lp(objective, lp);
  if (res.status != LpStatus::kOptimal) return std::nullopt;
  return res.x(n) - shift;
}

inline OmdResult solve_omd_step(const OmdProblem& problem) {
  if (problem.feasible == nullptr) throw StructuralError("OMD problem without feasible set");
  const FeasibleSetSpec& spec = *problem.feasible;
  const Layout& layout = problem.anchor.layout();
  if (!(spec.model.layout() == layout)) throw StructuralError("feasible set layout mismatch");
  if (problem.loss.size() != layout.num_pairs()) throw StructuralError("loss vector size");
  if (!(problem.eta > 0.0)) throw ParameterError("eta must be positive");

  const OmdOptions& opt = problem.options;
  const OccupancyMeasure anchor = smooth_anchor(problem.anchor);
  const Eigen::VectorXd p = to_eigen(anchor.values());
  PolyhedralSet set = box_occupancy_polytope(spec.model);
  const Eigen::Index box_rows = set.ineq.rows();

  OmdResult result;
  std::vector<Eigen::VectorXd> constraint_rows;
  if (problem.enforce_constraints) {
    for (const auto& c : spec.shifted) constraint_rows.push_back(lift_to_triples(layout, c));
  }

  if (!constraint_rows.empty()) {
    // The anchor itself certifies feasibility in the common case.
    bool anchor_ok = box_rows == 0 || (set.ineq * p - set.ineq_rhs).maxCoeff() <= 0.0;
    for (const auto& r : constraint_rows) anchor_ok = anchor_ok && r.dot(p) <= 0.0;
    if (!anchor_ok) {
      const auto best = min_max_constraint(set, constraint_rows);
      if (!best || *best > opt.tol_feas) {
        result.status = OmdStatus::kInfeasible;
        result.max_constraint = best.value_or(std::numeric_limits<double>::infinity());
        result.q = anchor;
        return result;
      }
    }
    for (const auto& r : constraint_rows) set.add_inequality(r, 0.0);
  }

  const Eigen::VectorXd linear = problem.eta * lift_to_triples(layout, problem.loss);
  EntropicOptions eopt;
  eopt.max_iterations = opt.max_iterations;
  const double tol_obj =
      opt.tol_obj < 0.0 ? 1e-6 * static_cast<double>(layout.num_layers()) : opt.tol_obj;
  eopt.tol_gap = std::min(eopt.tol_gap, tol_obj);
  const EntropicSolution sol = solve_entropic(linear, p, set, eopt);

  result.status = OmdStatus::kSolved;
  result.q = OccupancyMeasure(layout, to_std(sol.q));
  result.objective = linear.dot(sol.q) + bregman(result.q, anchor);
  result.primal_residual = sol.primal_residual;
  result.dual_residual = sol.dual_residual;
  result.gap = sol.gap;
  result.iterations = sol.iterations;
  if (!constraint_rows.empty()) {
    result.max_constraint = spec.max_constraint(result.q.pair_marginals());
    for (std::size_t i = 0; i < constraint_rows.size(); ++i)
      result.multipliers.push_back(sol.ineq_duals(box_rows + static_cast<Eigen::Index>(i)));
  }
  if (opt.debug) {
    nlohmann::json j;
    j["iterations"] = result.iterations;
    j["objective"] = result.objective;
    j["primal_residual"] = result.primal_residual;
    j["dual_residual"] = result.dual_residual;
    j["gap"] = result.gap;
    j["max_constraint"] = constraint_rows.empty() ? nlohmann::json(nullptr)
                                                  : nlohmann::json(result.max_constraint);
    j["multipliers"] = result.multipliers;
    j["objective_trace"] = sol.objective_trace;
    *opt.debug << j.dump() << '\n';
  }
  return result;
}

}  // namespace wcops
