// Copyright 2026 The KKT-Net Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "kktnet/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace kktnet {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kDegenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

// Solves the 2×2 system with one step of iterative refinement so that the
// active rows and the stationarity equations hold to a few ulps.
Eigen::Vector2d solve2(const Eigen::Matrix2d& m, const Eigen::Vector2d& rhs) {
  const Eigen::FullPivLU<Eigen::Matrix2d> lu(m);
  Eigen::Vector2d z = lu.solve(rhs);
  z += lu.solve(rhs - m * z);
  return z;
}

bool lex_less(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
}

}  // namespace

SolveOutcome solve_lp(const ProblemInstance& inst, const OracleTolerances& tol) {
  inst.validate();
  if (inst.num_vars() != 2 || !inst.is_lp()) {
    throw Error(ErrorCode::kUnsupportedShape,
                "solve_lp handles two-variable LPs without equalities");
  }
  const Eigen::MatrixXd& a = inst.ineq_matrix;
  const Eigen::VectorXd& b = inst.ineq_rhs;
  const Eigen::Vector2d c = inst.linear;
  const int m = static_cast<int>(a.rows());

  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double det_floor = tol.singular_det * scale * scale;

  bool any_vertex = false;
  bool any_feasible = false;
  SolveOutcome best;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_x;

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Eigen::Matrix2d active;
      active.row(0) = a.row(i);
      active.row(1) = a.row(j);
      const double det = active.determinant();
      if (!(std::abs(det) > det_floor) || det == 0.0) continue;
      any_vertex = true;

      const Eigen::Vector2d x = solve2(active, Eigen::Vector2d(b(i), b(j)));
      if (((a * x - b).array() > tol.feasibility).any()) continue;
      any_feasible = true;

      const Eigen::Vector2d lam_active = solve2(active.transpose(), -c);
      if ((lam_active.array() < -tol.dual_sign).any()) continue;

      const double value = c.dot(x);
      const bool better =
          value < best_value - tol.tie ||
          (std::abs(value - best_value) <= tol.tie && lex_less(x, best_x));
      if (!best.point || better) {
        KktPoint pt{x, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(0)};
        // Duals within the sign tolerance are rounded to exactly zero.
        pt.lambda(i) = std::max(lam_active(0), 0.0);
        pt.lambda(j) = std::max(lam_active(1), 0.0);
        best.status = SolveStatus::kOptimal;
        best.point = std::move(pt);
        best.active_set = {i, j};
        best_value = value;
        best_x = x;
      }
    }
  }

  if (best.point) return best;
  SolveOutcome out;
  if (!any_vertex) {
    out.status = SolveStatus::kDegenerate;
  } else if (!any_feasible) {
    out.status = SolveStatus::kInfeasible;
  } else {
    out.status = SolveStatus::kUnbounded;
  }
  return out;
}

KktReport verify_kkt(const ProblemInstance& inst, const KktPoint& pt,
                     double tol) {
  if (!pt.matches(inst)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "KKT point does not match problem dimensions");
  }
  double worst = 0.0;
  const Eigen::VectorXd slack = inst.ineq_matrix * pt.x - inst.ineq_rhs;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    worst = std::max({worst, std::max(0.0, slack(i)),
                      std::max(0.0, -pt.lambda(i)),
                      std::abs(pt.lambda(i) * slack(i))});
  }
  if (inst.num_equalities() > 0) {
    worst = std::max(
        worst, (inst.eq_matrix * pt.x - inst.eq_rhs).cwiseAbs().maxCoeff());
  }
  worst = std::max(worst,
                   stationarity_residual(inst, pt).cwiseAbs().maxCoeff());
  return {worst, worst <= tol};
}

bool accept_instance(const ProblemInstance& inst,
                     const AcceptanceFilter& filter) {
  if (inst.num_vars() != 2 || !inst.is_lp()) return false;
  const SolveOutcome out = solve_lp(inst);
  if (out.status != SolveStatus::kOptimal) return false;

  const Eigen::MatrixXd& a = inst.ineq_matrix;
  if (a.rows() == 2) {
    const double scale = a.cwiseAbs().maxCoeff();
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (!(std::abs(det) >= filter.min_rel_det * scale * scale)) return false;
  } else {
    // Non-square systems: condition the active pair instead.
    Eigen::Matrix2d active;
    active.row(0) = a.row(out.active_set[0]);
    active.row(1) = a.row(out.active_set[1]);
    const double scale = active.cwiseAbs().maxCoeff();
    if (!(std::abs(active.determinant()) >= filter.min_rel_det * scale * scale)) {
      return false;
    }
  }
  const KktPoint& pt = *out.point;
  for (int row : out.active_set) {
    if (!(pt.lambda(row) >= filter.min_dual)) return false;
  }
  return pt.x.cwiseAbs().maxCoeff() <= filter.max_primal;
}

}  // namespace kktnet
