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

#pragma once

// Exact vertex-enumeration solver for two-variable LPs
//
//   min cᵀx  s.t.  Ax ≤ b,   A ∈ ℝ^{m×2}
//
// Every pair of constraint rows is intersected; feasible vertices whose
// active-pair stationarity system c + A_activeᵀλ = 0 has a non-negative
// solution are KKT points and therefore optimal.

#include <optional>
#include <string_view>
#include <vector>

#include "kktnet/problem.hpp"

namespace kktnet {

enum class SolveStatus { kOptimal, kUnbounded, kInfeasible, kDegenerate };

std::string_view to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kDegenerate;
  std::optional<KktPoint> point;  // present iff status == kOptimal
  std::vector<int> active_set;    // constraint rows defining the vertex
};

struct KktReport {
  double max_residual = 0.0;
  bool pass = false;
};

struct OracleTolerances {
  double feasibility = 1e-9;      // Ax ≤ b + feasibility
  double dual_sign = 1e-9;        // λ ≥ -dual_sign at a vertex
  double singular_det = 1e-9;     // |det| below this × scale² is singular
  double tie = 1e-12;             // objective ties broken lexicographically
};

/// Throws UnsupportedShape unless `inst` is an LP with n = 2.
SolveOutcome solve_lp(const ProblemInstance& inst,
                      const OracleTolerances& tol = {});

/// Max over all primal, dual, complementarity and stationarity violations.
KktReport verify_kkt(const ProblemInstance& inst, const KktPoint& pt,
                     double tol);

struct AcceptanceFilter {
  double min_rel_det = 1e-6;  // |det A| ≥ min_rel_det · max|A|²
  double min_dual = 1e-9;     // every λ*ᵢ ≥ min_dual
  double max_primal = 1e3;    // ‖x*‖∞ ≤ max_primal
};

/// Keeps only well-conditioned square LPs with a strictly positive dual at a
/// bounded optimum.
bool accept_instance(const ProblemInstance& inst,
                     const AcceptanceFilter& filter = {});

}  // namespace kktnet
