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

// Parameterized convex problems of the form
//
//   min  ½ xᵀPx + qᵀx + r
//   s.t. Gx ≤ h
//        Ax = b
//
// together with candidate primal/dual points and the squared KKT residual
// losses used to train a network against optimality conditions. Everything
// here is templated on the scalar type so the same code evaluates in double
// for training and in long double for finite-difference checks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "kktnet/error.hpp"

namespace kktnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Exact equality that tolerates differing shapes (Eigen asserts on them).
template <typename A, typename B>
bool identical(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || a.cwiseEqual(b).all());
}

/// A QP in standard form. An LP has a zero quadratic block, r = 0 and no
/// equality rows; its cost vector c lives in `linear`, its constraint pair
/// (A, b) in (`ineq_matrix`, `ineq_rhs`).
template <typename Scalar>
struct BasicProblemInstance {
  MatrixX<Scalar> quadratic;    // P, n×n symmetric
  VectorX<Scalar> linear;       // q
  Scalar constant{0};           // r
  MatrixX<Scalar> ineq_matrix;  // G, m×n
  VectorX<Scalar> ineq_rhs;     // h
  MatrixX<Scalar> eq_matrix;    // A, p×n
  VectorX<Scalar> eq_rhs;       // b

  Eigen::Index num_vars() const { return linear.size(); }
  Eigen::Index num_inequalities() const { return ineq_rhs.size(); }
  Eigen::Index num_equalities() const { return eq_rhs.size(); }

  bool is_lp() const {
    return quadratic.isZero(0) && constant == Scalar(0) &&
           num_equalities() == 0;
  }

  /// Builds min cᵀx s.t. Ax ≤ b.
  static BasicProblemInstance lp(MatrixX<Scalar> a, VectorX<Scalar> b,
                                 VectorX<Scalar> c) {
    BasicProblemInstance inst;
    const Eigen::Index n = c.size();
    inst.quadratic = MatrixX<Scalar>::Zero(n, n);
    inst.linear = std::move(c);
    inst.ineq_matrix = std::move(a);
    inst.ineq_rhs = std::move(b);
    inst.eq_matrix = MatrixX<Scalar>::Zero(0, n);
    inst.eq_rhs = VectorX<Scalar>::Zero(0);
    inst.validate();
    return inst;
  }

  /// Throws DimensionMismatch on inconsistent block shapes and
  /// InvalidArgument on non-finite entries or an asymmetric quadratic term.
  void validate() const {
    const Eigen::Index n = num_vars();
    if (n < 1) {
      throw Error(ErrorCode::kDimensionMismatch, "problem needs n >= 1");
    }
    if (quadratic.rows() != n || quadratic.cols() != n ||
        ineq_matrix.rows() != num_inequalities() || ineq_matrix.cols() != n ||
        eq_matrix.rows() != num_equalities() || eq_matrix.cols() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "inconsistent problem block shapes");
    }
    if (!quadratic.allFinite() || !linear.allFinite() ||
        !std::isfinite(static_cast<double>(constant)) ||
        !ineq_matrix.allFinite() || !ineq_rhs.allFinite() ||
        !eq_matrix.allFinite() || !eq_rhs.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite problem entry");
    }
    if (n > 0 &&
        (quadratic - quadratic.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  "quadratic term is not symmetric");
    }
  }

  template <typename Other>
  BasicProblemInstance<Other> cast() const {
    BasicProblemInstance<Other> out;
    out.quadratic = quadratic.template cast<Other>();
    out.linear = linear.template cast<Other>();
    out.constant = static_cast<Other>(constant);
    out.ineq_matrix = ineq_matrix.template cast<Other>();
    out.ineq_rhs = ineq_rhs.template cast<Other>();
    out.eq_matrix = eq_matrix.template cast<Other>();
    out.eq_rhs = eq_rhs.template cast<Other>();
    return out;
  }

  bool operator==(const BasicProblemInstance& o) const {
    return identical(quadratic, o.quadratic) && identical(linear, o.linear) &&
           constant == o.constant && identical(ineq_matrix, o.ineq_matrix) &&
           identical(ineq_rhs, o.ineq_rhs) && identical(eq_matrix, o.eq_matrix) &&
           identical(eq_rhs, o.eq_rhs);
  }
};

/// Candidate primal/dual variables. Negative inequality duals are allowed;
/// the dual feasibility loss penalizes them.
template <typename Scalar>
struct BasicKktPoint {
  VectorX<Scalar> x;
  VectorX<Scalar> lambda;
  VectorX<Scalar> nu;

  Eigen::Index size() const { return x.size() + lambda.size() + nu.size(); }

  /// (x, λ, ν) stacked into one vector.
  VectorX<Scalar> stacked() const {
    VectorX<Scalar> y(size());
    y << x, lambda, nu;
    return y;
  }

  bool matches(const BasicProblemInstance<Scalar>& inst) const {
    return x.size() == inst.num_vars() &&
           lambda.size() == inst.num_inequalities() &&
           nu.size() == inst.num_equalities();
  }

  bool operator==(const BasicKktPoint& o) const {
    return identical(x, o.x) && identical(lambda, o.lambda) &&
           identical(nu, o.nu);
  }
};

/// Unweighted squared KKT residuals. `eq` is the equality-feasibility
/// residual, zero whenever the problem has no equality rows.
template <typename Scalar>
struct BasicLossTerms {
  Scalar primal_feasibility{0};
  Scalar dual_feasibility{0};
  Scalar complementary_slackness{0};
  Scalar stationarity{0};
  Scalar eq{0};

  BasicLossTerms& operator+=(const BasicLossTerms& o) {
    primal_feasibility += o.primal_feasibility;
    dual_feasibility += o.dual_feasibility;
    complementary_slackness += o.complementary_slackness;
    stationarity += o.stationarity;
    eq += o.eq;
    return *this;
  }
  BasicLossTerms& operator*=(Scalar k) {
    primal_feasibility *= k;
    dual_feasibility *= k;
    complementary_slackness *= k;
    stationarity *= k;
    eq *= k;
    return *this;
  }
  BasicLossTerms& operator/=(Scalar d) {
    primal_feasibility /= d;
    dual_feasibility /= d;
    complementary_slackness /= d;
    stationarity /= d;
    eq /= d;
    return *this;
  }
  bool operator==(const BasicLossTerms&) const = default;
};

template <typename Scalar>
struct BasicLossWeights {
  Scalar primal_feasibility{0};
  Scalar dual_feasibility{0};
  Scalar complementary_slackness{0};
  Scalar stationarity{0};
  Scalar data{0};
  // Weight on the equality-feasibility term; zero keeps the four-term loss.
  Scalar eq{0};

  bool any_kkt() const {
    return primal_feasibility > 0 || dual_feasibility > 0 ||
           complementary_slackness > 0 || stationarity > 0 || eq > 0;
  }

  void validate() const {
    for (Scalar v : {primal_feasibility, dual_feasibility,
                     complementary_slackness, stationarity, data, eq}) {
      if (!(v >= 0) || !std::isfinite(static_cast<double>(v))) {
        throw Error(ErrorCode::kInvalidArgument,
                    "loss weights must be finite and non-negative");
      }
    }
  }

  template <typename Other>
  BasicLossWeights<Other> cast() const {
    return {static_cast<Other>(primal_feasibility),
            static_cast<Other>(dual_feasibility),
            static_cast<Other>(complementary_slackness),
            static_cast<Other>(stationarity), static_cast<Other>(data),
            static_cast<Other>(eq)};
  }

  bool operator==(const BasicLossWeights&) const = default;
};

using ProblemInstance = BasicProblemInstance<double>;
using KktPoint = BasicKktPoint<double>;
using LossTerms = BasicLossTerms<double>;
using LossWeights = BasicLossWeights<double>;

/// Network input for an instance: G row-major, then h, then q. For the
/// 2×2 LP that is A(4) ‖ b(2) ‖ c(2).
template <typename Scalar>
VectorX<Scalar> flatten_parameters(const BasicProblemInstance<Scalar>& inst) {
  const Eigen::Index m = inst.num_inequalities();
  const Eigen::Index n = inst.num_vars();
  VectorX<Scalar> v(m * n + m + n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) v(k++) = inst.ineq_matrix(i, j);
  }
  v.segment(k, m) = inst.ineq_rhs;
  v.segment(k + m, n) = inst.linear;
  return v;
}

template <typename Scalar>
struct Normalized {
  BasicProblemInstance<Scalar> instance;
  Scalar theta;
};

/// Largest absolute entry over every parameter block.
template <typename Scalar>
Scalar max_abs_entry(const BasicProblemInstance<Scalar>& inst) {
  using std::abs;
  Scalar m = abs(inst.constant);
  auto fold = [&m](const auto& block) {
    if (block.size() > 0) m = std::max<Scalar>(m, block.cwiseAbs().maxCoeff());
  };
  fold(inst.quadratic);
  fold(inst.linear);
  fold(inst.ineq_matrix);
  fold(inst.ineq_rhs);
  fold(inst.eq_matrix);
  fold(inst.eq_rhs);
  return m;
}

/// Divides every block by Θ, the global max-abs entry.
template <typename Scalar>
Normalized<Scalar> normalize(const BasicProblemInstance<Scalar>& inst) {
  const Scalar theta = max_abs_entry(inst);
  if (!(theta > 0)) {
    throw Error(ErrorCode::kAllZeroInstance, "every problem entry is zero");
  }
  Normalized<Scalar> out{inst, theta};
  BasicProblemInstance<Scalar>& s = out.instance;
  s.quadratic /= theta;
  s.linear /= theta;
  s.constant /= theta;
  s.ineq_matrix /= theta;
  s.ineq_rhs /= theta;
  s.eq_matrix /= theta;
  s.eq_rhs /= theta;
  return out;
}

namespace detail {

template <typename Scalar>
void check_dims(const BasicProblemInstance<Scalar>& inst,
                const BasicKktPoint<Scalar>& pt) {
  if (!pt.matches(inst)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "KKT point does not match problem dimensions");
  }
}

template <typename Scalar>
Scalar hinge(Scalar z) {
  return z > Scalar(0) ? z : Scalar(0);
}

}  // namespace detail

/// Stationarity residual ∇ₓL = Px + q + Gᵀλ + Aᵀν.
template <typename Scalar>
VectorX<Scalar> stationarity_residual(const BasicProblemInstance<Scalar>& inst,
                                      const BasicKktPoint<Scalar>& pt) {
  detail::check_dims(inst, pt);
  return inst.quadratic * pt.x + inst.linear +
         inst.ineq_matrix.transpose() * pt.lambda +
         inst.eq_matrix.transpose() * pt.nu;
}

/// Squared KKT residuals averaged per constraint (1/m) or per variable
/// (1/n). With m = 0 the three inequality terms are zero.
template <typename Scalar>
BasicLossTerms<Scalar> kkt_residual_losses(
    const BasicProblemInstance<Scalar>& inst, const BasicKktPoint<Scalar>& pt) {
  detail::check_dims(inst, pt);
  BasicLossTerms<Scalar> t;
  const Eigen::Index m = inst.num_inequalities();
  if (m > 0) {
    const VectorX<Scalar> slack = inst.ineq_matrix * pt.x - inst.ineq_rhs;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar pf = detail::hinge(slack(i));
      const Scalar df = detail::hinge(-pt.lambda(i));
      const Scalar cs = pt.lambda(i) * slack(i);
      t.primal_feasibility += pf * pf;
      t.dual_feasibility += df * df;
      t.complementary_slackness += cs * cs;
    }
    t.primal_feasibility /= Scalar(m);
    t.dual_feasibility /= Scalar(m);
    t.complementary_slackness /= Scalar(m);
  }
  t.stationarity = stationarity_residual(inst, pt).squaredNorm() /
                   Scalar(inst.num_vars());
  const Eigen::Index p = inst.num_equalities();
  if (p > 0) {
    t.eq = (inst.eq_matrix * pt.x - inst.eq_rhs).squaredNorm() / Scalar(p);
  }
  return t;
}

template <typename Scalar>
Scalar kkt_loss(const BasicLossTerms<Scalar>& t,
                const BasicLossWeights<Scalar>& w) {
  return w.primal_feasibility * t.primal_feasibility +
         w.dual_feasibility * t.dual_feasibility +
         w.complementary_slackness * t.complementary_slackness +
         w.stationarity * t.stationarity + w.eq * t.eq;
}

/// Gradient of kkt_loss(kkt_residual_losses(inst, pt), w) with respect to
/// every component of pt. The hinge derivative is taken as 0 at the kink.
template <typename Scalar>
BasicKktPoint<Scalar> kkt_loss_gradient(const BasicProblemInstance<Scalar>& inst,
                                        const BasicKktPoint<Scalar>& pt,
                                        const BasicLossWeights<Scalar>& w) {
  detail::check_dims(inst, pt);
  const Eigen::Index n = inst.num_vars();
  const Eigen::Index m = inst.num_inequalities();
  const Eigen::Index p = inst.num_equalities();
  BasicKktPoint<Scalar> g{VectorX<Scalar>::Zero(n), VectorX<Scalar>::Zero(m),
                          VectorX<Scalar>::Zero(p)};

  if (m > 0) {
    const VectorX<Scalar> slack = inst.ineq_matrix * pt.x - inst.ineq_rhs;
    const Scalar two_over_m = Scalar(2) / Scalar(m);
    // dL/d(slack_i), then chain through slack = Gx - h.
    VectorX<Scalar> d_slack(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar lam = pt.lambda(i);
      d_slack(i) = two_over_m * (w.primal_feasibility * detail::hinge(slack(i)) +
                                 w.complementary_slackness * lam * lam * slack(i));
      g.lambda(i) = two_over_m *
                    (-w.dual_feasibility * detail::hinge(-lam) +
                     w.complementary_slackness * lam * slack(i) * slack(i));
    }
    g.x += inst.ineq_matrix.transpose() * d_slack;
  }

  const VectorX<Scalar> s = stationarity_residual(inst, pt);
  const VectorX<Scalar> d_s = (Scalar(2) * w.stationarity / Scalar(n)) * s;
  g.x += inst.quadratic.transpose() * d_s;
  g.lambda += inst.ineq_matrix * d_s;
  g.nu += inst.eq_matrix * d_s;

  if (p > 0) {
    const VectorX<Scalar> e = inst.eq_matrix * pt.x - inst.eq_rhs;
    g.x += (Scalar(2) * w.eq / Scalar(p)) * (inst.eq_matrix.transpose() * e);
  }
  return g;
}

/// Mean over the batch of ‖y* − ŷ‖², with y = (x, λ, ν).
template <typename Scalar>
Scalar data_loss(std::span<const BasicKktPoint<Scalar>> pred,
                 std::span<const BasicKktPoint<Scalar>> truth) {
  if (pred.empty()) throw Error(ErrorCode::kEmptyBatch, "data_loss");
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "batch sizes differ");
  }
  Scalar sum{0};
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (pred[k].x.size() != truth[k].x.size() ||
        pred[k].lambda.size() != truth[k].lambda.size() ||
        pred[k].nu.size() != truth[k].nu.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "prediction/truth shapes differ at index " +
                      std::to_string(k));
    }
    sum += (truth[k].x - pred[k].x).squaredNorm() +
           (truth[k].lambda - pred[k].lambda).squaredNorm() +
           (truth[k].nu - pred[k].nu).squaredNorm();
  }
  return sum / Scalar(pred.size());
}

template <typename Scalar>
struct CombinedLoss {
  Scalar total{0};
  Scalar kkt{0};   // batch mean of the weighted KKT loss
  Scalar data{0};  // unweighted data loss; 0 without ground truth
  BasicLossTerms<Scalar> terms;  // batch mean of each residual term
};

/// Batch mean of the weighted KKT loss plus β times the data loss. `truth`
/// may be absent only when the data weight is zero. When present, the data
/// loss is reported even if its weight is zero.
template <typename Scalar>
CombinedLoss<Scalar> combined_loss_terms(
    std::span<const BasicProblemInstance<Scalar>> insts,
    std::span<const BasicKktPoint<Scalar>> pred,
    std::optional<std::span<const BasicKktPoint<Scalar>>> truth,
    const BasicLossWeights<Scalar>& w) {
  if (insts.empty()) throw Error(ErrorCode::kEmptyBatch, "combined_loss");
  if (insts.size() != pred.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "batch sizes differ");
  }
  CombinedLoss<Scalar> out;
  for (std::size_t k = 0; k < insts.size(); ++k) {
    const auto t = kkt_residual_losses(insts[k], pred[k]);
    out.terms += t;
    out.kkt += kkt_loss(t, w);
  }
  const Scalar count(insts.size());
  out.terms /= count;
  out.kkt /= count;
  out.total = out.kkt;
  if (w.data > 0 && !truth) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "data loss weight is positive but no ground truth given");
  }
  if (truth) {
    out.data = data_loss(pred, *truth);
    if (w.data > 0) out.total += w.data * out.data;
  }
  return out;
}

template <typename Scalar>
Scalar combined_loss(
    std::span<const BasicProblemInstance<Scalar>> insts,
    std::span<const BasicKktPoint<Scalar>> pred,
    std::optional<std::span<const BasicKktPoint<Scalar>>> truth,
    const BasicLossWeights<Scalar>& w) {
  return combined_loss_terms(insts, pred, truth, w).total;
}

}  // namespace kktnet
