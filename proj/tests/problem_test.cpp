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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "kktnet/lp_oracle.hpp"
#include "kktnet/problem.hpp"

namespace kktnet {
namespace {

constexpr LossWeights kPaperAlpha{0.1, 0.1, 0.2, 0.6, 0.0, 0.0};

ProblemInstance BoxLp() {
  return ProblemInstance::lp(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 1),
                             Eigen::Vector2d(-1, -1));
}

KktPoint Point(std::vector<double> x, std::vector<double> lambda,
               std::vector<double> nu = {}) {
  auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
  };
  return {vec(x), vec(lambda), vec(nu)};
}

ProblemInstance RandomLp(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  Eigen::Vector2d c;
  for (int i = 0; i < m; ++i) {
    a(i, 0) = u(rng);
    a(i, 1) = u(rng);
    b(i) = u(rng);
  }
  c << u(rng), u(rng);
  return ProblemInstance::lp(a, b, c);
}

// Plain-loop evaluation of the four residual losses, written without Eigen
// expressions so it checks the library arithmetic independently.
std::array<double, 4> ScriptedLosses(const double a[2][2], const double b[2],
                                     const double c[2], const double x[2],
                                     const double lam[2]) {
  double pf = 0, df = 0, cs = 0;
  for (int i = 0; i < 2; ++i) {
    const double f = a[i][0] * x[0] + a[i][1] * x[1] - b[i];
    pf += f > 0 ? f * f : 0;
    df += lam[i] < 0 ? lam[i] * lam[i] : 0;
    cs += (lam[i] * f) * (lam[i] * f);
  }
  double s = 0;
  for (int j = 0; j < 2; ++j) {
    const double g = c[j] + a[0][j] * lam[0] + a[1][j] * lam[1];
    s += g * g;
  }
  return {pf / 2, df / 2, cs / 2, s / 2};
}

TEST(NormalizeTest, UnitScaleIsUnchanged) {
  const auto n = normalize(BoxLp());
  EXPECT_EQ(n.theta, 1.0);
  EXPECT_EQ(n.instance, BoxLp());
}

TEST(NormalizeTest, DividesEveryBlockByMaxAbs) {
  Eigen::Matrix2d a;
  a << 2, 0, 0, 4;
  const auto raw = ProblemInstance::lp(a, Eigen::Vector2d(4, 4), Eigen::Vector2d(-2, -2));
  const auto n = normalize(raw);
  EXPECT_EQ(n.theta, 4.0);
  Eigen::Matrix2d expect_a;
  expect_a << 0.5, 0, 0, 1;
  EXPECT_TRUE(identical(n.instance.ineq_matrix, expect_a));
  EXPECT_TRUE(identical(n.instance.ineq_rhs, Eigen::VectorXd(Eigen::Vector2d(1, 1))));
  EXPECT_TRUE(identical(n.instance.linear, Eigen::VectorXd(Eigen::Vector2d(-0.5, -0.5))));

  // The optimum does not move under the uniform scaling.
  const auto before = solve_lp(raw);
  const auto after = solve_lp(n.instance);
  ASSERT_EQ(before.status, SolveStatus::kOptimal);
  ASSERT_EQ(after.status, SolveStatus::kOptimal);
  EXPECT_TRUE(before.point->x.isApprox(after.point->x, 1e-15));
  EXPECT_TRUE(before.point->lambda.isApprox(after.point->lambda, 1e-15));
  EXPECT_TRUE(after.point->x.isApprox(Eigen::Vector2d(2, 1)));
  EXPECT_TRUE(after.point->lambda.isApprox(Eigen::Vector2d(1, 0.5)));
}

TEST(NormalizeTest, AllZeroInstanceIsRejected) {
  const auto zero = ProblemInstance::lp(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero());
  try {
    normalize(zero);
    FAIL() << "expected AllZeroInstance";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllZeroInstance);
  }
}

TEST(NormalizeTest, CoversQpBlocksAndIsIdempotent) {
  ProblemInstance qp;
  qp.quadratic = Eigen::Matrix2d{{2, -7}, {-7, 3}};
  qp.linear = Eigen::Vector2d(1, 1);
  qp.constant = 0.5;
  qp.ineq_matrix = Eigen::MatrixXd{{1, 2}};
  qp.ineq_rhs = Eigen::VectorXd::Constant(1, 3);
  qp.eq_matrix = Eigen::MatrixXd{{1, 1}};
  qp.eq_rhs = Eigen::VectorXd::Constant(1, -1);
  qp.validate();
  const auto n = normalize(qp);
  EXPECT_EQ(n.theta, 7.0);
  EXPECT_EQ(max_abs_entry(n.instance), 1.0);
  EXPECT_EQ(normalize(n.instance).theta, 1.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto raw = RandomLp(rng, 2);
    raw.ineq_matrix *= u(rng);
    raw.linear *= u(rng);
    const auto once = normalize(raw);
    EXPECT_EQ(max_abs_entry(once.instance), 1.0);
    EXPECT_EQ(normalize(once.instance).theta, 1.0);
  }
}

TEST(ProblemInstanceTest, ValidationCatchesBadShapes) {
  ProblemInstance bad = BoxLp();
  bad.ineq_rhs = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(bad.validate(), Error);
  ProblemInstance asym = BoxLp();
  asym.quadratic(0, 1) = 1.0;
  EXPECT_THROW(asym.validate(), Error);
  ProblemInstance nan = BoxLp();
  nan.linear(0) = std::nan("");
  EXPECT_THROW(nan.validate(), Error);
}

TEST(KktResidualLossesTest, ZeroPointOnBox) {
  const auto t = kkt_residual_losses(BoxLp(), Point({0, 0}, {0, 0}));
  EXPECT_EQ(t.primal_feasibility, 0.0);
  EXPECT_EQ(t.dual_feasibility, 0.0);
  EXPECT_EQ(t.complementary_slackness, 0.0);
  EXPECT_EQ(t.stationarity, 1.0);
}

TEST(KktResidualLossesTest, InfeasiblePointOnBox) {
  const double a[2][2] = {{1, 0}, {0, 1}};
  const double b[2] = {1, 1}, c[2] = {-1, -1}, x[2] = {2, 2}, lam[2] = {-1, 0.5};
  const auto scripted = ScriptedLosses(a, b, c, x, lam);
  const auto t = kkt_residual_losses(BoxLp(), Point({2, 2}, {-1, 0.5}));
  EXPECT_NEAR(t.primal_feasibility, 1.0, 1e-12);
  EXPECT_NEAR(t.dual_feasibility, 0.5, 1e-12);
  EXPECT_NEAR(t.complementary_slackness, 0.625, 1e-12);
  EXPECT_NEAR(t.stationarity, 2.125, 1e-12);
  EXPECT_NEAR(t.primal_feasibility, scripted[0], 1e-15);
  EXPECT_NEAR(t.dual_feasibility, scripted[1], 1e-15);
  EXPECT_NEAR(t.complementary_slackness, scripted[2], 1e-15);
  EXPECT_NEAR(t.stationarity, scripted[3], 1e-15);
}

TEST(KktResidualLossesTest, MatchesScriptedEvaluationOnRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double a[2][2] = {{u(rng), u(rng)}, {u(rng), u(rng)}};
    const double b[2] = {u(rng), u(rng)}, c[2] = {u(rng), u(rng)};
    const double x[2] = {u(rng), u(rng)}, lam[2] = {u(rng), u(rng)};
    Eigen::Matrix2d am;
    am << a[0][0], a[0][1], a[1][0], a[1][1];
    const auto inst =
        ProblemInstance::lp(am, Eigen::Vector2d(b[0], b[1]), Eigen::Vector2d(c[0], c[1]));
    const auto t = kkt_residual_losses(inst, Point({x[0], x[1]}, {lam[0], lam[1]}));
    const auto s = ScriptedLosses(a, b, c, x, lam);
    EXPECT_NEAR(t.primal_feasibility, s[0], 1e-12);
    EXPECT_NEAR(t.dual_feasibility, s[1], 1e-12);
    EXPECT_NEAR(t.complementary_slackness, s[2], 1e-12);
    EXPECT_NEAR(t.stationarity, s[3], 1e-12);
    EXPECT_GE(t.primal_feasibility, 0.0);
    EXPECT_GE(t.dual_feasibility, 0.0);
    EXPECT_GE(t.complementary_slackness, 0.0);
    EXPECT_GE(t.stationarity, 0.0);
  }
}

TEST(KktResidualLossesTest, OracleSolutionHasNoResidual) {
  const auto out = solve_lp(BoxLp());
  ASSERT_TRUE(out.point);
  const auto t = kkt_residual_losses(BoxLp(), *out.point);
  EXPECT_LT(t.primal_feasibility, 1e-16);
  EXPECT_LT(t.dual_feasibility, 1e-16);
  EXPECT_LT(t.complementary_slackness, 1e-16);
  EXPECT_LT(t.stationarity, 1e-16);
}

TEST(KktResidualLossesTest, NoInequalitiesGivesZeroInequalityTerms) {
  ProblemInstance unconstrained;
  unconstrained.quadratic = Eigen::Matrix2d::Identity();
  unconstrained.linear = Eigen::Vector2d(1, -1);
  unconstrained.ineq_matrix = Eigen::MatrixXd::Zero(0, 2);
  unconstrained.ineq_rhs = Eigen::VectorXd::Zero(0);
  unconstrained.eq_matrix = Eigen::MatrixXd::Zero(0, 2);
  unconstrained.eq_rhs = Eigen::VectorXd::Zero(0);
  const auto t = kkt_residual_losses(unconstrained, Point({-1, 1}, {}));
  EXPECT_EQ(t.primal_feasibility, 0.0);
  EXPECT_EQ(t.dual_feasibility, 0.0);
  EXPECT_EQ(t.complementary_slackness, 0.0);
  EXPECT_EQ(t.stationarity, 0.0);
}

TEST(KktResidualLossesTest, EqualityTermForQp) {
  // min ½‖x‖² s.t. x1 + x2 = 2: x* = (1, 1), ν* = -1.
  ProblemInstance qp;
  qp.quadratic = Eigen::Matrix2d::Identity();
  qp.linear = Eigen::Vector2d::Zero();
  qp.ineq_matrix = Eigen::MatrixXd::Zero(0, 2);
  qp.ineq_rhs = Eigen::VectorXd::Zero(0);
  qp.eq_matrix = Eigen::MatrixXd{{1, 1}};
  qp.eq_rhs = Eigen::VectorXd::Constant(1, 2);
  const auto opt = kkt_residual_losses(qp, Point({1, 1}, {}, {-1}));
  EXPECT_EQ(opt.stationarity, 0.0);
  EXPECT_EQ(opt.eq, 0.0);
  const auto off = kkt_residual_losses(qp, Point({0, 0}, {}, {0}));
  EXPECT_EQ(off.eq, 4.0);
  EXPECT_EQ(verify_kkt(qp, Point({1, 1}, {}, {-1}), 1e-12).pass, true);
  EXPECT_EQ(verify_kkt(qp, Point({0, 0}, {}, {0}), 1e-12).max_residual, 2.0);
}

TEST(KktResidualLossesTest, DimensionMismatchThrows) {
  try {
    kkt_residual_losses(BoxLp(), Point({0, 0, 0}, {0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(KktResidualLossesTest, ConstraintPermutationEquivariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = RandomLp(rng, 4);
    const KktPoint pt = Point({u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)});
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 4, rng);
    const auto permuted = ProblemInstance::lp(perm * inst.ineq_matrix,
                                              perm * inst.ineq_rhs, inst.linear);
    const KktPoint ppt{pt.x, perm * pt.lambda, pt.nu};
    const auto t0 = kkt_residual_losses(inst, pt);
    const auto t1 = kkt_residual_losses(permuted, ppt);
    EXPECT_NEAR(t0.primal_feasibility, t1.primal_feasibility, 1e-14);
    EXPECT_NEAR(t0.dual_feasibility, t1.dual_feasibility, 1e-14);
    EXPECT_NEAR(t0.complementary_slackness, t1.complementary_slackness, 1e-14);
    EXPECT_NEAR(t0.stationarity, t1.stationarity, 1e-14);
  }
}

TEST(KktLossTest, WeightedSums) {
  EXPECT_NEAR(kkt_loss(LossTerms{0, 0, 0, 1}, kPaperAlpha), 0.6, 1e-15);
  EXPECT_NEAR(kkt_loss(LossTerms{1, 0.5, 0.625, 2.125}, kPaperAlpha), 1.55, 1e-12);
  EXPECT_EQ(kkt_loss(LossTerms{1, 0.5, 0.625, 2.125}, LossWeights{}), 0.0);
}

TEST(KktLossTest, MonotoneInWeightsAndTerms) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    LossTerms t{u(rng), u(rng), u(rng), u(rng)};
    LossWeights w{u(rng), u(rng), u(rng), u(rng), 0, 0};
    const double base = kkt_loss(t, w);
    LossTerms t2 = t;
    t2.complementary_slackness += u(rng);
    LossWeights w2 = w;
    w2.primal_feasibility += u(rng);
    EXPECT_GE(kkt_loss(t2, w), base);
    EXPECT_GE(kkt_loss(t, w2), base);
  }
}

TEST(KktLossGradientTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const LossWeights w{0.3, 0.7, 0.5, 1.1, 0.0, 0.9};
  for (int trial = 0; trial < 200; ++trial) {
    ProblemInstance inst = RandomLp(rng, 3);
    Eigen::Matrix2d r{{u(rng), u(rng)}, {u(rng), u(rng)}};
    inst.quadratic = r * r.transpose();
    inst.eq_matrix = Eigen::MatrixXd{{u(rng), u(rng)}};
    inst.eq_rhs = Eigen::VectorXd::Constant(1, u(rng));
    const KktPoint pt = Point({u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng)});
    const KktPoint g = kkt_loss_gradient(inst, pt, w);
    const Eigen::VectorXd y = pt.stacked();
    const Eigen::VectorXd gy = g.stacked();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double h = 1e-6;
      Eigen::VectorXd up = y, down = y;
      up(i) += h;
      down(i) -= h;
      auto eval = [&](const Eigen::VectorXd& v) {
        return kkt_loss(kkt_residual_losses(
                            inst, KktPoint{v.head(2), v.segment(2, 3), v.tail(1)}),
                        w);
      };
      const double fd = (eval(up) - eval(down)) / (2 * h);
      EXPECT_NEAR(gy(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(DataLossTest, Examples) {
  const std::vector<KktPoint> truth{Point({1, 1}, {1, 1})};
  const std::vector<KktPoint> zero{Point({0, 0}, {0, 0})};
  EXPECT_EQ(data_loss<double>(zero, truth), 4.0);
  EXPECT_EQ(data_loss<double>(truth, truth), 0.0);

  const std::vector<KktPoint> pair_truth{Point({2, 0}, {0, 0}), Point({1, 1}, {0, 0})};
  const std::vector<KktPoint> pair_pred{Point({0, 0}, {0, 0}), Point({0, 0}, {0, 0})};
  EXPECT_EQ(data_loss<double>(pair_pred, pair_truth), 3.0);
}

TEST(DataLossTest, ErrorsAndSymmetry) {
  const std::vector<KktPoint> empty;
  EXPECT_THROW(data_loss<double>(empty, empty), Error);
  const std::vector<KktPoint> a{Point({1, 2}, {3, 4})};
  const std::vector<KktPoint> b{Point({1, 2}, {3})};
  try {
    data_loss<double>(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<KktPoint> p, q;
    for (int k = 0; k < 5; ++k) {
      p.push_back(Point({u(rng), u(rng)}, {u(rng), u(rng)}));
      q.push_back(Point({u(rng), u(rng)}, {u(rng), u(rng)}));
    }
    EXPECT_EQ(data_loss<double>(p, q), data_loss<double>(q, p));
    EXPECT_GT(data_loss<double>(p, q), 0.0);
  }
}

TEST(CombinedLossTest, ReducesToKktOrData) {
  const std::vector<ProblemInstance> insts{BoxLp()};
  const std::vector<KktPoint> pred{Point({2, 2}, {-1, 0.5})};
  const std::vector<KktPoint> truth{Point({1, 1}, {1, 1})};
  EXPECT_NEAR(combined_loss<double>(insts, pred, std::nullopt, kPaperAlpha), 1.55, 1e-12);

  LossWeights data_only;
  data_only.data = 1.0;
  EXPECT_EQ(combined_loss<double>(insts, truth, std::span<const KktPoint>(truth), data_only),
            0.0);
  EXPECT_EQ(combined_loss<double>(insts, pred, std::span<const KktPoint>(truth), data_only),
            data_loss<double>(pred, truth));

  LossWeights both = kPaperAlpha;
  both.data = 1.0;
  EXPECT_NEAR(combined_loss<double>(insts, pred, std::span<const KktPoint>(truth), both),
              1.55 + data_loss<double>(pred, truth), 1e-12);
}

TEST(CombinedLossTest, MissingGroundTruth) {
  const std::vector<ProblemInstance> insts{BoxLp()};
  const std::vector<KktPoint> pred{Point({0, 0}, {0, 0})};
  LossWeights w;
  w.data = 1.0;
  try {
    combined_loss<double>(insts, pred, std::nullopt, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
  }
}

}  // namespace
}  // namespace kktnet
