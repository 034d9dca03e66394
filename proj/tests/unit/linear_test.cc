/*
 * Copyright 2026 The Ablate Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ablate/error.h"
#include "ablate/linear.h"
#include "ablate/penalty.h"
#include "test_util.h"

namespace ablate {
namespace {

TEST(Ols, NoiselessLine) {
  const Dataset d = testing::MakeRegression(Eigen::MatrixXd(Eigen::Vector3d(1, 2, 3)),
                                            Eigen::Vector3d(2, 4, 6));
  const LinearModel m = FitOls(d);
  EXPECT_NEAR(m.beta[0], 2.0, 1e-12);
  EXPECT_NEAR(m.intercept, 0.0, 1e-12);
}

TEST(Ols, MatchesNormalEquationsWithIntercept) {
  const Eigen::MatrixXd x = testing::RandomMatrix(80, 3, 1);
  Eigen::VectorXd y = x * Eigen::Vector3d(1, -2, 0.5) + testing::RandomMatrix(80, 1, 2);
  y.array() += 4.0;
  const LinearModel m = FitOls(testing::MakeRegression(x, y));
  Eigen::MatrixXd a(80, 4);
  a << Eigen::VectorXd::Ones(80), x;
  const Eigen::VectorXd ref = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  EXPECT_NEAR(m.intercept, ref[0], 1e-10);
  EXPECT_LT((m.beta - ref.tail(3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, DuplicateColumnIsSingular) {
  Eigen::MatrixXd x = testing::RandomMatrix(30, 3, 3);
  x.col(2) = x.col(0);
  try {
    FitOls(testing::MakeRegression(x, x.col(1)));
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    EXPECT_GT(e.condition(), kMaxCondition);
    EXPECT_FALSE(e.columns().empty());
  }
}

TEST(Ols, NeedsTwoRows) {
  EXPECT_THROW(FitOls(testing::MakeRegression(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1))),
               InvalidArgument);
}

TEST(Ccp, ZeroLambdaIsOls) {
  const Dataset d = testing::Correlated(100, 4, 0.5, {1, 2, 3, 4}, 1.0, 5);
  const LinearModel ols = FitOls(d);
  const RegularizedFit ccp = FitCcp(d, 0.0);
  EXPECT_LT((ccp.model.beta - ols.beta).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(ccp.penalty_kind, PenaltyKind::kCcp);
}

TEST(Ccp, InterceptFromMeans) {
  Dataset d = testing::Correlated(100, 3, 0.3, {1, -1, 2}, 1.0, 6);
  d.features.array() += 3.0;
  d.response.array() += 5.0;
  const RegularizedFit fit = FitCcp(d, 0.4);
  const double expected = d.response.mean() - d.features.colwise().mean().dot(fit.model.beta);
  EXPECT_NEAR(fit.model.intercept, expected, 1e-10);
}

TEST(Ccp, StationaryPointOfObjective) {
  const Dataset d = testing::Correlated(200, 3, 0.6, {1, 2, -1}, 1.0, 7);
  for (double lambda : {0.2, 0.5, 0.8}) {
    const RegularizedFit fit = FitCcp(d, lambda);
    EXPECT_NEAR(fit.objective_value, CcpObjective(d, fit.model.beta, lambda), 1e-8);
    const double h = 1e-5;
    for (Eigen::Index j = 0; j < 3; ++j) {
      Eigen::VectorXd up = fit.model.beta, down = fit.model.beta;
      up[j] += h;
      down[j] -= h;
      const double grad = (CcpObjective(d, up, lambda) - CcpObjective(d, down, lambda)) / (2 * h);
      EXPECT_NEAR(grad, 0.0, 1e-4 * d.response.squaredNorm());
      EXPECT_GT(CcpObjective(d, up, lambda), fit.objective_value);
    }
  }
}

TEST(Ccp, ObjectiveMatrixFormMatchesPairwise) {
  const Dataset d = testing::Correlated(60, 4, 0.4, {1, 1, 1, 1}, 1.0, 8);
  const Eigen::Vector4d beta(0.5, -1.0, 2.0, 0.1);
  const Eigen::MatrixXd xc = d.features.rowwise() - d.features.colwise().mean();
  const Eigen::VectorXd yc = d.response.array() - d.response.mean();
  const double lambda = 0.3;
  const double expected =
      (yc - xc * beta).squaredNorm() + lambda * CcpMatrixForm(beta, d.features);
  EXPECT_NEAR(CcpObjective(d, beta, lambda), expected, 1e-9);
}

TEST(Ccp, CorrelatedCoefficientGapShrinks) {
  const Dataset d = testing::Correlated(5000, 2, 0.95, {2.0, 0.0}, 1.0, 9);
  const LinearModel ols = FitOls(d);
  const RegularizedFit ccp = FitCcp(d, 0.999);
  const double ols_gap = std::abs(ols.beta[0] - ols.beta[1]);
  const double ccp_gap = std::abs(ccp.model.beta[0] - ccp.model.beta[1]);
  EXPECT_GT(ols_gap, 1.0);
  EXPECT_LE(ccp_gap, 0.1 * ols_gap);
}

TEST(Ccp, NearOneApproachesMarginalSlopes) {
  const Dataset d = testing::Correlated(500, 3, 0.7, {1, -2, 3}, 1.0, 10);
  const CenteredMoments m = ComputeCenteredMoments(d.features, d.response);
  const Eigen::VectorXd slopes = m.cross.cwiseQuotient(m.gram.diagonal());
  const RegularizedFit fit = FitCcp(d, 0.999999);
  EXPECT_LT((fit.model.beta - slopes).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Ccp, LambdaRange) {
  const Dataset d = testing::Correlated(50, 2, 0.0, {1, 1}, 1.0, 11);
  EXPECT_THROW(FitCcp(d, 1.0), InvalidArgument);
  EXPECT_THROW(FitCcp(d, -0.5), InvalidArgument);
  EXPECT_THROW(FitMl2p(d, 1.0), InvalidArgument);
}

TEST(Ml2p, ZeroLambdaIsOls) {
  const Dataset d = testing::Correlated(100, 3, 0.2, {1, 2, 3}, 1.0, 12);
  EXPECT_LT((FitMl2p(d, 0.0).model.beta - FitOls(d).beta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ml2p, PenaltyShrinksMonotonically) {
  Dataset d = testing::Correlated(300, 3, 0.5, {1, -2, 3}, 1.0, 13);
  d.features.col(1).array() += 2.0;
  const FeatureStats stats = ComputeFeatureStats(d.features);
  double previous = Ml2p(FitOls(d).beta, stats);
  for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double current = Ml2p(FitMl2p(d, lambda).model.beta, stats);
    EXPECT_LT(current, previous) << "lambda " << lambda;
    previous = current;
  }
}

TEST(Ml2p, GradientDescentAgrees) {
  Dataset d = testing::Correlated(200, 3, 0.5, {1, 2, -1}, 1.0, 14);
  d.features.col(0).array() += 1.5;
  const double lambda = 0.4;
  const RegularizedFit fit = FitMl2p(d, lambda);
  const CenteredMoments m = ComputeCenteredMoments(d.features, d.response);
  const Eigen::MatrixXd system = Ml2pSystem(m, lambda);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
  const double step = 1.0 / system.eigenvalues().real().maxCoeff();
  for (int it = 0; it < 20000; ++it) beta -= step * (system * beta - m.cross);
  EXPECT_LT((beta - fit.model.beta).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(Ml2pObjective(d, beta, lambda), fit.objective_value,
              1e-4 * std::abs(fit.objective_value));
}

TEST(Ml2p, SystemMatchesDefinition) {
  const Dataset d = testing::Correlated(40, 2, 0.3, {1, 1}, 1.0, 15);
  const CenteredMoments m = ComputeCenteredMoments(d.features, d.response);
  const double lambda = 0.25;
  const Eigen::VectorXd diag =
      m.Variances().array() + m.feature_means.array().square();
  const Eigen::MatrixXd expected =
      m.gram + (40.0 * lambda / (1.0 - lambda)) * Eigen::MatrixXd(diag.asDiagonal());
  EXPECT_LT((Ml2pSystem(m, lambda) - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Moments, CenteredAndVariances) {
  const Eigen::MatrixXd x = testing::RandomMatrix(25, 2, 16);
  const Eigen::VectorXd y = testing::RandomMatrix(25, 1, 17);
  const CenteredMoments m = ComputeCenteredMoments(x, y);
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  EXPECT_LT((m.gram - xc.transpose() * xc).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((m.Variances() - ComputeFeatureStats(x).variances).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(m.n, 25u);
}

TEST(Predict, AddsIntercept) {
  LinearModel m{Eigen::Vector2d(1, -1), 0.5};
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, 3, 1;
  EXPECT_EQ(Predict(m, x), Eigen::Vector2d(-0.5, 2.5));
  EXPECT_THROW(Predict(m, Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
}

TEST(PenaltyKind, Names) {
  for (PenaltyKind k : {PenaltyKind::kNone, PenaltyKind::kCcp, PenaltyKind::kMl2p}) {
    EXPECT_EQ(ParsePenaltyKind(PenaltyKindName(k)), k);
  }
}

}  // namespace
}  // namespace ablate
