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

#include "ablate/linear.h"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ablate/augment.h"
#include "ablate/error.h"

namespace ablate {

namespace {

void RequireEncoded(const Dataset& data) {
  if (data.HasCategorical()) {
    throw DataError("linear solvers require one-hot encoded data");
  }
  if (data.rows() < 2) throw InvalidArgument("linear fit needs at least 2 rows");
}

LinearModel WithIntercept(const CenteredMoments& moments, Eigen::VectorXd beta) {
  LinearModel model;
  model.intercept = moments.response_mean - moments.feature_means.dot(beta);
  model.beta = std::move(beta);
  return model;
}

double ResidualSumOfSquares(const Dataset& data, const Eigen::VectorXd& beta) {
  const Eigen::RowVectorXd means = data.features.colwise().mean();
  const Eigen::VectorXd yc = data.response.array() - data.response.mean();
  const Eigen::VectorXd r = yc - (data.features.rowwise() - means) * beta;
  return r.squaredNorm();
}

}  // namespace

const char* PenaltyKindName(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kNone:
      return "ols";
    case PenaltyKind::kCcp:
      return "ccp";
    case PenaltyKind::kMl2p:
      return "ml2p";
  }
  return "ols";
}

PenaltyKind ParsePenaltyKind(const std::string& name) {
  if (name == "ols" || name == "none") return PenaltyKind::kNone;
  if (name == "ccp") return PenaltyKind::kCcp;
  if (name == "ml2p") return PenaltyKind::kMl2p;
  throw InvalidArgument("unknown method '" + name + "' (expected ols, ccp, ml2p)");
}

Eigen::VectorXd CenteredMoments::Variances() const {
  return gram.diagonal() / static_cast<double>(n);
}

CenteredMoments ComputeCenteredMoments(const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& response) {
  if (features.rows() != response.size()) {
    throw InvalidArgument("response length does not match feature row count");
  }
  CenteredMoments m;
  m.n = static_cast<std::size_t>(features.rows());
  m.feature_means = features.colwise().mean().transpose();
  m.response_mean = response.mean();
  const Eigen::MatrixXd xc = features.rowwise() - m.feature_means.transpose();
  const Eigen::VectorXd yc = response.array() - m.response_mean;
  m.gram = xc.transpose() * xc;
  m.cross = xc.transpose() * yc;
  return m;
}

Eigen::VectorXd SolveSymmetricSystem(const Eigen::MatrixXd& system,
                                     const Eigen::VectorXd& rhs,
                                     const std::string& what) {
  const Eigen::MatrixXd sym = 0.5 * (system + system.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd abs_eig = eig.eigenvalues().cwiseAbs();
  const double largest = abs_eig.size() ? abs_eig.maxCoeff() : 0.0;
  const double smallest = abs_eig.size() ? abs_eig.minCoeff() : 0.0;
  const double condition = smallest > 0.0
                               ? largest / smallest
                               : std::numeric_limits<double>::infinity();

  if (!(condition <= kMaxCondition) || largest == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(sym);
    rank_qr.setThreshold(1.0 / kMaxCondition);
    std::vector<std::size_t> columns;
    const auto& perm = rank_qr.colsPermutation().indices();
    for (Eigen::Index i = rank_qr.rank(); i < perm.size(); ++i) {
      columns.push_back(static_cast<std::size_t>(perm[i]));
    }
    std::string message = what + ": system is singular or ill-conditioned "
                                 "(condition estimate " +
                          std::to_string(condition) + ")";
    if (!columns.empty()) {
      message += "; dependent columns:";
      for (std::size_t c : columns) message += " " + std::to_string(c);
    }
    throw SingularSystemError(message, std::move(columns), condition);
  }
  return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(sym).solve(rhs);
}

LinearModel FitOlsFromMoments(const CenteredMoments& moments) {
  return WithIntercept(moments,
                       SolveSymmetricSystem(moments.gram, moments.cross, "ols"));
}

LinearModel FitOls(const Dataset& data) {
  RequireEncoded(data);
  return FitOlsFromMoments(ComputeCenteredMoments(data.features, data.response));
}

Eigen::MatrixXd CcpSystem(const CenteredMoments& moments, double lambda) {
  const double n = static_cast<double>(moments.n);
  Eigen::MatrixXd system = (1.0 - lambda) * moments.gram;
  system.diagonal() += n * lambda * moments.Variances();
  return system;
}

Eigen::MatrixXd Ml2pSystem(const CenteredMoments& moments, double lambda) {
  const double n = static_cast<double>(moments.n);
  const Eigen::VectorXd second_moment =
      moments.Variances().array() + moments.feature_means.array().square();
  Eigen::MatrixXd system = moments.gram;
  system.diagonal() += n * (lambda / (1.0 - lambda)) * second_moment;
  return system;
}

RegularizedFit FitCcp(const Dataset& data, double lambda) {
  ValidateAblationRate(lambda);
  RequireEncoded(data);
  const CenteredMoments moments =
      ComputeCenteredMoments(data.features, data.response);
  RegularizedFit fit;
  fit.lambda = lambda;
  fit.penalty_kind = PenaltyKind::kCcp;
  fit.model = WithIntercept(
      moments,
      SolveSymmetricSystem(CcpSystem(moments, lambda), moments.cross, "ccp"));
  fit.objective_value = CcpObjective(data, fit.model.beta, lambda);
  return fit;
}

RegularizedFit FitMl2p(const Dataset& data, double lambda) {
  ValidateAblationRate(lambda);
  RequireEncoded(data);
  const CenteredMoments moments =
      ComputeCenteredMoments(data.features, data.response);
  RegularizedFit fit;
  fit.lambda = lambda;
  fit.penalty_kind = PenaltyKind::kMl2p;
  fit.model = WithIntercept(
      moments,
      SolveSymmetricSystem(Ml2pSystem(moments, lambda), moments.cross, "ml2p"));
  fit.objective_value = Ml2pObjective(data, fit.model.beta, lambda);
  return fit;
}

double CcpObjective(const Dataset& data, const Eigen::VectorXd& beta,
                    double lambda) {
  const CenteredMoments m = ComputeCenteredMoments(data.features, data.response);
  const double n = static_cast<double>(m.n);
  const double penalty =
      n * beta.dot(m.Variances().cwiseProduct(beta)) - beta.dot(m.gram * beta);
  return ResidualSumOfSquares(data, beta) + lambda * penalty;
}

double Ml2pObjective(const Dataset& data, const Eigen::VectorXd& beta,
                     double lambda) {
  const FeatureStats stats = ComputeFeatureStats(data.features);
  const double n = static_cast<double>(data.rows());
  const double penalty =
      ((stats.variances.array() + stats.means.array().square()) *
       beta.array().square())
          .sum();
  return ResidualSumOfSquares(data, beta) +
         n * (lambda / (1.0 - lambda)) * penalty;
}

Eigen::VectorXd Predict(const LinearModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.beta.size()) {
    throw InvalidArgument("predict: feature count " +
                          std::to_string(features.cols()) +
                          " does not match model size " +
                          std::to_string(model.beta.size()));
  }
  return (features * model.beta).array() + model.intercept;
}

}  // namespace ablate
