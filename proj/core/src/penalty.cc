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

#include "ablate/penalty.h"

#include <string>

#include "ablate/error.h"

namespace ablate {

namespace {

void RequireRows(Eigen::Index n) {
  if (n < 2) throw InvalidArgument("penalty needs at least 2 rows");
}

double PopulationVariance(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return (v.array() - v.mean()).square().mean();
}

}  // namespace

ContributionMatrix ContributionsLinear(
    const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.beta.size()) {
    throw InvalidArgument("contributions: feature count does not match model");
  }
  ContributionMatrix c;
  c.values = features * model.beta.asDiagonal();
  c.predictions = c.values.rowwise().sum().array() + model.intercept;
  return c;
}

Eigen::MatrixXd ContributionCovariance(const ContributionMatrix& c) {
  RequireRows(c.values.rows());
  const Eigen::MatrixXd centered =
      c.values.rowwise() - c.values.colwise().mean();
  return (centered.transpose() * centered) /
         static_cast<double>(c.values.rows());
}

double CcpPairwise(const ContributionMatrix& c) {
  const Eigen::MatrixXd cov = ContributionCovariance(c);
  const double off_diagonal = cov.sum() - cov.trace();
  return static_cast<double>(c.values.rows()) * -off_diagonal;
}

double CcpVarianceForm(const ContributionMatrix& c) {
  const Eigen::Index n = c.values.rows();
  RequireRows(n);
  if (c.predictions.size() != n) {
    throw InvalidArgument("ccp: predictions length does not match rows");
  }
  double sum_var = 0.0;
  for (Eigen::Index j = 0; j < c.values.cols(); ++j) {
    sum_var += PopulationVariance(c.values.col(j));
  }
  const double nn = static_cast<double>(n);
  return nn * sum_var - nn * PopulationVariance(c.predictions);
}

double CcpFromAttributions(const ContributionMatrix& attributions) {
  ContributionMatrix normalized;
  normalized.values = attributions.values;
  normalized.predictions = attributions.values.rowwise().sum();
  return CcpVarianceForm(normalized);
}

double Ml2p(const Eigen::Ref<const Eigen::VectorXd>& beta_like,
            const FeatureStats& stats) {
  if (beta_like.size() != stats.means.size() ||
      beta_like.size() != stats.variances.size()) {
    throw InvalidArgument("ml2p: coefficient length does not match stats");
  }
  return ((stats.variances.array() + stats.means.array().square()) *
          beta_like.array().square())
      .sum();
}

Eigen::VectorXd CoefficientProxy(
    const Eigen::Ref<const Eigen::MatrixXd>& avg_grads) {
  if (!avg_grads.allFinite()) {
    throw NumericalError("average gradients contain non-finite values");
  }
  if (avg_grads.rows() == 0) {
    throw InvalidArgument("average gradients are empty");
  }
  return avg_grads.colwise().mean().transpose();
}

double Ml2pFromAvgGradients(const Eigen::Ref<const Eigen::MatrixXd>& avg_grads,
                            const FeatureStats& stats) {
  return Ml2p(CoefficientProxy(avg_grads), stats);
}

Eigen::VectorXd Ml2pPerInput(const Eigen::Ref<const Eigen::MatrixXd>& avg_grads,
                             const FeatureStats& stats) {
  if (!avg_grads.allFinite()) {
    throw NumericalError("average gradients contain non-finite values");
  }
  Eigen::VectorXd out(avg_grads.rows());
  for (Eigen::Index i = 0; i < avg_grads.rows(); ++i) {
    out[i] = Ml2p(avg_grads.row(i).transpose(), stats);
  }
  return out;
}

double CcpMatrixForm(const Eigen::Ref<const Eigen::VectorXd>& beta,
                     const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::MatrixXd xc = features.rowwise() - features.colwise().mean();
  const Eigen::MatrixXd gram = xc.transpose() * xc;
  // nV equals diag(gram), so nV - gram is -gram with an exactly zero diagonal.
  Eigen::MatrixXd system = -gram;
  system.diagonal().setZero();
  return beta.dot(system * beta);
}

PenaltyReport LinearPenaltyReport(const LinearModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  bool include_pairs) {
  const ContributionMatrix c = ContributionsLinear(model, features);
  PenaltyReport report;
  report.n = static_cast<std::size_t>(features.rows());
  report.k = static_cast<std::size_t>(features.cols());
  report.ccp = CcpVarianceForm(c);
  report.ml2p = Ml2p(model.beta, ComputeFeatureStats(features));
  if (include_pairs) report.per_pair_cov = ContributionCovariance(c);
  return report;
}

}  // namespace ablate
