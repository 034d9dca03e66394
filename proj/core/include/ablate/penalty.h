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

// Contribution Covariance Penalty (CCP) and Modified L2 Penalty (ML2P).
//
// For a matrix of per-row feature contributions c_ij (beta_j x_ij for a linear
// model, an attribution for a network):
//
//   CCP  = n * sum_{j != k} -cov(c_j, c_k)
//        = n * sum_j var(c_j) - n * var(sum_j c_j)
//   ML2P = sum_j (v_j + mu_j^2) beta_j^2
//
// Covariances and variances use the population convention (divide by n).

#ifndef ABLATE_PENALTY_H_
#define ABLATE_PENALTY_H_

#include <optional>

#include <Eigen/Core>

#include "ablate/dataset.h"
#include "ablate/linear.h"

namespace ablate {

struct ContributionMatrix {
  Eigen::MatrixXd values;       // n x k
  Eigen::VectorXd predictions;  // n; the decomposed score
};

struct PenaltyReport {
  double ccp = 0.0;
  double ml2p = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::optional<Eigen::MatrixXd> per_pair_cov;
  std::optional<double> lambda_context;
};

ContributionMatrix ContributionsLinear(
    const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

// Population covariance matrix of the contribution columns.
Eigen::MatrixXd ContributionCovariance(const ContributionMatrix& c);

double CcpPairwise(const ContributionMatrix& c);
double CcpVarianceForm(const ContributionMatrix& c);

// Variance form applied to attributions. The decomposed score is taken to be
// the attribution row sum, i.e. the completeness-normalized F(x) - F(x').
double CcpFromAttributions(const ContributionMatrix& attributions);

double Ml2p(const Eigen::Ref<const Eigen::VectorXd>& beta_like,
            const FeatureStats& stats);

// Coefficient proxy: column means of the per-input average gradients.
Eigen::VectorXd CoefficientProxy(const Eigen::Ref<const Eigen::MatrixXd>& avg_grads);

double Ml2pFromAvgGradients(const Eigen::Ref<const Eigen::MatrixXd>& avg_grads,
                            const FeatureStats& stats);

// ML2P evaluated separately on every row of avg_grads.
Eigen::VectorXd Ml2pPerInput(const Eigen::Ref<const Eigen::MatrixXd>& avg_grads,
                             const FeatureStats& stats);

// beta^T (nV - Xc^T Xc) beta. Equals CcpPairwise of the linear contributions.
double CcpMatrixForm(const Eigen::Ref<const Eigen::VectorXd>& beta,
                     const Eigen::Ref<const Eigen::MatrixXd>& features);

PenaltyReport LinearPenaltyReport(const LinearModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  bool include_pairs = false);

}  // namespace ablate

#endif  // ABLATE_PENALTY_H_
