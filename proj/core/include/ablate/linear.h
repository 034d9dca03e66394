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

// Closed-form least squares on mean-centered data.
//
// All solvers work with the centered Gram matrix G = Xc^T Xc and cross moment
// c = Xc^T yc, where Xc and yc have their column means removed, and recover
// the intercept as mean(y) - mean(X) beta.
//
//   OLS    G beta = c
//   CCP    ((1 - lambda) G + n lambda V) beta = c          V = diag(var_j)
//   ML2P   (G + n lambda / (1 - lambda) D) beta = c        D = diag(var_j + mean_j^2)
//
// The CCP system is the minimizer of |yc - Xc beta|^2 + lambda beta^T (nV - G)
// beta, which is what ordinary least squares on a mean-ablated augmented set
// converges to. The ML2P system is the limit for inverted input dropout.

#ifndef ABLATE_LINEAR_H_
#define ABLATE_LINEAR_H_

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "ablate/dataset.h"

namespace ablate {

struct LinearModel {
  Eigen::VectorXd beta;
  double intercept = 0.0;
};

enum class PenaltyKind { kNone, kCcp, kMl2p };

const char* PenaltyKindName(PenaltyKind kind);
PenaltyKind ParsePenaltyKind(const std::string& name);

struct RegularizedFit {
  LinearModel model;
  double lambda = 0.0;
  PenaltyKind penalty_kind = PenaltyKind::kNone;
  // Value of the penalized objective at the solution. May be negative for
  // CCP, whose penalty rewards mutually reinforcing contributions.
  double objective_value = 0.0;
};

// Sufficient statistics of a dataset for centered least squares.
struct CenteredMoments {
  std::size_t n = 0;
  Eigen::VectorXd feature_means;
  double response_mean = 0.0;
  Eigen::MatrixXd gram;   // Xc^T Xc
  Eigen::VectorXd cross;  // Xc^T yc

  // Population variances, diag(gram) / n.
  Eigen::VectorXd Variances() const;
};

CenteredMoments ComputeCenteredMoments(const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& response);

// Systems whose condition number exceeds this are reported as singular.
inline constexpr double kMaxCondition = 1e12;

// Solves the symmetric k x k system with a column-pivoting Householder QR.
// Throws SingularSystemError naming the rank-deficient columns.
Eigen::VectorXd SolveSymmetricSystem(const Eigen::MatrixXd& system,
                                     const Eigen::VectorXd& rhs,
                                     const std::string& what);

LinearModel FitOls(const Dataset& data);
LinearModel FitOlsFromMoments(const CenteredMoments& moments);

RegularizedFit FitCcp(const Dataset& data, double lambda);
RegularizedFit FitMl2p(const Dataset& data, double lambda);

// The k x k matrices on the left-hand side of the two regularized systems.
Eigen::MatrixXd CcpSystem(const CenteredMoments& moments, double lambda);
Eigen::MatrixXd Ml2pSystem(const CenteredMoments& moments, double lambda);

// |yc - Xc beta|^2 + lambda beta^T (nV - G) beta
double CcpObjective(const Dataset& data, const Eigen::VectorXd& beta,
                    double lambda);
// |yc - Xc beta|^2 + n lambda / (1 - lambda) sum_j (v_j + mu_j^2) beta_j^2
double Ml2pObjective(const Dataset& data, const Eigen::VectorXd& beta,
                     double lambda);

Eigen::VectorXd Predict(const LinearModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace ablate

#endif  // ABLATE_LINEAR_H_
