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

// Integrated Gradients along the straight path from a baseline x' to x:
//
//   attrib_j(x) = (x_j - x'_j) * integral_0^1 dF(x' + a (x - x')) / dx_j da
//
// The integral is approximated by a fixed quadrature rule; the path-averaged
// gradient is kept alongside the attributions and is the network analogue of
// a linear coefficient.

#ifndef ABLATE_ATTRIBUTION_H_
#define ABLATE_ATTRIBUTION_H_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ablate/nn.h"
#include "ablate/penalty.h"

namespace ablate {

enum class Quadrature { kMidpoint, kLeft, kRight, kTrapezoid };

Quadrature ParseQuadrature(const std::string& name);

inline constexpr std::size_t kDefaultIgSteps = 100;

struct AttributionConfig {
  Eigen::VectorXd baseline;  // length k; zeros on standardized data
  std::size_t steps = kDefaultIgSteps;
  Quadrature quadrature = Quadrature::kMidpoint;
  std::size_t output_index = 0;  // class logit, or 0 for regression
};

struct AttributionResult {
  Eigen::MatrixXd attributions;   // n x k
  Eigen::MatrixXd avg_gradients;  // n x k
  Eigen::VectorXd outputs;        // F(x), n
  double baseline_output = 0.0;   // F(x')
  Eigen::VectorXd completeness_gap;  // |sum_j attrib_j - (F(x) - F(x'))|
};

// Nodes and weights of the quadrature rule on [0, 1].
void QuadratureRule(Quadrature rule, std::size_t steps, std::vector<double>& nodes,
                    std::vector<double>& weights);

AttributionResult IntegratedGradients(
    const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
    const AttributionConfig& config);

const Eigen::MatrixXd& AverageGradients(const AttributionResult& result);

// Attributions packaged for the penalty functions; predictions are
// F(x) - F(x').
ContributionMatrix AttributionContributions(const AttributionResult& result);

struct CompletenessSummary {
  Eigen::VectorXd gaps;
  double max_gap = 0.0;
  double mean_gap = 0.0;
  std::vector<std::size_t> flagged_rows;
};

// Flags rows whose gap exceeds relative_tolerance * |F(x) - F(x')| +
// absolute_tolerance.
CompletenessSummary CompletenessReport(
    const AttributionResult& result,
    const Eigen::Ref<const Eigen::VectorXd>& outputs_at_x,
    double output_at_baseline, double relative_tolerance = 1e-3,
    double absolute_tolerance = 1e-6);

}  // namespace ablate

#endif  // ABLATE_ATTRIBUTION_H_
