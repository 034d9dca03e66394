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

#include "ablate/attribution.h"

#include <cmath>

#include "ablate/error.h"

namespace ablate {

Quadrature ParseQuadrature(const std::string& name) {
  if (name == "midpoint") return Quadrature::kMidpoint;
  if (name == "left") return Quadrature::kLeft;
  if (name == "right") return Quadrature::kRight;
  if (name == "trapezoid") return Quadrature::kTrapezoid;
  throw InvalidArgument("unknown quadrature rule '" + name + "'");
}

void QuadratureRule(Quadrature rule, std::size_t steps,
                    std::vector<double>& nodes, std::vector<double>& weights) {
  if (steps == 0) throw InvalidArgument("integrated gradients needs steps >= 1");
  nodes.clear();
  weights.clear();
  const double m = static_cast<double>(steps);
  switch (rule) {
    case Quadrature::kMidpoint:
      for (std::size_t s = 0; s < steps; ++s) {
        nodes.push_back((static_cast<double>(s) + 0.5) / m);
        weights.push_back(1.0 / m);
      }
      break;
    case Quadrature::kLeft:
      for (std::size_t s = 0; s < steps; ++s) {
        nodes.push_back(static_cast<double>(s) / m);
        weights.push_back(1.0 / m);
      }
      break;
    case Quadrature::kRight:
      for (std::size_t s = 1; s <= steps; ++s) {
        nodes.push_back(static_cast<double>(s) / m);
        weights.push_back(1.0 / m);
      }
      break;
    case Quadrature::kTrapezoid:
      for (std::size_t s = 0; s <= steps; ++s) {
        nodes.push_back(static_cast<double>(s) / m);
        weights.push_back((s == 0 || s == steps) ? 0.5 / m : 1.0 / m);
      }
      break;
  }
}

AttributionResult IntegratedGradients(
    const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
    const AttributionConfig& config) {
  const auto k = static_cast<Eigen::Index>(model.input_dim());
  if (config.baseline.size() != k) {
    throw InvalidArgument("baseline length does not match network input");
  }
  if (!config.baseline.allFinite()) {
    throw InvalidArgument("baseline contains non-finite values");
  }
  if (config.output_index >= model.output_dim()) {
    throw InvalidArgument("attribution output index out of range");
  }
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadratureRule(config.quadrature, config.steps, nodes, weights);

  const Eigen::MatrixXd delta = inputs.rowwise() - config.baseline.transpose();
  AttributionResult result;
  result.avg_gradients = Eigen::MatrixXd::Zero(inputs.rows(), k);
  Eigen::MatrixXd path(inputs.rows(), k);
  // Steps are accumulated in order so the result does not depend on batching.
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    path = (nodes[s] * delta).rowwise() + config.baseline.transpose();
    result.avg_gradients.noalias() +=
        weights[s] * InputGradients(model, path, config.output_index);
  }
  if (!result.avg_gradients.allFinite()) {
    throw NumericalError("integrated gradients produced non-finite gradients");
  }
  result.attributions = delta.cwiseProduct(result.avg_gradients);

  const auto out = static_cast<Eigen::Index>(config.output_index);
  result.outputs = Forward(model, inputs).col(out);
  result.baseline_output =
      Forward(model, config.baseline.transpose())(0, out);
  result.completeness_gap =
      (result.attributions.rowwise().sum() -
       (result.outputs.array() - result.baseline_output).matrix())
          .cwiseAbs();
  return result;
}

const Eigen::MatrixXd& AverageGradients(const AttributionResult& result) {
  return result.avg_gradients;
}

ContributionMatrix AttributionContributions(const AttributionResult& result) {
  ContributionMatrix c;
  c.values = result.attributions;
  c.predictions = result.outputs.array() - result.baseline_output;
  return c;
}

CompletenessSummary CompletenessReport(
    const AttributionResult& result,
    const Eigen::Ref<const Eigen::VectorXd>& outputs_at_x,
    double output_at_baseline, double relative_tolerance,
    double absolute_tolerance) {
  if (outputs_at_x.size() != result.attributions.rows()) {
    throw InvalidArgument("completeness: output count does not match rows");
  }
  CompletenessSummary summary;
  const Eigen::VectorXd diff = outputs_at_x.array() - output_at_baseline;
  summary.gaps = (result.attributions.rowwise().sum() - diff).cwiseAbs();
  if (summary.gaps.size() == 0) return summary;
  summary.max_gap = summary.gaps.maxCoeff();
  summary.mean_gap = summary.gaps.mean();
  for (Eigen::Index i = 0; i < summary.gaps.size(); ++i) {
    if (summary.gaps[i] >
        relative_tolerance * std::abs(diff[i]) + absolute_tolerance) {
      summary.flagged_rows.push_back(static_cast<std::size_t>(i));
    }
  }
  return summary;
}

}  // namespace ablate
