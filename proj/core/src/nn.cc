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

#include "ablate/nn.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "ablate/error.h"
#include "ablate/rng.h"

namespace ablate {

namespace {

void CheckInputs(const MlpModel& model, Eigen::Index cols) {
  if (static_cast<std::size_t>(cols) != model.input_dim()) {
    throw InvalidArgument("network expects " + std::to_string(model.input_dim()) +
                          " input columns, got " + std::to_string(cols));
  }
}

std::size_t ClassIndex(double target, std::size_t classes) {
  if (!(target >= 0.0) || target != std::floor(target) ||
      target >= static_cast<double>(classes)) {
    throw InvalidArgument("invalid class index " + std::to_string(target));
  }
  return static_cast<std::size_t>(target);
}

// Row-wise log-sum-exp.
Eigen::VectorXd LogSumExp(const Eigen::Ref<const Eigen::MatrixXd>& logits) {
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  const Eigen::VectorXd sums =
      (logits.colwise() - row_max).array().exp().rowwise().sum();
  return row_max.array() + sums.array().log();
}

// d mean-loss / d outputs.
Eigen::MatrixXd LossGradient(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
                             const Eigen::Ref<const Eigen::VectorXd>& targets,
                             Task task) {
  const double n = static_cast<double>(outputs.rows());
  if (task == Task::kRegression) {
    return (2.0 / n) * (outputs.col(0) - targets);
  }
  const Eigen::VectorXd lse = LogSumExp(outputs);
  Eigen::MatrixXd grad = (outputs.colwise() - lse).array().exp();
  const auto classes = static_cast<std::size_t>(outputs.cols());
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    grad(i, static_cast<Eigen::Index>(ClassIndex(targets[i], classes))) -= 1.0;
  }
  return grad / n;
}

std::vector<DenseLayer> ZerosLike(const MlpModel& model) {
  std::vector<DenseLayer> out;
  out.reserve(model.layers.size());
  for (const auto& layer : model.layers) {
    out.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                   Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

Eigen::MatrixXd GatherRows(const Eigen::MatrixXd& source,
                           const std::vector<std::size_t>& order,
                           std::size_t begin, std::size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), source.cols());
  for (std::size_t i = begin; i < end; ++i) {
    out.row(static_cast<Eigen::Index>(i - begin)) =
        source.row(static_cast<Eigen::Index>(order[i]));
  }
  return out;
}

Eigen::VectorXd GatherEntries(const Eigen::VectorXd& source,
                              const std::vector<std::size_t>& order,
                              std::size_t begin, std::size_t end) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) {
    out[static_cast<Eigen::Index>(i - begin)] =
        source[static_cast<Eigen::Index>(order[i])];
  }
  return out;
}

}  // namespace

std::size_t MlpModel::ParameterCount() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return count;
}

bool MlpModel::AllFinite() const {
  for (const auto& layer : layers) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

std::vector<std::size_t> MakeLayerDims(std::size_t k, std::size_t depth,
                                       std::size_t out, std::size_t width) {
  if (depth > kMaxHiddenLayers) {
    throw InvalidArgument("at most " + std::to_string(kMaxHiddenLayers) +
                          " hidden layers are supported");
  }
  std::vector<std::size_t> dims{k};
  for (std::size_t i = 0; i < depth; ++i) dims.push_back(width);
  dims.push_back(out);
  return dims;
}

MlpModel InitMlp(const std::vector<std::size_t>& layer_dims, Task task,
                 std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    throw InvalidArgument("a network needs input and output dimensions");
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw InvalidArgument("layer dimensions must be positive");
  }
  if (task == Task::kRegression && layer_dims.back() != 1) {
    throw InvalidArgument("regression networks have a single output");
  }
  MlpModel model;
  model.layer_dims = layer_dims;
  model.task = task;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng(seed, StreamPurpose::kInit, l);
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out),
                     Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index c = 0; c < fan_out; ++c) {
      for (Eigen::Index r = 0; r < fan_in; ++r) {
        layer.weights(r, c) = limit * (2.0 * rng.Uniform() - 1.0);
      }
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Eigen::MatrixXd Forward(const MlpModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                        ForwardCache* cache) {
  CheckInputs(model, inputs.cols());
  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.emplace_back(inputs);
  }
  Eigen::MatrixXd a = inputs;
  const std::size_t last = model.layers.size() - 1;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    if (l == last) {
      a = std::move(z);
    } else {
      a = z.cwiseMax(0.0);
      if (cache) cache->pre_activations.push_back(std::move(z));
    }
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

double Loss(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
            const Eigen::Ref<const Eigen::VectorXd>& targets, Task task) {
  if (outputs.rows() != targets.size()) {
    throw InvalidArgument("loss: outputs and targets differ in length");
  }
  if (outputs.rows() == 0) return 0.0;
  if (task == Task::kRegression) {
    if (outputs.cols() != 1) {
      throw InvalidArgument("regression loss expects a single output column");
    }
    return (outputs.col(0) - targets).squaredNorm() /
           static_cast<double>(outputs.rows());
  }
  const Eigen::VectorXd lse = LogSumExp(outputs);
  const auto classes = static_cast<std::size_t>(outputs.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(ClassIndex(targets[i], classes));
    total += lse[i] - outputs(i, c);
  }
  return total / static_cast<double>(outputs.rows());
}

ParamGradients ComputeParamGradients(
    const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
    const Eigen::Ref<const Eigen::VectorXd>& targets) {
  ForwardCache cache;
  const Eigen::MatrixXd outputs = Forward(model, inputs, &cache);
  ParamGradients grads;
  grads.loss = Loss(outputs, targets, model.task);
  if (!std::isfinite(grads.loss)) {
    throw NumericalError("non-finite training loss");
  }
  grads.layers.resize(model.layers.size());
  Eigen::MatrixXd delta = LossGradient(outputs, targets, model.task);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grads.layers[l].weights = cache.activations[l].transpose() * delta;
    grads.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * model.layers[l].weights.transpose();
      delta = (cache.pre_activations[l - 1].array() > 0.0)
                  .select(upstream, 0.0);
    }
  }
  return grads;
}

Eigen::MatrixXd InputGradients(const MlpModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                               std::size_t output_index) {
  if (output_index >= model.output_dim()) {
    throw InvalidArgument("output index " + std::to_string(output_index) +
                          " out of range");
  }
  const std::size_t last = model.layers.size() - 1;
  const auto out = static_cast<Eigen::Index>(output_index);
  if (last == 0) {
    return model.layers[0].weights.col(out).transpose().replicate(inputs.rows(), 1);
  }
  ForwardCache cache;
  Forward(model, inputs, &cache);
  // Seed with the selected column of the last weight matrix.
  Eigen::MatrixXd delta = (cache.pre_activations[last - 1].array() > 0.0)
                              .select(model.layers[last]
                                          .weights.col(out)
                                          .transpose()
                                          .replicate(inputs.rows(), 1),
                                      0.0);
  for (std::size_t l = last - 1; l > 0; --l) {
    Eigen::MatrixXd upstream = delta * model.layers[l].weights.transpose();
    delta = (cache.pre_activations[l - 1].array() > 0.0).select(upstream, 0.0);
  }
  return delta * model.layers[0].weights.transpose();
}

AdamOptimizer::AdamOptimizer(const MlpModel& model, const AdamConfig& config)
    : config_(config), m_(ZerosLike(model)), v_(ZerosLike(model)) {}

void AdamOptimizer::Step(MlpModel& model, const ParamGradients& grads) {
  ++t_;
  const double t = static_cast<double>(t_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  const double step = config_.learning_rate / correction1;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double eps = config_.epsilon;
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -=
        step * m.array() / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weights, grads.layers[l].weights, m_[l].weights,
           v_[l].weights);
    update(model.layers[l].bias, grads.layers[l].bias, m_[l].bias, v_[l].bias);
  }
}

void TrainConfig::Validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (early_stop_patience == 0) {
    throw InvalidArgument("early-stop patience must be at least 1");
  }
  if (!(adam.learning_rate > 0.0)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (augment) augment->Validate();
}

TrainResult Train(const MlpModel& initial, const Dataset& train,
                  const Dataset& validation, const TrainConfig& config) {
  config.Validate();
  if (train.rows() == 0) throw InvalidArgument("training set is empty");
  if (train.task != initial.task) {
    throw InvalidArgument("dataset task does not match network task");
  }
  CheckInputs(initial, train.features.cols());

  std::optional<BatchAugmenter> augmenter;
  if (config.augment) {
    augmenter.emplace(config.augment->mode, config.augment->lambda,
                      config.augment->seed,
                      train.features.colwise().mean().transpose());
  }

  TrainResult result;
  result.model = initial;
  result.best_validation_loss = std::numeric_limits<double>::infinity();
  MlpModel model = initial;
  AdamOptimizer adam(model, config.adam);
  const bool has_validation = validation.rows() > 0;

  const std::size_t n = train.rows();
  std::vector<std::size_t> order(n);
  std::uint64_t step = 0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed, StreamPurpose::kShuffle, epoch);
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.Below(i + 1)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      Eigen::MatrixXd batch = GatherRows(train.features, order, begin, end);
      if (augmenter) batch = augmenter->Apply(batch, step);
      const Eigen::VectorXd targets =
          GatherEntries(train.response, order, begin, end);
      const ParamGradients grads = ComputeParamGradients(model, batch, targets);
      adam.Step(model, grads);
      epoch_loss += grads.loss * static_cast<double>(end - begin);
      ++step;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(n);
    if (!model.AllFinite()) {
      throw NumericalError("network parameters diverged at epoch " +
                           std::to_string(epoch));
    }
    if (has_validation) {
      entry.validation_loss =
          Loss(Forward(model, validation.features), validation.response, model.task);
      if (!std::isfinite(entry.validation_loss)) {
        throw NumericalError("non-finite validation loss at epoch " +
                             std::to_string(epoch));
      }
    } else {
      entry.validation_loss = std::numeric_limits<double>::quiet_NaN();
    }
    result.log.push_back(entry);

    if (!has_validation) {
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    if (entry.validation_loss < result.best_validation_loss) {
      result.best_validation_loss = entry.validation_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!has_validation) {
    result.best_validation_loss = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

Metrics Evaluate(const MlpModel& model, const Dataset& data) {
  Metrics metrics;
  metrics.outputs = Forward(model, data.features);
  if (data.rows() == 0) return metrics;
  metrics.loss = Loss(metrics.outputs, data.response, model.task);
  if (model.task == Task::kRegression) {
    metrics.mse = metrics.loss;
  } else {
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < metrics.outputs.rows(); ++i) {
      Eigen::Index best = 0;
      metrics.outputs.row(i).maxCoeff(&best);
      if (static_cast<double>(best) == data.response[i]) ++correct;
    }
    metrics.accuracy =
        static_cast<double>(correct) / static_cast<double>(data.rows());
  }
  return metrics;
}

}  // namespace ablate
