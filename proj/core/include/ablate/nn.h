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

// Fully connected ReLU networks with exact backpropagation, Adam and
// early-stopped minibatch training with optional per-batch input ablation.

#ifndef ABLATE_NN_H_
#define ABLATE_NN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ablate/augment.h"
#include "ablate/dataset.h"

namespace ablate {

inline constexpr std::size_t kHiddenWidth = 100;
inline constexpr std::size_t kMaxHiddenLayers = 10;

// Affine map x -> x W + b applied to row vectors.
struct DenseLayer {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd bias;     // fan_out
};

struct MlpModel {
  std::vector<std::size_t> layer_dims;  // [k, h_1, ..., h_d, out]
  std::vector<DenseLayer> layers;
  Task task = Task::kRegression;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t hidden_layers() const { return layers.size() - 1; }
  std::size_t ParameterCount() const;
  bool AllFinite() const;
};

// [k, width x depth, out]; out is 1 for regression or the class count.
std::vector<std::size_t> MakeLayerDims(std::size_t k, std::size_t depth,
                                       std::size_t out,
                                       std::size_t width = kHiddenWidth);

// He-uniform weights drawn from stream (seed, kInit, layer); zero biases.
MlpModel InitMlp(const std::vector<std::size_t>& layer_dims, Task task,
                 std::uint64_t seed);

struct ForwardCache {
  // activations[0] is the input; activations[l] is the output of layer l
  // (post-ReLU for hidden layers, raw for the last).
  std::vector<Eigen::MatrixXd> activations;
  // pre_activations[l - 1] feeds activations[l].
  std::vector<Eigen::MatrixXd> pre_activations;
};

Eigen::MatrixXd Forward(const MlpModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                        ForwardCache* cache = nullptr);

// Mean squared error (regression, targets are values) or mean softmax
// cross-entropy over logits (classification, targets are class indices).
double Loss(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
            const Eigen::Ref<const Eigen::VectorXd>& targets, Task task);

struct ParamGradients {
  double loss = 0.0;
  std::vector<DenseLayer> layers;  // same shapes as the model
};

ParamGradients ComputeParamGradients(const MlpModel& model,
                                     const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                     const Eigen::Ref<const Eigen::VectorXd>& targets);

// d output[output_index] / d input, one row per input row.
Eigen::MatrixXd InputGradients(const MlpModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                               std::size_t output_index);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpModel& model, const AdamConfig& config);
  void Step(MlpModel& model, const ParamGradients& grads);
  std::uint64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  // Stop after this many epochs without a strict decrease in validation loss.
  std::size_t early_stop_patience = 3;
  // Masks use augment->seed; n_synthetic is unused (masks are drawn per step).
  std::optional<AugmentSpec> augment;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  MlpModel model;  // best checkpoint
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  bool early_stopped = false;
};

// Minibatch Adam with a fresh shuffle per epoch (stream (seed, kShuffle,
// epoch)). Augmentation, when configured, is applied to each batch before the
// forward pass with means frozen from `train`. One epoch is one pass over the
// original training rows. With an empty validation set no early stopping
// happens and the final model is returned.
TrainResult Train(const MlpModel& initial, const Dataset& train,
                  const Dataset& validation, const TrainConfig& config);

struct Metrics {
  double loss = 0.0;
  double mse = 0.0;       // regression
  double accuracy = 0.0;  // classification
  Eigen::MatrixXd outputs;
};

Metrics Evaluate(const MlpModel& model, const Dataset& data);

}  // namespace ablate

#endif  // ABLATE_NN_H_
