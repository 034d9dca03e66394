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

// Ablated data augmentation.
//
// Each feature of a resampled row is ablated independently with probability
// lambda. Mean ablation replaces the value with the feature mean of the
// original data; inverted input dropout replaces it with zero and rescales
// the surviving features by 1 / (1 - lambda). Responses are never touched.

#ifndef ABLATE_AUGMENT_H_
#define ABLATE_AUGMENT_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "ablate/dataset.h"
#include "ablate/rng.h"

namespace ablate {

enum class AugmentMode { kMeanAblation, kInvertedDropout };

const char* AugmentModeName(AugmentMode mode);
// Accepts "mean" / "iid" (CLI spelling) as well as the long names.
AugmentMode ParseAugmentMode(const std::string& name);

struct AugmentSpec {
  AugmentMode mode = AugmentMode::kMeanAblation;
  double lambda = 0.0;
  std::size_t n_synthetic = 0;
  std::uint64_t seed = 0;

  // Throws InvalidArgument unless 0 <= lambda < 1.
  void Validate() const;
};

void ValidateAblationRate(double lambda);

// rows x k; true marks an ablated entry.
using AblationMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Row r of the mask is drawn from stream (seed, kMask, r).
AblationMask MakeMask(std::size_t rows, std::size_t k, double lambda,
                      std::uint64_t seed);

Eigen::VectorXd ApplyMeanAblation(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::ArrayX<bool>>& mask,
                                  const Eigen::Ref<const Eigen::VectorXd>& means);

Eigen::VectorXd ApplyInvertedDropout(
    const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::ArrayX<bool>>& mask, double lambda);

// Generates the rows of D^lambda_N one at a time. Row i depends only on
// (spec.seed, i), so any prefix or any single row can be regenerated.
class AugmentedRowSource {
 public:
  AugmentedRowSource(const Dataset& source, AugmentMode mode, double lambda,
                     std::uint64_t seed);

  // Writes synthetic row `index` into `features` (length k) and returns its
  // response.
  double Row(std::uint64_t index, Eigen::Ref<Eigen::VectorXd> features) const;

  const Eigen::VectorXd& means() const { return means_; }
  std::size_t cols() const { return static_cast<std::size_t>(means_.size()); }

 private:
  const Dataset& source_;
  AugmentMode mode_;
  double lambda_;
  double keep_scale_;
  std::uint64_t seed_;
  Eigen::VectorXd means_;
};

// Materializes D^lambda_N: N bootstrap-resampled, independently ablated rows.
Dataset BuildAugmented(const Dataset& data, const AugmentSpec& spec);

// Per-step augmentation for minibatch training. Means are frozen at
// construction (from the training set); the mask for a step is drawn from
// stream (seed, kBatchMask, step).
class BatchAugmenter {
 public:
  BatchAugmenter(AugmentMode mode, double lambda, std::uint64_t seed,
                 Eigen::VectorXd means);

  Eigen::MatrixXd Apply(const Eigen::Ref<const Eigen::MatrixXd>& batch,
                        std::uint64_t step) const;

  double lambda() const { return lambda_; }

 private:
  AugmentMode mode_;
  double lambda_;
  std::uint64_t seed_;
  Eigen::VectorXd means_;
};

Eigen::MatrixXd BatchMasks(const Eigen::Ref<const Eigen::MatrixXd>& batch,
                           const AugmentSpec& spec,
                           const Eigen::VectorXd& means, std::uint64_t step);

}  // namespace ablate

#endif  // ABLATE_AUGMENT_H_
