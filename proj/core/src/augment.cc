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

#include "ablate/augment.h"

#include <cmath>
#include <string>
#include <utility>

#include "ablate/error.h"

namespace ablate {

const char* AugmentModeName(AugmentMode mode) {
  return mode == AugmentMode::kMeanAblation ? "mean" : "iid";
}

AugmentMode ParseAugmentMode(const std::string& name) {
  if (name == "mean" || name == "mada" || name == "mean_ablation") {
    return AugmentMode::kMeanAblation;
  }
  if (name == "iid" || name == "inverted_dropout") {
    return AugmentMode::kInvertedDropout;
  }
  throw InvalidArgument("unknown augmentation mode '" + name +
                        "' (expected mean or iid)");
}

void ValidateAblationRate(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw InvalidArgument("ablation rate lambda must lie in [0, 1), got " +
                          std::to_string(lambda));
  }
}

void AugmentSpec::Validate() const { ValidateAblationRate(lambda); }

AblationMask MakeMask(std::size_t rows, std::size_t k, double lambda,
                      std::uint64_t seed) {
  ValidateAblationRate(lambda);
  AblationMask mask(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    Rng rng(seed, StreamPurpose::kMask, static_cast<std::uint64_t>(r));
    for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(r, j) = rng.Bernoulli(lambda);
  }
  return mask;
}

Eigen::VectorXd ApplyMeanAblation(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::ArrayX<bool>>& mask,
                                  const Eigen::Ref<const Eigen::VectorXd>& means) {
  if (x.size() != mask.size() || x.size() != means.size()) {
    throw InvalidArgument("mean ablation: length mismatch");
  }
  return mask.select(means, x);
}

Eigen::VectorXd ApplyInvertedDropout(
    const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::ArrayX<bool>>& mask, double lambda) {
  ValidateAblationRate(lambda);
  if (x.size() != mask.size()) {
    throw InvalidArgument("inverted dropout: length mismatch");
  }
  const double scale = 1.0 / (1.0 - lambda);
  return mask.select(Eigen::VectorXd::Zero(x.size()), x * scale);
}

AugmentedRowSource::AugmentedRowSource(const Dataset& source, AugmentMode mode,
                                       double lambda, std::uint64_t seed)
    : source_(source),
      mode_(mode),
      lambda_(lambda),
      keep_scale_(1.0 / (1.0 - lambda)),
      seed_(seed),
      means_(source.features.colwise().mean().transpose()) {
  ValidateAblationRate(lambda);
  if (source.rows() == 0) throw InvalidArgument("cannot augment an empty dataset");
  if (source.HasCategorical()) {
    throw DataError("augmentation requires one-hot encoded data");
  }
}

double AugmentedRowSource::Row(std::uint64_t index,
                               Eigen::Ref<Eigen::VectorXd> features) const {
  Rng rng(seed_, StreamPurpose::kAugmentRow, index);
  const auto src = static_cast<Eigen::Index>(rng.Below(source_.rows()));
  const auto k = features.size();
  if (mode_ == AugmentMode::kMeanAblation) {
    for (Eigen::Index j = 0; j < k; ++j) {
      features[j] = rng.Bernoulli(lambda_) ? means_[j] : source_.features(src, j);
    }
  } else {
    for (Eigen::Index j = 0; j < k; ++j) {
      features[j] =
          rng.Bernoulli(lambda_) ? 0.0 : source_.features(src, j) * keep_scale_;
    }
  }
  return source_.response[src];
}

Dataset BuildAugmented(const Dataset& data, const AugmentSpec& spec) {
  spec.Validate();
  if (spec.n_synthetic == 0) {
    throw InvalidArgument("augmented dataset size N must be positive");
  }
  const AugmentedRowSource source(data, spec.mode, spec.lambda, spec.seed);
  Dataset out;
  out.task = data.task;
  out.column_names = data.column_names;
  out.column_kinds = data.column_kinds;
  out.class_labels = data.class_labels;
  const auto n = static_cast<Eigen::Index>(spec.n_synthetic);
  out.features.resize(n, data.features.cols());
  out.response.resize(n);
  Eigen::VectorXd row(data.features.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.response[i] = source.Row(static_cast<std::uint64_t>(i), row);
    out.features.row(i) = row.transpose();
  }
  return out;
}

BatchAugmenter::BatchAugmenter(AugmentMode mode, double lambda,
                               std::uint64_t seed, Eigen::VectorXd means)
    : mode_(mode), lambda_(lambda), seed_(seed), means_(std::move(means)) {
  ValidateAblationRate(lambda);
}

Eigen::MatrixXd BatchAugmenter::Apply(
    const Eigen::Ref<const Eigen::MatrixXd>& batch, std::uint64_t step) const {
  if (mode_ == AugmentMode::kMeanAblation && batch.cols() != means_.size()) {
    throw InvalidArgument("batch column count does not match frozen means");
  }
  Eigen::MatrixXd out = batch;
  if (lambda_ == 0.0) return out;
  Rng rng(seed_, StreamPurpose::kBatchMask, step);
  const double keep_scale = 1.0 / (1.0 - lambda_);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const bool ablate = rng.Bernoulli(lambda_);
      if (mode_ == AugmentMode::kMeanAblation) {
        if (ablate) out(i, j) = means_[j];
      } else {
        out(i, j) = ablate ? 0.0 : out(i, j) * keep_scale;
      }
    }
  }
  return out;
}

Eigen::MatrixXd BatchMasks(const Eigen::Ref<const Eigen::MatrixXd>& batch,
                           const AugmentSpec& spec,
                           const Eigen::VectorXd& means, std::uint64_t step) {
  return BatchAugmenter(spec.mode, spec.lambda, spec.seed, means).Apply(batch, step);
}

}  // namespace ablate
