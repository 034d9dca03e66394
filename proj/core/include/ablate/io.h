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

// On-disk formats: linear models and network checkpoints as JSON, penalty
// reports as JSON and attributions as CSV. Writers are deterministic.

#ifndef ABLATE_IO_H_
#define ABLATE_IO_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ablate/attribution.h"
#include "ablate/dataset.h"
#include "ablate/linear.h"
#include "ablate/nn.h"
#include "ablate/penalty.h"

namespace ablate {

// {beta, intercept, lambda, penalty_kind, columns, standardization?}
struct ModelFile {
  LinearModel model;
  double lambda = 0.0;
  PenaltyKind penalty_kind = PenaltyKind::kNone;
  std::vector<std::string> columns;
  // Stats the features were standardized with before fitting, if any.
  std::optional<FeatureStats> standardization;
};

// {dims, task, layers: [{weights (row-major, fan_in x fan_out), bias}],
//  log, best_epoch, columns, class_labels, augment, lambda, standardization?}
struct Checkpoint {
  MlpModel model;
  std::string augment_mode = "none";
  double lambda = 0.0;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::vector<std::string> columns;
  std::vector<std::string> class_labels;
  std::optional<FeatureStats> standardization;
};

std::string ModelToJson(const ModelFile& file);
ModelFile ModelFromJson(const std::string& text);
void SaveModel(const ModelFile& file, const std::filesystem::path& path);
ModelFile LoadModel(const std::filesystem::path& path);

std::string CheckpointToJson(const Checkpoint& checkpoint);
Checkpoint CheckpointFromJson(const std::string& text);
void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// True when the JSON document looks like a network checkpoint rather than a
// linear model.
bool IsCheckpointJson(const std::string& text);

// {ccp, ml2p, n, k, lambda_context}; either penalty may be omitted.
std::string PenaltyReportToJson(const PenaltyReport& report, bool with_ccp,
                                bool with_ml2p);

// One row per input: attributions, average gradients, completeness gap.
std::string AttributionsToCsv(const AttributionResult& result,
                              const std::vector<std::string>& column_names);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

// Reorders data columns to match `columns`. Dummy columns ("name=value")
// absent from the data are filled with zeros; any other missing column is a
// DataError.
Dataset AlignColumns(const Dataset& data, const std::vector<std::string>& columns);

}  // namespace ablate

#endif  // ABLATE_IO_H_
