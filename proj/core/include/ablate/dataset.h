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

// Tabular data: CSV ingestion, one-hot encoding, standardization, seeded
// splitting and a synthetic equicorrelated generator.

#ifndef ABLATE_DATASET_H_
#define ABLATE_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ablate {

enum class Task { kRegression, kClassification };

// kCategorical columns only exist between load_csv and OneHotEncode; their
// matrix entries are placeholders and the raw strings live in
// Dataset::categories.
enum class ColumnKind { kNumeric, kDummy, kCategorical };

const char* TaskName(Task task);
Task ParseTask(const std::string& name);

struct Dataset {
  Eigen::MatrixXd features;  // n x k
  Eigen::VectorXd response;  // n; class index for classification
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  Task task = Task::kRegression;
  // Per column; non-empty only for kCategorical columns.
  std::vector<std::vector<std::string>> categories;
  // Original labels, indexed by class id (classification only).
  std::vector<std::string> class_labels;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
  bool HasCategorical() const;
  std::size_t NumClasses() const;

  // Throws DataError when shapes or metadata are inconsistent.
  void Validate() const;

  // Rows selected by index, in the given order.
  Dataset Subset(const std::vector<std::size_t>& rows) const;
};

// Population statistics (divide by n) of each feature column.
struct FeatureStats {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  // Mean the response was centered with; regression only.
  std::optional<double> response_mean;
};

FeatureStats ComputeFeatureStats(const Eigen::MatrixXd& features);

struct CsvLoad {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

// Reads a comma-separated file with a header row. Columns where most
// non-missing cells parse as numbers are numeric; the rest are categorical.
// Rows with a missing or unparseable value in any used column are dropped.
CsvLoad LoadCsv(const std::filesystem::path& path,
                const std::string& response_column, Task task);
CsvLoad ParseCsv(const std::string& text, const std::string& response_column,
                 Task task);

inline constexpr std::size_t kMaxCategories = 10000;

// Replaces each categorical column with one dummy column per category, in
// lexicographic category order, named "<column>=<category>".
Dataset OneHotEncode(const Dataset& data);

struct Standardized {
  Dataset dataset;
  FeatureStats stats;
};

// (x - mean) / sqrt(var) per column; constant columns are only centered.
// Regression responses are centered. Pass train-set stats to transform
// validation or test data consistently.
Standardized Standardize(const Dataset& data,
                         const std::optional<FeatureStats>& stats = std::nullopt);

struct SplitSpec {
  double test_fraction = 0.2;
  double validation_fraction_of_train = 0.25;
  std::uint64_t seed = 0;
  // When set, the test partition is drawn with `seed` and the train /
  // validation partition of the remainder with this seed.
  std::optional<std::uint64_t> validation_seed;
};

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

DataSplit Split(const Dataset& data, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t k = 3;
  double correlation = 0.0;
  std::vector<double> true_beta;  // length k
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Rows ~ N(0, R) with R the equicorrelation matrix; y = X beta + noise.
Dataset SynthCorrelated(const SyntheticSpec& spec);

// Writes features and response as CSV (response last, named `response_name`).
void WriteCsv(const Dataset& data, const std::filesystem::path& path,
              const std::string& response_name = "y");
std::string ToCsv(const Dataset& data, const std::string& response_name = "y");

}  // namespace ablate

#endif  // ABLATE_DATASET_H_
