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

#include "ablate/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>

#include <Eigen/Cholesky>

#include "ablate/error.h"
#include "ablate/rng.h"

namespace ablate {

namespace {

bool IsMissingToken(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "N/A" || cell == "?" ||
         cell == "nan" || cell == "NaN" || cell == "null" || cell == "NULL";
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> ParseNumber(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

// Splits one CSV record. Double quotes delimit fields that may contain commas;
// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> SplitRecord(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(Trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(Trim(current));
  return fields;
}

std::string FormatDouble(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace

const char* TaskName(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Task ParseTask(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification") return Task::kClassification;
  throw InvalidArgument("unknown task '" + name +
                        "' (expected regression or classification)");
}

bool Dataset::HasCategorical() const {
  return std::find(column_kinds.begin(), column_kinds.end(),
                   ColumnKind::kCategorical) != column_kinds.end();
}

std::size_t Dataset::NumClasses() const {
  if (task != Task::kClassification) return 0;
  if (!class_labels.empty()) return class_labels.size();
  if (response.size() == 0) return 0;
  return static_cast<std::size_t>(response.maxCoeff()) + 1;
}

void Dataset::Validate() const {
  const std::size_t k = cols();
  if (static_cast<std::size_t>(response.size()) != rows()) {
    throw DataError("response length does not match feature row count");
  }
  if (column_names.size() != k || column_kinds.size() != k) {
    throw DataError("column metadata does not match feature column count");
  }
  if (!categories.empty() && categories.size() != k) {
    throw DataError("categorical storage does not match column count");
  }
  if (!features.allFinite() || !response.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
  if (task == Task::kClassification) {
    for (Eigen::Index i = 0; i < response.size(); ++i) {
      const double r = response[i];
      if (r < 0 || r != std::floor(r)) {
        throw DataError("classification response must hold class indices");
      }
    }
  }
}

Dataset Dataset::Subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.response.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(src);
    out.response[static_cast<Eigen::Index>(i)] = response[src];
  }
  out.column_names = column_names;
  out.column_kinds = column_kinds;
  out.task = task;
  out.class_labels = class_labels;
  if (!categories.empty()) {
    out.categories.resize(categories.size());
    for (std::size_t j = 0; j < categories.size(); ++j) {
      if (categories[j].empty()) continue;
      out.categories[j].reserve(rows.size());
      for (std::size_t r : rows) out.categories[j].push_back(categories[j][r]);
    }
  }
  return out;
}

FeatureStats ComputeFeatureStats(const Eigen::MatrixXd& features) {
  FeatureStats stats;
  const auto n = static_cast<double>(features.rows());
  stats.means = features.colwise().mean().transpose();
  stats.variances.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    stats.variances[j] =
        (features.col(j).array() - stats.means[j]).square().sum() / n;
  }
  return stats;
}

CsvLoad ParseCsv(const std::string& text, const std::string& response_column,
                 Task task) {
  std::vector<std::vector<std::string>> records;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (Trim(line).empty()) continue;
    records.push_back(SplitRecord(line));
  }
  if (records.empty()) throw DataError("empty CSV file");

  const std::vector<std::string> header = records.front();
  const std::size_t width = header.size();
  const auto response_it =
      std::find(header.begin(), header.end(), response_column);
  if (response_it == header.end()) {
    throw DataError("response column not found: '" + response_column + "'");
  }
  const auto response_index =
      static_cast<std::size_t>(response_it - header.begin());
  const std::size_t data_rows = records.size() - 1;
  if (data_rows == 0) throw DataError("CSV file has a header but no rows");

  // Majority vote decides whether a column is numeric.
  std::vector<bool> numeric(width, false);
  for (std::size_t c = 0; c < width; ++c) {
    std::size_t parsed = 0;
    std::size_t failed = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (c >= records[r].size() || IsMissingToken(records[r][c])) continue;
      (ParseNumber(records[r][c]) ? parsed : failed)++;
    }
    numeric[c] = parsed > failed;
  }
  if (task == Task::kRegression) numeric[response_index] = true;

  std::vector<std::size_t> kept;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    bool ok = rec.size() == width;
    for (std::size_t c = 0; ok && c < width; ++c) {
      if (IsMissingToken(rec[c])) {
        ok = false;
      } else if (numeric[c] && !ParseNumber(rec[c])) {
        ok = false;
      }
    }
    if (ok) kept.push_back(r);
  }
  if (kept.empty()) throw DataError("all rows were dropped while parsing CSV");

  CsvLoad load;
  load.dropped_rows = data_rows - kept.size();
  Dataset& d = load.dataset;
  d.task = task;
  const auto n = static_cast<Eigen::Index>(kept.size());
  const std::size_t k = width - 1;
  d.features = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
  d.response.resize(n);
  d.categories.assign(k, {});

  std::size_t j = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == response_index) continue;
    d.column_names.push_back(header[c]);
    if (numeric[c]) {
      d.column_kinds.push_back(ColumnKind::kNumeric);
      for (Eigen::Index i = 0; i < n; ++i) {
        d.features(i, static_cast<Eigen::Index>(j)) =
            *ParseNumber(records[kept[static_cast<std::size_t>(i)]][c]);
      }
    } else {
      d.column_kinds.push_back(ColumnKind::kCategorical);
      auto& values = d.categories[j];
      values.reserve(kept.size());
      for (std::size_t r : kept) values.push_back(records[r][c]);
    }
    ++j;
  }
  if (!d.HasCategorical()) d.categories.clear();

  if (task == Task::kRegression) {
    for (Eigen::Index i = 0; i < n; ++i) {
      d.response[i] =
          *ParseNumber(records[kept[static_cast<std::size_t>(i)]][response_index]);
    }
  } else if (numeric[response_index]) {
    std::set<double> distinct;
    for (std::size_t r : kept) distinct.insert(*ParseNumber(records[r][response_index]));
    std::map<double, std::size_t> index;
    for (double v : distinct) {
      index.emplace(v, index.size());
      d.class_labels.push_back(FormatDouble(v));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      d.response[i] = static_cast<double>(index.at(
          *ParseNumber(records[kept[static_cast<std::size_t>(i)]][response_index])));
    }
  } else {
    std::set<std::string> distinct;
    for (std::size_t r : kept) distinct.insert(records[r][response_index]);
    std::map<std::string, std::size_t> index;
    for (const auto& v : distinct) {
      index.emplace(v, index.size());
      d.class_labels.push_back(v);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      d.response[i] = static_cast<double>(
          index.at(records[kept[static_cast<std::size_t>(i)]][response_index]));
    }
  }
  return load;
}

CsvLoad LoadCsv(const std::filesystem::path& path,
                const std::string& response_column, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), response_column, task);
}

Dataset OneHotEncode(const Dataset& data) {
  if (!data.HasCategorical()) return data;
  const Eigen::Index n = data.features.rows();

  struct OutColumn {
    std::string name;
    ColumnKind kind;
    std::size_t source;
    std::optional<std::string> category;
  };
  std::vector<OutColumn> layout;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (data.column_kinds[j] != ColumnKind::kCategorical) {
      layout.push_back({data.column_names[j], data.column_kinds[j], j, {}});
      continue;
    }
    const std::set<std::string> distinct(data.categories[j].begin(),
                                         data.categories[j].end());
    if (distinct.size() > kMaxCategories) {
      throw DataError("categorical column '" + data.column_names[j] + "' has " +
                      std::to_string(distinct.size()) +
                      " distinct values; likely an identifier column");
    }
    for (const auto& value : distinct) {
      layout.push_back(
          {data.column_names[j] + "=" + value, ColumnKind::kDummy, j, value});
    }
  }

  Dataset out;
  out.task = data.task;
  out.response = data.response;
  out.class_labels = data.class_labels;
  out.features.resize(n, static_cast<Eigen::Index>(layout.size()));
  for (std::size_t c = 0; c < layout.size(); ++c) {
    const auto& col = layout[c];
    out.column_names.push_back(col.name);
    out.column_kinds.push_back(col.kind);
    const auto oc = static_cast<Eigen::Index>(c);
    if (!col.category) {
      out.features.col(oc) = data.features.col(static_cast<Eigen::Index>(col.source));
      continue;
    }
    const auto& values = data.categories[col.source];
    for (Eigen::Index i = 0; i < n; ++i) {
      out.features(i, oc) =
          values[static_cast<std::size_t>(i)] == *col.category ? 1.0 : 0.0;
    }
  }
  return out;
}

Standardized Standardize(const Dataset& data,
                         const std::optional<FeatureStats>& stats) {
  if (data.HasCategorical()) {
    throw DataError("standardize requires one-hot encoded data");
  }
  Standardized result;
  if (stats) {
    if (static_cast<std::size_t>(stats->means.size()) != data.cols() ||
        static_cast<std::size_t>(stats->variances.size()) != data.cols()) {
      throw InvalidArgument("feature stats length does not match column count");
    }
    result.stats = *stats;
  } else {
    result.stats = ComputeFeatureStats(data.features);
    for (Eigen::Index j = 0; j < result.stats.variances.size(); ++j) {
      const double mean = result.stats.means[j];
      // Rounding leaves a residue in the variance of constant columns.
      if (result.stats.variances[j] <= 1e-24 * std::max(1.0, mean * mean)) {
        result.stats.variances[j] = 0.0;
      }
    }
    if (data.task == Task::kRegression && data.response.size() > 0) {
      result.stats.response_mean = data.response.mean();
    }
  }

  result.dataset = data;
  Eigen::MatrixXd& x = result.dataset.features;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    x.col(j).array() -= result.stats.means[j];
    const double var = result.stats.variances[j];
    if (var > 0.0) x.col(j) /= std::sqrt(var);
  }
  if (data.task == Task::kRegression && result.stats.response_mean) {
    result.dataset.response.array() -= *result.stats.response_mean;
  }
  return result;
}

DataSplit Split(const Dataset& data, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie in (0, 1)");
  }
  if (!(spec.validation_fraction_of_train >= 0.0 &&
        spec.validation_fraction_of_train < 1.0)) {
    throw InvalidArgument("validation fraction must lie in [0, 1)");
  }
  const std::size_t n = data.rows();
  if (n < 5) throw InvalidArgument("split needs at least 5 rows");

  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.test_fraction));
  const std::size_t n_train_full = n - n_test;
  const auto n_val = static_cast<std::size_t>(std::llround(
      static_cast<double>(n_train_full) * spec.validation_fraction_of_train));
  const std::size_t n_train = n_train_full - n_val;
  if (n_test == 0 || n_train == 0 ||
      (spec.validation_fraction_of_train > 0.0 && n_val == 0)) {
    throw InvalidArgument("too few rows (" + std::to_string(n) +
                          ") to populate every partition");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed, StreamPurpose::kSplit);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.Below(i + 1)]);
  }

  const auto begin = order.begin();
  const auto test_end = begin + static_cast<std::ptrdiff_t>(n_test);
  const auto val_end = test_end + static_cast<std::ptrdiff_t>(n_val);
  if (spec.validation_seed) {
    Rng train_rng(*spec.validation_seed, StreamPurpose::kSplit, 1);
    for (std::size_t i = n_train_full - 1; i > 0; --i) {
      std::swap(test_end[static_cast<std::ptrdiff_t>(i)],
                test_end[static_cast<std::ptrdiff_t>(train_rng.Below(i + 1))]);
    }
  }
  DataSplit split;
  split.test = data.Subset({begin, test_end});
  split.validation = data.Subset({test_end, val_end});
  split.train = data.Subset({val_end, order.end()});
  return split;
}

Dataset SynthCorrelated(const SyntheticSpec& spec) {
  const std::size_t k = spec.k;
  if (k == 0) throw InvalidArgument("synthetic data needs k >= 1");
  if (spec.true_beta.size() != k) {
    throw InvalidArgument("true_beta length must equal k");
  }
  if (spec.noise_sd < 0.0) throw InvalidArgument("noise_sd must be >= 0");
  if (!(spec.correlation < 1.0)) {
    throw InvalidArgument("equicorrelation matrix is not positive definite");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(kk, kk, spec.correlation);
  corr.diagonal().setOnes();
  const Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success ||
      (k > 1 && spec.correlation <= -1.0 / static_cast<double>(k - 1))) {
    throw InvalidArgument("equicorrelation matrix is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::Map<const Eigen::VectorXd> beta(spec.true_beta.data(), kk);

  Dataset d;
  d.task = Task::kRegression;
  const auto n = static_cast<Eigen::Index>(spec.n);
  d.features.resize(n, kk);
  d.response.resize(n);
  Eigen::VectorXd z(kk);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(spec.seed, StreamPurpose::kSynthetic, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < kk; ++j) z[j] = normal(rng);
    const double noise = normal(rng);
    d.features.row(i) = (lower * z).transpose();
    d.response[i] = d.features.row(i).dot(beta) + spec.noise_sd * noise;
  }
  for (std::size_t j = 0; j < k; ++j) {
    d.column_names.push_back("x" + std::to_string(j));
    d.column_kinds.push_back(ColumnKind::kNumeric);
  }
  return d;
}

std::string ToCsv(const Dataset& data, const std::string& response_name) {
  if (data.HasCategorical()) {
    throw DataError("cannot write un-encoded categorical columns");
  }
  std::string out;
  for (const auto& name : data.column_names) {
    out += name;
    out += ',';
  }
  out += response_name;
  out += '\n';
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      out += FormatDouble(data.features(i, j));
      out += ',';
    }
    if (data.task == Task::kClassification && !data.class_labels.empty()) {
      out += data.class_labels[static_cast<std::size_t>(data.response[i])];
    } else {
      out += FormatDouble(data.response[i]);
    }
    out += '\n';
  }
  return out;
}

void WriteCsv(const Dataset& data, const std::filesystem::path& path,
              const std::string& response_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file: " + path.string());
  out << ToCsv(data, response_name);
  if (!out) throw DataError("failed writing CSV file: " + path.string());
}

}  // namespace ablate
