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

#include "ablate/io.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ablate/error.h"
#include "ablate/harness.h"

namespace ablate {
namespace {

using nlohmann::json;

json Number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double ToDouble(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw DataError("expected a number in JSON document");
  return j.get<double>();
}

json VectorToJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Number(v[i]));
  return out;
}

Eigen::VectorXd VectorFromJson(const json& j) {
  if (!j.is_array()) throw DataError("expected an array in JSON document");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = ToDouble(j[i]);
  }
  return v;
}

json StatsToJson(const FeatureStats& stats) {
  json out;
  out["means"] = VectorToJson(stats.means);
  out["variances"] = VectorToJson(stats.variances);
  if (stats.response_mean) out["response_mean"] = Number(*stats.response_mean);
  return out;
}

FeatureStats StatsFromJson(const json& j) {
  FeatureStats stats;
  stats.means = VectorFromJson(j.at("means"));
  stats.variances = VectorFromJson(j.at("variances"));
  if (stats.means.size() != stats.variances.size()) {
    throw DataError("standardization means and variances differ in length");
  }
  if (j.contains("response_mean")) {
    stats.response_mean = ToDouble(j.at("response_mean"));
  }
  return stats;
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string ModelToJson(const ModelFile& file) {
  json doc;
  doc["beta"] = VectorToJson(file.model.beta);
  doc["intercept"] = Number(file.model.intercept);
  doc["lambda"] = Number(file.lambda);
  doc["penalty_kind"] = PenaltyKindName(file.penalty_kind);
  doc["columns"] = file.columns;
  if (file.standardization) {
    doc["standardization"] = StatsToJson(*file.standardization);
  }
  return doc.dump(2) + "\n";
}

ModelFile ModelFromJson(const std::string& text) {
  const json doc = Parse(text);
  try {
    ModelFile file;
    file.model.beta = VectorFromJson(doc.at("beta"));
    file.model.intercept = ToDouble(doc.at("intercept"));
    file.lambda = doc.contains("lambda") ? ToDouble(doc.at("lambda")) : 0.0;
    file.penalty_kind = doc.contains("penalty_kind")
                            ? ParsePenaltyKind(doc.at("penalty_kind"))
                            : PenaltyKind::kNone;
    if (doc.contains("columns")) {
      file.columns = doc.at("columns").get<std::vector<std::string>>();
    }
    if (doc.contains("standardization")) {
      file.standardization = StatsFromJson(doc.at("standardization"));
    }
    if (!file.columns.empty() &&
        file.columns.size() != static_cast<std::size_t>(file.model.beta.size())) {
      throw DataError("model columns do not match beta length");
    }
    return file;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

void SaveModel(const ModelFile& file, const std::filesystem::path& path) {
  WriteTextFile(path, ModelToJson(file));
}

ModelFile LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(ReadTextFile(path));
}

std::string CheckpointToJson(const Checkpoint& checkpoint) {
  const MlpModel& model = checkpoint.model;
  json doc;
  doc["dims"] = model.layer_dims;
  doc["task"] = TaskName(model.task);
  doc["layers"] = json::array();
  for (const DenseLayer& layer : model.layers) {
    json l;
    json weights = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        weights.push_back(Number(layer.weights(r, c)));
      }
    }
    l["weights"] = std::move(weights);
    l["bias"] = VectorToJson(layer.bias);
    doc["layers"].push_back(std::move(l));
  }
  doc["augment"] = checkpoint.augment_mode;
  doc["lambda"] = Number(checkpoint.lambda);
  doc["best_epoch"] = checkpoint.best_epoch;
  doc["log"] = json::array();
  for (const EpochLog& e : checkpoint.log) {
    doc["log"].push_back({{"epoch", e.epoch},
                          {"train_loss", Number(e.train_loss)},
                          {"validation_loss", Number(e.validation_loss)}});
  }
  doc["columns"] = checkpoint.columns;
  if (!checkpoint.class_labels.empty()) {
    doc["class_labels"] = checkpoint.class_labels;
  }
  if (checkpoint.standardization) {
    doc["standardization"] = StatsToJson(*checkpoint.standardization);
  }
  return doc.dump(2) + "\n";
}

Checkpoint CheckpointFromJson(const std::string& text) {
  const json doc = Parse(text);
  try {
    Checkpoint ckpt;
    MlpModel& model = ckpt.model;
    model.layer_dims = doc.at("dims").get<std::vector<std::size_t>>();
    model.task = ParseTask(doc.at("task").get<std::string>());
    const json& layers = doc.at("layers");
    if (model.layer_dims.size() < 2 ||
        layers.size() != model.layer_dims.size() - 1) {
      throw DataError("checkpoint layer count does not match dims");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto fan_in = static_cast<Eigen::Index>(model.layer_dims[l]);
      const auto fan_out = static_cast<Eigen::Index>(model.layer_dims[l + 1]);
      const Eigen::VectorXd flat = VectorFromJson(layers[l].at("weights"));
      if (flat.size() != fan_in * fan_out) {
        throw DataError("checkpoint weight array has the wrong size");
      }
      DenseLayer layer;
      layer.weights = Eigen::Map<const Eigen::Matrix<
          double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), fan_in, fan_out);
      layer.bias = VectorFromJson(layers[l].at("bias"));
      if (layer.bias.size() != fan_out) {
        throw DataError("checkpoint bias array has the wrong size");
      }
      model.layers.push_back(std::move(layer));
    }
    if (doc.contains("augment")) {
      ckpt.augment_mode = doc.at("augment").get<std::string>();
    }
    if (doc.contains("lambda")) ckpt.lambda = ToDouble(doc.at("lambda"));
    if (doc.contains("best_epoch")) {
      ckpt.best_epoch = doc.at("best_epoch").get<std::size_t>();
    }
    if (doc.contains("log")) {
      for (const json& e : doc.at("log")) {
        EpochLog entry;
        entry.epoch = e.at("epoch").get<std::size_t>();
        entry.train_loss = ToDouble(e.at("train_loss"));
        entry.validation_loss = ToDouble(e.at("validation_loss"));
        ckpt.log.push_back(entry);
      }
    }
    if (doc.contains("columns")) {
      ckpt.columns = doc.at("columns").get<std::vector<std::string>>();
    }
    if (doc.contains("class_labels")) {
      ckpt.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
    }
    if (doc.contains("standardization")) {
      ckpt.standardization = StatsFromJson(doc.at("standardization"));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  WriteTextFile(path, CheckpointToJson(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromJson(ReadTextFile(path));
}

bool IsCheckpointJson(const std::string& text) {
  const json doc = Parse(text);
  return doc.is_object() && doc.contains("dims") && doc.contains("layers");
}

std::string PenaltyReportToJson(const PenaltyReport& report, bool with_ccp,
                                bool with_ml2p) {
  json doc;
  if (with_ccp) doc["ccp"] = Number(report.ccp);
  if (with_ml2p) doc["ml2p"] = Number(report.ml2p);
  doc["n"] = report.n;
  doc["k"] = report.k;
  doc["lambda_context"] =
      report.lambda_context ? Number(*report.lambda_context) : json(nullptr);
  return doc.dump(2) + "\n";
}

std::string AttributionsToCsv(const AttributionResult& result,
                              const std::vector<std::string>& column_names) {
  const Eigen::Index k = result.attributions.cols();
  std::vector<std::string> names = column_names;
  if (names.size() != static_cast<std::size_t>(k)) {
    names.clear();
    for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j));
  }
  std::string out;
  for (const auto& name : names) out += "attr_" + name + ",";
  for (const auto& name : names) out += "avg_grad_" + name + ",";
  out += "gap\n";
  for (Eigen::Index i = 0; i < result.attributions.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out += FormatNumber(result.attributions(i, j));
      out += ',';
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      out += FormatNumber(result.avg_gradients(i, j));
      out += ',';
    }
    out += FormatNumber(result.completeness_gap[i]);
    out += '\n';
  }
  return out;
}

Dataset AlignColumns(const Dataset& data, const std::vector<std::string>& columns) {
  if (data.column_names == columns) return data;
  Dataset out = data;
  out.features.resize(data.features.rows(),
                      static_cast<Eigen::Index>(columns.size()));
  out.column_names = columns;
  out.column_kinds.assign(columns.size(), ColumnKind::kNumeric);
  out.categories.assign(columns.size(), {});
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    std::size_t found = data.column_names.size();
    for (std::size_t c = 0; c < data.column_names.size(); ++c) {
      if (data.column_names[c] == columns[j]) found = c;
    }
    if (found < data.column_names.size()) {
      out.features.col(jj) = data.features.col(static_cast<Eigen::Index>(found));
      out.column_kinds[j] = data.column_kinds[found];
    } else if (columns[j].find('=') != std::string::npos) {
      out.features.col(jj).setZero();
      out.column_kinds[j] = ColumnKind::kDummy;
    } else {
      throw DataError("column '" + columns[j] + "' missing from data");
    }
  }
  return out;
}

}  // namespace ablate
