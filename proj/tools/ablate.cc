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

// ablate: command-line front end for the ablate library.
//
// Exit status: 0 on success, 1 on errors, 3 when --check finds a tolerance
// violation.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ablate/ablate.h"

namespace {

using namespace ablate;

constexpr int kCheckFailed = 3;

// --- argument helpers ------------------------------------------------------

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseNumber(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw InvalidArgument("not a number: '" + text + "'");
  return v;
}

// Comma list or inclusive range "start:stop:step".
std::vector<double> ParseGrid(const std::string& text) {
  const std::size_t first = text.find(':');
  if (first == std::string::npos) {
    std::vector<double> out;
    for (const auto& item : SplitList(text)) out.push_back(ParseNumber(item));
    return out;
  }
  const std::size_t second = text.find(':', first + 1);
  if (second == std::string::npos) {
    throw InvalidArgument("range must be start:stop:step");
  }
  const double start = ParseNumber(text.substr(0, first));
  const double stop = ParseNumber(text.substr(first + 1, second - first - 1));
  const double step = ParseNumber(text.substr(second + 1));
  if (!(step > 0.0) || stop < start) throw InvalidArgument("invalid range '" + text + "'");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    // Snap to 12 decimals so 0.1 * 3 reads back as 0.3.
    out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

std::vector<std::size_t> ParseSizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : ParseGrid(text)) {
    if (v < 0 || v != std::floor(v)) throw InvalidArgument("expected integers: '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::uint64_t> SeedRange(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(base + i);
  return out;
}

// --- shared data options -----------------------------------------------------

struct DataOptions {
  std::string path;
  std::string response = "y";
  std::string task = "regression";
  std::size_t synth_n = 2000;
  std::size_t synth_k = 8;
  double synth_rho = 0.6;
  std::string synth_beta;
  double synth_noise = 1.0;
  std::uint64_t synth_seed = 2026;
};

void AddDataOptions(CLI::App* app, DataOptions& o, bool synthetic_fallback) {
  app->add_option("--data", o.path, "Input CSV with a header row");
  app->add_option("--response", o.response, "Response column name")->capture_default_str();
  app->add_option("--task", o.task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}))
      ->capture_default_str();
  if (!synthetic_fallback) return;
  app->add_option("--synth-n", o.synth_n, "Synthetic rows (without --data)")->capture_default_str();
  app->add_option("--synth-k", o.synth_k, "Synthetic features")->capture_default_str();
  app->add_option("--synth-rho", o.synth_rho, "Synthetic equicorrelation")->capture_default_str();
  app->add_option("--synth-beta", o.synth_beta, "Synthetic coefficients, comma separated");
  app->add_option("--synth-noise", o.synth_noise, "Synthetic noise sd")->capture_default_str();
  app->add_option("--synth-seed", o.synth_seed, "Synthetic generator seed")->capture_default_str();
}

std::vector<double> DefaultBeta(std::size_t k) {
  std::vector<double> beta;
  for (std::size_t j = 0; j < k; ++j) {
    beta.push_back(1.0 - 0.7 * static_cast<double>(j) /
                             static_cast<double>(std::max<std::size_t>(k - 1, 1)));
  }
  return beta;
}

Dataset LoadInput(const DataOptions& o, bool synthetic_fallback) {
  if (o.path.empty()) {
    if (!synthetic_fallback) throw InvalidArgument("--data is required");
    SyntheticSpec spec;
    spec.n = o.synth_n;
    spec.k = o.synth_k;
    spec.correlation = o.synth_rho;
    spec.noise_sd = o.synth_noise;
    spec.seed = o.synth_seed;
    spec.true_beta = o.synth_beta.empty() ? DefaultBeta(o.synth_k) : ParseGrid(o.synth_beta);
    return SynthCorrelated(spec);
  }
  CsvLoad load = LoadCsv(o.path, o.response, ParseTask(o.task));
  if (load.dropped_rows > 0) {
    std::cerr << "dropped " << load.dropped_rows << " rows with missing or invalid values\n";
  }
  return load.dataset.HasCategorical() ? OneHotEncode(load.dataset) : load.dataset;
}

std::string DatasetId(const DataOptions& o) {
  if (!o.path.empty()) return std::filesystem::path(o.path).stem().string();
  std::ostringstream id;
  id << "synthetic_n" << o.synth_n << "_k" << o.synth_k << "_rho"
     << FormatNumber(o.synth_rho);
  return id.str();
}

void Emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    WriteTextFile(out, text);
  }
}

Dataset ApplyStoredStats(const Dataset& data, const std::optional<FeatureStats>& stats) {
  if (!stats) return data;
  if (static_cast<std::size_t>(stats->means.size()) != data.cols()) {
    throw DataError("stored standardization does not match the data columns");
  }
  return Standardize(data, stats).dataset;
}

// --- subcommands -------------------------------------------------------------

struct SynthOptions {
  DataOptions data;
  std::string out;
};

int RunSynth(const SynthOptions& o) {
  Emit(o.out, ToCsv(LoadInput(o.data, true), o.data.response));
  return 0;
}

struct AugmentOptions {
  DataOptions data;
  std::string mode = "mean";
  double lambda = 0.5;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

int RunAugment(const AugmentOptions& o) {
  const Dataset data = LoadInput(o.data, false);
  const AugmentSpec spec{ParseAugmentMode(o.mode), o.lambda, o.n, o.seed};
  Emit(o.out, ToCsv(BuildAugmented(data, spec), o.data.response));
  return 0;
}

struct FitOptions {
  DataOptions data;
  std::string method = "ols";
  double lambda = 0.0;
  bool standardize = false;
  std::string out;
};

int RunFit(const FitOptions& o) {
  Dataset data = LoadInput(o.data, false);
  ModelFile file;
  if (o.standardize) {
    Standardized s = Standardize(data);
    data = std::move(s.dataset);
    file.standardization = s.stats;
  }
  file.columns = data.column_names;
  file.penalty_kind = ParsePenaltyKind(o.method);
  file.lambda = file.penalty_kind == PenaltyKind::kNone ? 0.0 : o.lambda;
  switch (file.penalty_kind) {
    case PenaltyKind::kNone:
      file.model = FitOls(data);
      break;
    case PenaltyKind::kCcp:
      file.model = FitCcp(data, o.lambda).model;
      break;
    case PenaltyKind::kMl2p:
      file.model = FitMl2p(data, o.lambda).model;
      break;
  }
  Emit(o.out, ModelToJson(file));
  return 0;
}

struct PenaltyOptions {
  DataOptions data;
  std::string model;
  std::string kind = "both";
  std::size_t steps = kDefaultIgSteps;
  std::size_t output = 0;
  std::string out;
};

int RunPenalty(const PenaltyOptions& o) {
  const std::string text = ReadTextFile(o.model);
  const Dataset raw = LoadInput(o.data, false);
  PenaltyReport report;
  if (IsCheckpointJson(text)) {
    const Checkpoint ckpt = CheckpointFromJson(text);
    const Dataset data = ApplyStoredStats(AlignColumns(raw, ckpt.columns), ckpt.standardization);
    AttributionConfig cfg;
    cfg.baseline = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.cols()));
    cfg.steps = o.steps;
    cfg.output_index = o.output;
    const AttributionResult attr = IntegratedGradients(ckpt.model, data.features, cfg);
    report.ccp = CcpFromAttributions(AttributionContributions(attr));
    report.ml2p = Ml2pFromAvgGradients(attr.avg_gradients, ComputeFeatureStats(data.features));
    report.n = data.rows();
    report.k = data.cols();
    report.lambda_context = ckpt.lambda;
  } else {
    const ModelFile file = ModelFromJson(text);
    const Dataset aligned = file.columns.empty() ? raw : AlignColumns(raw, file.columns);
    const Dataset data = ApplyStoredStats(aligned, file.standardization);
    report = LinearPenaltyReport(file.model, data.features);
    report.lambda_context = file.lambda;
  }
  const bool ccp = o.kind != "ml2p";
  const bool ml2p = o.kind != "ccp";
  Emit(o.out, PenaltyReportToJson(report, ccp, ml2p));
  return 0;
}

struct TrainOptions {
  DataOptions data;
  std::size_t depth = 1;
  double lambda = 0.0;
  std::string mode = "none";
  std::uint64_t seed = 0;
  double test_frac = 0.2;
  double val_frac = 0.25;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  std::size_t patience = 3;
  double learning_rate = 1e-3;
  std::string out;
};

int RunTrain(const TrainOptions& o) {
  const Dataset data = LoadInput(o.data, false);
  SplitSpec split_spec;
  split_spec.test_fraction = o.test_frac;
  split_spec.validation_fraction_of_train = o.val_frac;
  split_spec.seed = o.seed;
  const DataSplit split = Split(data, split_spec);
  const Standardized train = Standardize(split.train);
  const Dataset validation = Standardize(split.validation, train.stats).dataset;
  const Dataset test = Standardize(split.test, train.stats).dataset;

  TrainConfig cfg;
  cfg.adam.learning_rate = o.learning_rate;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.early_stop_patience = o.patience;
  cfg.seed = o.seed;
  if (o.mode != "none") cfg.augment = AugmentSpec{ParseAugmentMode(o.mode), o.lambda, 0, o.seed};

  const std::size_t outputs = data.task == Task::kRegression ? 1 : data.NumClasses();
  const MlpModel initial = InitMlp(MakeLayerDims(data.cols(), o.depth, outputs), data.task, o.seed);
  const TrainResult result = Train(initial, train.dataset, validation, cfg);
  const Metrics metrics = Evaluate(result.model, test);

  Checkpoint ckpt;
  ckpt.model = result.model;
  ckpt.augment_mode = cfg.augment ? AugmentModeName(cfg.augment->mode) : "none";
  ckpt.lambda = cfg.augment ? o.lambda : 0.0;
  ckpt.log = result.log;
  ckpt.best_epoch = result.best_epoch;
  ckpt.columns = data.column_names;
  ckpt.class_labels = data.class_labels;
  ckpt.standardization = train.stats;
  Emit(o.out, CheckpointToJson(ckpt));
  std::cerr << "epochs " << result.log.size() << ", best epoch " << result.best_epoch << ", test "
            << (data.task == Task::kRegression ? "mse " : "accuracy ")
            << FormatNumber(data.task == Task::kRegression ? metrics.mse : metrics.accuracy)
            << "\n";
  return 0;
}

struct AttributeOptions {
  DataOptions data;
  std::string model;
  std::size_t steps = kDefaultIgSteps;
  std::string baseline = "zeros";
  std::string baseline_file;
  std::size_t output = 0;
  std::string quadrature = "midpoint";
  std::string out;
};

int RunAttribute(const AttributeOptions& o) {
  const Checkpoint ckpt = LoadCheckpoint(o.model);
  const Dataset data =
      ApplyStoredStats(AlignColumns(LoadInput(o.data, false), ckpt.columns), ckpt.standardization);
  AttributionConfig cfg;
  cfg.steps = o.steps;
  cfg.output_index = o.output;
  cfg.quadrature = ParseQuadrature(o.quadrature);
  if (o.baseline == "zeros") {
    cfg.baseline = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.cols()));
  } else if (o.baseline == "means") {
    cfg.baseline = data.features.colwise().mean().transpose();
  } else {
    // First data row of a CSV with the model's columns.
    const std::string text = ReadTextFile(o.baseline_file);
    std::istringstream in(text);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    const std::vector<std::string> values = SplitList(row);
    if (values.size() != data.cols()) throw DataError("baseline file needs one value per feature");
    cfg.baseline.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
      cfg.baseline[static_cast<Eigen::Index>(j)] = ParseNumber(values[j]);
    }
  }
  const AttributionResult result = IntegratedGradients(ckpt.model, data.features, cfg);
  Emit(o.out, AttributionsToCsv(result, data.column_names));
  return 0;
}

struct ConvergeOptions {
  DataOptions data;
  int theorem = 1;
  std::string lambdas = "0.1,0.3,0.5,0.7";
  std::size_t n_min = 1000;
  std::size_t n_max = 10000000;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  double tolerance = 0.02;
  bool check = false;
  std::string format;
  std::string out;
};

int RunConverge(const ConvergeOptions& o) {
  const Dataset data = LoadInput(o.data, true);
  const std::vector<std::size_t> schedule = GeometricSchedule(o.n_min, o.n_max);
  const AugmentMode mode =
      o.theorem == 1 ? AugmentMode::kMeanAblation : AugmentMode::kInvertedDropout;
  std::vector<ConvergenceRun> runs;
  bool passed = true;
  for (double lambda : ParseGrid(o.lambdas)) {
    runs.push_back(ConvergeToClosedForm(data, mode, lambda, schedule, SeedRange(o.seed, o.seeds),
                                        o.threads));
    const ConvergenceVerdict v = JudgeConvergence(runs.back(), o.tolerance);
    std::cerr << "lambda " << FormatNumber(lambda) << ": max final linf "
              << FormatNumber(v.max_final_linf)
              << (v.median_non_increasing ? ", median non-increasing" : ", median increased")
              << (v.passed() ? "" : "  [violation]") << "\n";
    passed = passed && v.passed();
  }
  const ReportFormat format =
      o.format.empty() ? FormatFromPath(o.out) : ParseReportFormat(o.format);
  Emit(o.out, FormatConvergence(runs, format));
  return o.check && !passed ? kCheckFailed : 0;
}

struct SweepOptions {
  DataOptions data;
  std::string mode = "mean";
  std::string depths = "0,1,3";
  std::string lambdas = "0:0.9:0.1";
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  double test_frac = 0.2;
  double val_frac = 0.25;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  std::size_t patience = 3;
  double learning_rate = 1e-3;
  std::size_t ig_steps = kDefaultIgSteps;
  bool closed_form_depth0 = false;
  std::size_t materialize = 0;
  std::size_t threads = 0;
  double threshold = -0.8;
  bool check = false;
  std::string format;
  std::string out;
};

SweepConfig MakeSweepConfig(const SweepOptions& o, AugmentMode mode) {
  SweepConfig cfg;
  cfg.dataset_id = DatasetId(o.data);
  cfg.mode = mode;
  cfg.depths = ParseSizes(o.depths);
  cfg.lambdas = ParseGrid(o.lambdas);
  cfg.seeds = SeedRange(o.seed, o.seeds);
  cfg.split.test_fraction = o.test_frac;
  cfg.split.validation_fraction_of_train = o.val_frac;
  cfg.train.epochs = o.epochs;
  cfg.train.batch_size = o.batch_size;
  cfg.train.early_stop_patience = o.patience;
  cfg.train.adam.learning_rate = o.learning_rate;
  cfg.ig_steps = o.ig_steps;
  cfg.closed_form_depth0 = o.closed_form_depth0;
  cfg.materialized_rows = o.materialize;
  cfg.threads = o.threads;
  return cfg;
}

bool ReportTrend(const char* label, const TrendSummary& trend, double threshold, bool below) {
  bool passed = !trend.per_depth.empty();
  for (const TrendStat& t : trend.per_depth) {
    const bool ok = below ? t.spearman <= threshold : t.spearman >= threshold;
    std::cerr << label << " depth " << t.depth << " output " << t.output << ": spearman "
              << FormatNumber(t.spearman) << (ok ? "" : "  [violation]") << "\n";
    passed = passed && ok;
  }
  std::cerr << label << " pooled: " << FormatNumber(trend.pooled) << "\n";
  return passed;
}

int RunSweep(const SweepOptions& o) {
  const Dataset data = LoadInput(o.data, true);
  const AugmentMode mode = ParseAugmentMode(o.mode);
  const SweepResult result = LambdaSweep(data, MakeSweepConfig(o, mode));
  const ReportFormat format =
      o.format.empty() ? FormatFromPath(o.out) : ParseReportFormat(o.format);
  Emit(o.out, FormatSweep(result, format));
  std::size_t failures = 0;
  for (const SweepCell& c : result.cells) failures += c.failure.empty() ? 0 : 1;
  if (failures > 0) std::cerr << failures << " cells failed\n";
  if (result.cells.empty()) return 0;
  const bool passed = mode == AugmentMode::kMeanAblation
                          ? ReportTrend("ccp", CcpTrend(result), o.threshold, true)
                          : ReportTrend("ml2p", Ml2pTrend(result), o.threshold, true);
  return o.check && (!passed || failures > 0) ? kCheckFailed : 0;
}

struct CrossOptions {
  SweepOptions sweep;
  std::string mean_report;
  std::string iid_report;
  double threshold = 0.5;
  bool check = false;
  std::string out;
};

int RunCrossCheck(const CrossOptions& o) {
  SweepResult mean, iid;
  if (!o.mean_report.empty() || !o.iid_report.empty()) {
    if (o.mean_report.empty() || o.iid_report.empty()) {
      throw InvalidArgument("pass both --mean-report and --iid-report");
    }
    mean = SweepFromJson(ReadTextFile(o.mean_report));
    iid = SweepFromJson(ReadTextFile(o.iid_report));
  } else {
    const Dataset data = LoadInput(o.sweep.data, true);
    mean = LambdaSweep(data, MakeSweepConfig(o.sweep, AugmentMode::kMeanAblation));
    iid = LambdaSweep(data, MakeSweepConfig(o.sweep, AugmentMode::kInvertedDropout));
  }
  const CrossTrendReport report = CrossTrendCheck(mean, iid);
  Emit(o.out, FormatCrossTrend(report));
  bool passed = !report.zero_contrast && !report.entries.empty();
  if (report.zero_contrast) std::cerr << "zero contrast: the two sweeps are identical\n";
  for (const CrossTrendEntry& e : report.entries) {
    const bool ok = e.ml2p_spearman_under_mean >= o.threshold &&
                    e.ccp_abs_last_under_iid <= e.ccp_abs_first_under_iid;
    std::cerr << "depth " << e.depth << " output " << e.output << ": ml2p spearman under mean "
              << FormatNumber(e.ml2p_spearman_under_mean) << ", |ccp| under iid "
              << FormatNumber(e.ccp_abs_first_under_iid) << " -> "
              << FormatNumber(e.ccp_abs_last_under_iid) << (ok ? "" : "  [violation]") << "\n";
    passed = passed && ok;
  }
  return o.check && !passed ? kCheckFailed : 0;
}

void AddTrainingOptions(CLI::App* app, SweepOptions& o) {
  app->add_option("--depths", o.depths, "Hidden layer counts (list or range)")->capture_default_str();
  app->add_option("--lambdas", o.lambdas, "Ablation rates (list or start:stop:step)")
      ->capture_default_str();
  app->add_option("--seeds", o.seeds, "Number of seeds")->capture_default_str();
  app->add_option("--seed", o.seed, "First seed")->capture_default_str();
  app->add_option("--test-frac", o.test_frac, "Test fraction")->capture_default_str();
  app->add_option("--val-frac", o.val_frac, "Validation fraction of the remainder")
      ->capture_default_str();
  app->add_option("--epochs", o.epochs, "Maximum epochs")->capture_default_str();
  app->add_option("--batch-size", o.batch_size, "Minibatch size")->capture_default_str();
  app->add_option("--patience", o.patience, "Early-stopping patience")->capture_default_str();
  app->add_option("--lr", o.learning_rate, "Adam learning rate")->capture_default_str();
  app->add_option("--ig-steps", o.ig_steps, "Integrated Gradients steps")->capture_default_str();
  app->add_flag("--closed-form-depth0", o.closed_form_depth0,
                "Use the closed-form solver for depth-0 regression cells");
  app->add_option("--materialize", o.materialize,
                  "Train on a materialized augmented set of this many rows")
      ->capture_default_str();
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ablated data augmentation, closed-form penalties and attribution"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic equicorrelated data set");
  AddDataOptions(synth_cmd, synth.data, true);
  synth_cmd->add_option("--out", synth.out, "Output CSV (default stdout)");

  AugmentOptions augment;
  CLI::App* augment_cmd = app.add_subcommand("augment", "Build an ablated synthetic data set");
  AddDataOptions(augment_cmd, augment.data, false);
  augment_cmd->add_option("--mode", augment.mode, "mean or iid")->capture_default_str();
  augment_cmd->add_option("--lambda", augment.lambda, "Ablation rate")->capture_default_str();
  augment_cmd->add_option("--n", augment.n, "Synthetic rows")->capture_default_str();
  augment_cmd->add_option("--seed", augment.seed, "Seed")->capture_default_str();
  augment_cmd->add_option("--out", augment.out, "Output CSV (default stdout)");

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit OLS or a closed-form penalized model");
  AddDataOptions(fit_cmd, fit.data, false);
  fit_cmd->add_option("--method", fit.method, "ols, ccp or ml2p")
      ->check(CLI::IsMember({"ols", "ccp", "ml2p"}))
      ->capture_default_str();
  fit_cmd->add_option("--lambda", fit.lambda, "Penalty weight in [0, 1)")->capture_default_str();
  fit_cmd->add_flag("--standardize", fit.standardize, "Standardize features before fitting");
  fit_cmd->add_option("--out", fit.out, "Output model JSON (default stdout)");

  PenaltyOptions penalty;
  CLI::App* penalty_cmd = app.add_subcommand("penalty", "Evaluate CCP and ML2P of a model");
  AddDataOptions(penalty_cmd, penalty.data, false);
  penalty_cmd->add_option("--model", penalty.model, "Model JSON or checkpoint")->required();
  penalty_cmd->add_option("--kind", penalty.kind, "ccp, ml2p or both")
      ->check(CLI::IsMember({"ccp", "ml2p", "both"}))
      ->capture_default_str();
  penalty_cmd->add_option("--steps", penalty.steps, "IG steps for checkpoints")->capture_default_str();
  penalty_cmd->add_option("--class", penalty.output, "Output (class logit) index")
      ->capture_default_str();
  penalty_cmd->add_option("--out", penalty.out, "Output report JSON (default stdout)");

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a ReLU network");
  AddDataOptions(train_cmd, train.data, false);
  train_cmd->add_option("--depth", train.depth, "Hidden layers (0-10)")->capture_default_str();
  train_cmd->add_option("--lambda", train.lambda, "Ablation rate")->capture_default_str();
  train_cmd->add_option("--mode", train.mode, "none, mean or iid")
      ->check(CLI::IsMember({"none", "mean", "iid"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Seed")->capture_default_str();
  train_cmd->add_option("--test-frac", train.test_frac, "Test fraction")->capture_default_str();
  train_cmd->add_option("--val-frac", train.val_frac, "Validation fraction of the remainder")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Maximum epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size, "Minibatch size")->capture_default_str();
  train_cmd->add_option("--patience", train.patience, "Early-stopping patience")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output checkpoint JSON (default stdout)");

  AttributeOptions attribute;
  CLI::App* attribute_cmd = app.add_subcommand("attribute", "Integrated Gradients attributions");
  AddDataOptions(attribute_cmd, attribute.data, false);
  attribute_cmd->add_option("--model", attribute.model, "Checkpoint JSON")->required();
  attribute_cmd->add_option("--steps", attribute.steps, "Quadrature steps")->capture_default_str();
  attribute_cmd->add_option("--baseline", attribute.baseline, "zeros, means or file")
      ->check(CLI::IsMember({"zeros", "means", "file"}))
      ->capture_default_str();
  attribute_cmd->add_option("--baseline-file", attribute.baseline_file,
                            "CSV whose first data row is the baseline");
  attribute_cmd->add_option("--class", attribute.output, "Output (class logit) index")
      ->capture_default_str();
  attribute_cmd->add_option("--quadrature", attribute.quadrature, "midpoint, left, right, trapezoid")
      ->capture_default_str();
  attribute_cmd->add_option("--out", attribute.out, "Output CSV (default stdout)");

  ConvergeOptions converge;
  converge.data.synth_n = 200;
  converge.data.synth_k = 3;
  converge.data.synth_rho = 0.8;
  converge.data.synth_beta = "1,-2,3";
  CLI::App* converge_cmd =
      app.add_subcommand("converge", "Monte-Carlo check of augmentation against closed forms");
  AddDataOptions(converge_cmd, converge.data, true);
  converge_cmd->add_option("--theorem", converge.theorem,
                           "1: mean ablation vs CCP, 2: inverted dropout vs ML2P")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  converge_cmd->add_option("--lambdas", converge.lambdas, "Ablation rates")->capture_default_str();
  converge_cmd->add_option("--n-min", converge.n_min, "Smallest N")->capture_default_str();
  converge_cmd->add_option("--n-max", converge.n_max, "Largest N")->capture_default_str();
  converge_cmd->add_option("--seeds", converge.seeds, "Number of seeds")->capture_default_str();
  converge_cmd->add_option("--seed", converge.seed, "First seed")->capture_default_str();
  converge_cmd->add_option("--threads", converge.threads, "Worker threads")->capture_default_str();
  converge_cmd->add_option("--tolerance", converge.tolerance, "Final max-norm tolerance")
      ->capture_default_str();
  converge_cmd->add_flag("--check", converge.check, "Exit nonzero on a tolerance violation");
  converge_cmd->add_option("--format", converge.format, "csv or json (default from --out)");
  converge_cmd->add_option("--out", converge.out, "Output report (default stdout)");

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train and attribute over a lambda grid");
  AddDataOptions(sweep_cmd, sweep.data, true);
  sweep_cmd->add_option("--mode", sweep.mode, "mean or iid")->capture_default_str();
  AddTrainingOptions(sweep_cmd, sweep);
  sweep_cmd->add_option("--threshold", sweep.threshold, "Spearman bound for --check")
      ->capture_default_str();
  sweep_cmd->add_flag("--check", sweep.check, "Exit nonzero on a trend violation");
  sweep_cmd->add_option("--format", sweep.format, "csv or json (default from --out)");
  sweep_cmd->add_option("--out", sweep.out, "Output report (default stdout)");

  CrossOptions cross;
  cross.sweep.seeds = 5;
  CLI::App* cross_cmd =
      app.add_subcommand("cross-check", "Contrast penalty trends between the two modes");
  AddDataOptions(cross_cmd, cross.sweep.data, true);
  AddTrainingOptions(cross_cmd, cross.sweep);
  cross_cmd->add_option("--mean-report", cross.mean_report, "Sweep JSON from --mode mean");
  cross_cmd->add_option("--iid-report", cross.iid_report, "Sweep JSON from --mode iid");
  cross_cmd->add_option("--threshold", cross.threshold, "Spearman bound for --check")
      ->capture_default_str();
  cross_cmd->add_flag("--check", cross.check, "Exit nonzero on a violation");
  cross_cmd->add_option("--out", cross.out, "Output report JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*augment_cmd) return RunAugment(augment);
    if (*fit_cmd) return RunFit(fit);
    if (*penalty_cmd) return RunPenalty(penalty);
    if (*train_cmd) return RunTrain(train);
    if (*attribute_cmd) return RunAttribute(attribute);
    if (*converge_cmd) return RunConverge(converge);
    if (*sweep_cmd) return RunSweep(sweep);
    if (*cross_cmd) return RunCrossCheck(cross);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
