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

// Experiments built from the library pieces:
//
//  * Convergence runs. OLS fitted on ever larger augmented sets D^lambda_N is
//    compared against the closed-form regularized solution on the original
//    data (CCP for mean ablation, ML2P for inverted dropout).
//  * Lambda sweeps. A network is trained per (depth, lambda, seed) with
//    per-batch augmentation; CCP is measured with Integrated Gradients and
//    ML2P with path-averaged gradients on the test split.
//  * Cross-trend checks contrasting the two augmentation modes.
//
// Every job derives its randomness from its own seed, so results do not
// depend on the number of worker threads.

#ifndef ABLATE_HARNESS_H_
#define ABLATE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ablate/attribution.h"
#include "ablate/augment.h"
#include "ablate/dataset.h"
#include "ablate/linear.h"
#include "ablate/nn.h"

namespace ablate {

// ---------------------------------------------------------------------------
// Statistics helpers.

// Spearman rank correlation with average ranks for ties. Returns NaN when
// either input is constant.
double Spearman(const std::vector<double>& x, const std::vector<double>& y);

double Median(std::vector<double> values);

// Least-squares slope of log(y) against log(x).
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y);

// Geometric schedule first, first*ratio, ... up to and including last.
std::vector<std::size_t> GeometricSchedule(std::size_t first, std::size_t last,
                                           std::size_t ratio = 10);

// Runs jobs [0, count) over up to `threads` workers (0 = hardware). Rethrows
// the first exception after all workers finish.
void ParallelFor(std::size_t count, std::size_t threads,
                 const std::function<void(std::size_t)>& job);

// ---------------------------------------------------------------------------
// Streaming moments of augmented data.

// Accumulates the centered Gram and cross moments of a row stream. Rows are
// shifted by a fixed reference point and summed in fixed-size blocks to limit
// rounding growth over long streams.
class MomentAccumulator {
 public:
  MomentAccumulator(Eigen::VectorXd feature_shift, double response_shift);

  void Add(const Eigen::Ref<const Eigen::VectorXd>& x, double y);
  std::size_t count() const { return count_; }
  CenteredMoments Moments() const;

 private:
  static constexpr Eigen::Index kBlockRows = 4096;
  void Flush();

  Eigen::VectorXd shift_;
  double response_shift_;
  std::size_t count_ = 0;
  Eigen::Index fill_ = 0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> block_;
  Eigen::VectorXd block_y_;
  Eigen::VectorXd sum_;
  double ysum_ = 0.0;
  Eigen::MatrixXd xx_;
  Eigen::VectorXd xy_;
};

struct MomentLimits {
  Eigen::MatrixXd gram;   // limit of (1/N) centered X~^T X~
  Eigen::VectorXd cross;  // limit of (1/N) centered X~^T y~
};

// Almost-sure limits of the per-row augmented moments.
//   mean ablation:     (1-l)^2 G/n + l(1-l) V,        (1-l) c/n
//   inverted dropout:  G/n + l/(1-l) diag(v + mu^2),  c/n
MomentLimits AugmentedMomentLimits(const Dataset& data, AugmentMode mode,
                                   double lambda);

struct MomentCheckEntry {
  std::size_t row = 0;
  std::size_t col = 0;  // == k for the response cross moment
  double empirical = 0.0;
  double limit = 0.0;
  double standard_error = 0.0;
  double z() const;
};

// Compares the empirical per-row moments of the first `n_synthetic` rows of
// D^lambda_N with their limits, entry by entry (upper triangle of the Gram
// plus the cross moment), with a Monte-Carlo standard error for each.
std::vector<MomentCheckEntry> CheckAugmentedMoments(const Dataset& data,
                                                    AugmentMode mode,
                                                    double lambda,
                                                    std::size_t n_synthetic,
                                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Convergence runs.

struct ConvergencePoint {
  std::size_t n_synthetic = 0;
  std::uint64_t seed = 0;
  double l2 = 0.0;    // |beta(D) - beta_closed|_2, NaN when the fit failed
  double linf = 0.0;  // |beta(D) - beta_closed|_inf
  // Max abs deviation of the per-row moments from their limits.
  double gram_residual = 0.0;
  double cross_residual = 0.0;
  std::string failure;  // empty on success
};

struct ConvergenceRun {
  AugmentMode mode = AugmentMode::kMeanAblation;
  double lambda = 0.0;
  std::vector<std::size_t> schedule;
  std::vector<std::uint64_t> seeds;
  Eigen::VectorXd closed_form_beta;
  std::vector<ConvergencePoint> points;  // seed-major, then schedule order

  const ConvergencePoint& At(std::size_t seed_index, std::size_t n_index) const;
  // Median over seeds of the l2 distance at each schedule entry.
  std::vector<double> MedianL2() const;
  double MaxFinalLinf() const;
};

ConvergenceRun ConvergeToClosedForm(const Dataset& data, AugmentMode mode,
                                    double lambda,
                                    const std::vector<std::size_t>& schedule,
                                    const std::vector<std::uint64_t>& seeds,
                                    std::size_t threads = 0);

// Mean ablation vs the CCP closed form.
ConvergenceRun ConvergeTheorem1(const Dataset& data, double lambda,
                                const std::vector<std::size_t>& schedule,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t threads = 0);
// Inverted input dropout vs the ML2P closed form.
ConvergenceRun ConvergeTheorem2(const Dataset& data, double lambda,
                                const std::vector<std::size_t>& schedule,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t threads = 0);

struct ConvergenceVerdict {
  bool final_within_tolerance = false;
  bool median_non_increasing = false;
  double max_final_linf = 0.0;
  bool passed() const { return final_within_tolerance && median_non_increasing; }
};

ConvergenceVerdict JudgeConvergence(const ConvergenceRun& run,
                                    double linf_tolerance);

// ---------------------------------------------------------------------------
// Lambda sweeps.

struct SweepConfig {
  std::string dataset_id = "synthetic";
  std::vector<std::size_t> depths{0, 1, 3};
  AugmentMode mode = AugmentMode::kMeanAblation;
  std::vector<double> lambdas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TrainConfig train;      // augment and seed are set per cell
  SplitSpec split;        // validation_seed is set per cell
  std::size_t ig_steps = kDefaultIgSteps;
  // Depth-0 regression cells use the closed-form solution instead of SGD.
  bool closed_form_depth0 = false;
  // When > 0, trains on a materialized D^lambda_N with this many rows instead
  // of drawing fresh masks per batch.
  std::size_t materialized_rows = 0;
  std::size_t threads = 0;
};

struct SweepCell {
  std::size_t depth = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double metric = 0.0;       // test MSE (regression) or accuracy
  std::vector<double> ccp;   // per output (class logit, or the one output)
  std::vector<double> ml2p;  // per output
  std::size_t epochs_run = 0;
  std::string failure;       // empty on success
};

struct SweepAggregate {
  std::size_t depth = 0;
  double lambda = 0.0;
  std::size_t output = 0;
  std::size_t count = 0;
  double metric_mean = 0.0, metric_stderr = 0.0;
  double ccp_mean = 0.0, ccp_stderr = 0.0;
  double ml2p_mean = 0.0, ml2p_stderr = 0.0;
};

struct SweepResult {
  std::string dataset_id;
  Task task = Task::kRegression;
  AugmentMode mode = AugmentMode::kMeanAblation;
  std::vector<std::size_t> depths;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::size_t outputs = 1;
  // depth-major, then lambda, then seed.
  std::vector<SweepCell> cells;

  std::vector<SweepAggregate> Aggregate() const;
  // Mean over successful seeds, indexed by lambda.
  std::vector<double> MeanCcp(std::size_t depth, std::size_t output) const;
  std::vector<double> MeanMl2p(std::size_t depth, std::size_t output) const;
};

// Trains and attributes one cell; exposed for testing.
SweepCell RunSweepCell(const Dataset& data, const SweepConfig& config,
                       std::size_t depth, double lambda, std::uint64_t seed);

SweepResult LambdaSweep(const Dataset& data, const SweepConfig& config);

struct TrendStat {
  std::size_t depth = 0;
  std::size_t output = 0;
  double spearman = 0.0;
};

struct TrendSummary {
  std::vector<TrendStat> per_depth;
  double pooled = 0.0;  // mean of the per-depth coefficients
};

// Spearman(lambda, mean penalty) per depth and output.
TrendSummary CcpTrend(const SweepResult& sweep);
TrendSummary Ml2pTrend(const SweepResult& sweep);

struct CrossTrendEntry {
  std::size_t depth = 0;
  std::size_t output = 0;
  double ml2p_spearman_under_mean = 0.0;  // expected positive
  double ccp_abs_first_under_iid = 0.0;   // |CCP| at the smallest lambda
  double ccp_abs_last_under_iid = 0.0;    // |CCP| at the largest lambda
};

struct CrossTrendReport {
  std::vector<CrossTrendEntry> entries;
  double pooled_ml2p_spearman_under_mean = 0.0;
  bool zero_contrast = false;  // the two sweeps carry identical values
};

CrossTrendReport CrossTrendCheck(const SweepResult& sweep_mean,
                                 const SweepResult& sweep_iid);

// ---------------------------------------------------------------------------
// Reports. Numbers use the shortest round-trip representation so identical
// results produce byte-identical files.

enum class ReportFormat { kCsv, kJson };
ReportFormat ParseReportFormat(const std::string& name);
ReportFormat FormatFromPath(const std::filesystem::path& path);

std::string FormatSweep(const SweepResult& result, ReportFormat format);
// Reads the JSON form written by FormatSweep.
SweepResult SweepFromJson(const std::string& text);
std::string FormatConvergence(const std::vector<ConvergenceRun>& runs,
                              ReportFormat format);
std::string FormatCrossTrend(const CrossTrendReport& report);

void EmitReport(const SweepResult& result, ReportFormat format,
                const std::filesystem::path& path);

std::string FormatNumber(double value);

}  // namespace ablate

#endif  // ABLATE_HARNESS_H_
