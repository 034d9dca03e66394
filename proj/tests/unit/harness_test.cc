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


#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ablate/error.h"
#include "ablate/harness.h"
#include "ablate/linear.h"
#include "test_util.h"

namespace ablate {
namespace {

std::size_t CountLines(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  std::size_t hits = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.find(needle) != std::string::npos) ++hits;
  }
  return hits;
}

TEST(Spearman, MonotoneAndReversed) {
  EXPECT_DOUBLE_EQ(Spearman({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0);
  EXPECT_DOUBLE_EQ(Spearman({1, 2, 3, 4}, {5, 3, 2, -9}), -1.0);
}

TEST(Spearman, TiesUseAverageRanks) {
  // ranks x: 1 2 3 4, ranks y: 1.5 1.5 3 4
  const double expected = 0.9486832980505138;
  EXPECT_NEAR(Spearman({1, 2, 3, 4}, {0, 0, 1, 2}), expected, 1e-12);
}

TEST(Spearman, ConstantOrNan) {
  EXPECT_TRUE(std::isnan(Spearman({1, 2, 3}, {4, 4, 4})));
  EXPECT_TRUE(std::isnan(Spearman({1, 2, 3}, {1, std::nan(""), 3})));
  EXPECT_THROW(Spearman({1, 2}, {1, 2, 3}), InvalidArgument);
}

TEST(Median, OddEven) {
  EXPECT_DOUBLE_EQ(Median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(Median({4, 1, 3, 2}), 2.5);
}

TEST(LogLogSlope, PowerLaw) {
  std::vector<double> x, y;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    x.push_back(n);
    y.push_back(3.0 / std::sqrt(n));
  }
  EXPECT_NEAR(LogLogSlope(x, y), -0.5, 1e-12);
  EXPECT_THROW(LogLogSlope({1, 2}, {1, 0}), InvalidArgument);
}

TEST(GeometricSchedule, Decades) {
  EXPECT_EQ(GeometricSchedule(1000, 10000000),
            (std::vector<std::size_t>{1000, 10000, 100000, 1000000, 10000000}));
  EXPECT_EQ(GeometricSchedule(5, 5), (std::vector<std::size_t>{5}));
  EXPECT_THROW(GeometricSchedule(0, 5), InvalidArgument);
}

TEST(ParallelFor, VisitsEveryJobOnce) {
  std::vector<std::atomic<int>> hits(100);
  ParallelFor(100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsJobError) {
  EXPECT_THROW(ParallelFor(10, 3,
                           [](std::size_t i) {
                             if (i == 7) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

TEST(MomentAccumulator, MatchesDirectMoments) {
  Eigen::MatrixXd x = testing::RandomMatrix(10000, 3, 1);
  x.col(1).array() += 50.0;
  const Eigen::VectorXd y = testing::RandomMatrix(10000, 1, 2).col(0).array() + 7.0;
  MomentAccumulator acc(Eigen::Vector3d(0.1, 49.0, 0.0), 6.5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) acc.Add(x.row(i).transpose(), y[i]);
  const CenteredMoments direct = ComputeCenteredMoments(x, y);
  const CenteredMoments streamed = acc.Moments();
  EXPECT_EQ(streamed.n, 10000u);
  EXPECT_LT((streamed.gram - direct.gram).cwiseAbs().maxCoeff(), 1e-8 * direct.gram.norm());
  EXPECT_LT((streamed.cross - direct.cross).cwiseAbs().maxCoeff(), 1e-8 * direct.gram.norm());
  EXPECT_NEAR(streamed.response_mean, direct.response_mean, 1e-12);
  EXPECT_LT((streamed.feature_means - direct.feature_means).cwiseAbs().maxCoeff(), 1e-12);
}

Dataset Toy() {
  Dataset d = testing::Correlated(200, 3, 0.8, {1, -2, 3}, 1.0, 2026);
  for (Eigen::Index j = 0; j < 3; ++j) d.features.col(j).array() += 1.0 + static_cast<double>(j);
  return d;
}

TEST(MomentLimits, ZeroRateIsSampleMoments) {
  const Dataset d = Toy();
  const CenteredMoments m = ComputeCenteredMoments(d.features, d.response);
  for (AugmentMode mode : {AugmentMode::kMeanAblation, AugmentMode::kInvertedDropout}) {
    const MomentLimits lim = AugmentedMomentLimits(d, mode, 0.0);
    EXPECT_LT((lim.gram - m.gram / 200.0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((lim.cross - m.cross / 200.0).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MomentLimits, NormalEquationsGiveClosedForms) {
  const Dataset d = Toy();
  const double lambda = 0.3;
  const MomentLimits mean = AugmentedMomentLimits(d, AugmentMode::kMeanAblation, lambda);
  EXPECT_LT((mean.gram.ldlt().solve(mean.cross) - FitCcp(d, lambda).model.beta).cwiseAbs().maxCoeff(),
            1e-10);
  const MomentLimits iid = AugmentedMomentLimits(d, AugmentMode::kInvertedDropout, lambda);
  EXPECT_LT((iid.gram.ldlt().solve(iid.cross) - FitMl2p(d, lambda).model.beta).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(MomentCheck, EmpiricalWithinMonteCarloError) {
  const Dataset d = Toy();
  for (AugmentMode mode : {AugmentMode::kMeanAblation, AugmentMode::kInvertedDropout}) {
    const auto entries = CheckAugmentedMoments(d, mode, 0.5, 200000, 3);
    EXPECT_EQ(entries.size(), 6u + 3u);
    for (const MomentCheckEntry& e : entries) {
      EXPECT_GT(e.standard_error, 0.0);
      EXPECT_LT(std::abs(e.z()), 4.5) << e.row << "," << e.col;
    }
  }
}

std::vector<std::uint64_t> Seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

TEST(Convergence, MeanAblationShrinksTowardCcp) {
  const Dataset d = Toy();
  const ConvergenceRun run = ConvergeTheorem1(d, 0.5, {1000, 10000, 100000}, Seeds(3), 2);
  EXPECT_EQ(run.points.size(), 9u);
  EXPECT_LT((run.closed_form_beta - FitCcp(d, 0.5).model.beta).norm(), 1e-12);
  const std::vector<double> medians = run.MedianL2();
  EXPECT_LT(medians.back(), medians.front());
  const ConvergenceVerdict v = JudgeConvergence(run, 0.1);
  EXPECT_TRUE(v.final_within_tolerance);
  EXPECT_DOUBLE_EQ(v.max_final_linf, run.MaxFinalLinf());
}

TEST(Convergence, InvertedDropoutShrinksTowardMl2p) {
  const Dataset d = Toy();
  const ConvergenceRun run = ConvergeTheorem2(d, 0.3, {1000, 100000}, Seeds(2), 1);
  EXPECT_EQ(run.mode, AugmentMode::kInvertedDropout);
  EXPECT_LT((run.closed_form_beta - FitMl2p(d, 0.3).model.beta).norm(), 1e-12);
  EXPECT_LT(run.MedianL2().back(), run.MedianL2().front());
}

TEST(Convergence, IndependentOfThreadCount) {
  const Dataset d = Toy();
  const ConvergenceRun a = ConvergeTheorem1(d, 0.7, {500, 5000}, Seeds(3), 1);
  const ConvergenceRun b = ConvergeTheorem1(d, 0.7, {500, 5000}, Seeds(3), 3);
  EXPECT_EQ(FormatConvergence({a}, ReportFormat::kCsv), FormatConvergence({b}, ReportFormat::kCsv));
}

TEST(Convergence, ScheduleValidation) {
  const Dataset d = Toy();
  EXPECT_THROW(ConvergeTheorem1(d, 0.5, {}, Seeds(1)), InvalidArgument);
  EXPECT_THROW(ConvergeTheorem1(d, 0.5, {100, 100}, Seeds(1)), InvalidArgument);
  EXPECT_THROW(ConvergeTheorem1(d, 0.5, {100}, {}), InvalidArgument);
}

TEST(Judge, RejectsIncreasingMedian) {
  ConvergenceRun run;
  run.schedule = {10, 100};
  run.seeds = {0};
  run.points = {ConvergencePoint{10, 0, 0.1, 0.1}, ConvergencePoint{100, 0, 0.2, 0.01}};
  const ConvergenceVerdict v = JudgeConvergence(run, 0.02);
  EXPECT_TRUE(v.final_within_tolerance);
  EXPECT_FALSE(v.median_non_increasing);
  EXPECT_FALSE(v.passed());
}

SweepResult Synthetic(std::size_t lambdas, std::size_t seeds) {
  SweepResult r;
  r.dataset_id = "toy";
  r.depths = {0};
  for (std::size_t l = 0; l < lambdas; ++l) r.lambdas.push_back(0.1 * static_cast<double>(l));
  r.seeds = Seeds(seeds);
  for (std::size_t l = 0; l < lambdas; ++l) {
    for (std::size_t s = 0; s < seeds; ++s) {
      SweepCell c;
      c.lambda = r.lambdas[l];
      c.seed = s;
      c.metric = 1.0 + static_cast<double>(s);
      c.ccp = {-static_cast<double>(l) - 0.1 * static_cast<double>(s)};
      c.ml2p = {static_cast<double>(l * l)};
      c.epochs_run = 3;
      r.cells.push_back(c);
    }
  }
  return r;
}

TEST(Report, DetailAndAggregateRows) {
  const std::string csv = FormatSweep(Synthetic(2, 2), ReportFormat::kCsv);
  EXPECT_EQ(CountLines(csv, ",seed,1,"), 4u);
  EXPECT_EQ(CountLines(csv, ",mean,2,"), 2u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("toy,0,mean,0.1,,0,mean,2,1.5,0.5,"),
            std::string::npos)
      << csv;
}

TEST(Report, EmptyGridIsHeaderOnly) {
  const std::string csv = FormatSweep(Synthetic(0, 0), ReportFormat::kCsv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("dataset,depth,mode,lambda,seed", 0), 0u);
}

TEST(Report, FailedCellsExcludedFromAggregate) {
  SweepResult r = Synthetic(1, 3);
  r.cells[1].failure = "training diverged";
  const auto agg = r.Aggregate();
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_EQ(agg[0].count, 2u);
  EXPECT_DOUBLE_EQ(agg[0].metric_mean, 2.0);
  EXPECT_NE(FormatSweep(r, ReportFormat::kCsv).find("training diverged"), std::string::npos);
}

TEST(Report, SingleSeedStderrIsNan) {
  const auto agg = Synthetic(1, 1).Aggregate();
  EXPECT_TRUE(std::isnan(agg[0].ccp_stderr));
}

TEST(Report, JsonRoundTrip) {
  SweepResult r = Synthetic(3, 2);
  r.cells[2].ml2p[0] = std::nan("");
  const SweepResult back = SweepFromJson(FormatSweep(r, ReportFormat::kJson));
  EXPECT_EQ(back.lambdas, r.lambdas);
  EXPECT_EQ(back.seeds, r.seeds);
  ASSERT_EQ(back.cells.size(), r.cells.size());
  EXPECT_EQ(back.cells[3].ccp, r.cells[3].ccp);
  EXPECT_TRUE(std::isnan(back.cells[2].ml2p[0]));
  EXPECT_EQ(FormatSweep(back, ReportFormat::kCsv), FormatSweep(r, ReportFormat::kCsv));
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(-2.0), "-2");
  EXPECT_EQ(FormatNumber(std::nan("")), "nan");
  EXPECT_EQ(FormatNumber(-INFINITY), "-inf");
  EXPECT_EQ(ParseReportFormat("json"), ReportFormat::kJson);
  EXPECT_EQ(FormatFromPath("a/b.json"), ReportFormat::kJson);
  EXPECT_EQ(FormatFromPath("a/b.csv"), ReportFormat::kCsv);
}

TEST(Trend, PerDepthSpearman) {
  const SweepResult r = Synthetic(5, 2);
  const TrendSummary ccp = CcpTrend(r);
  ASSERT_EQ(ccp.per_depth.size(), 1u);
  EXPECT_DOUBLE_EQ(ccp.per_depth[0].spearman, -1.0);
  EXPECT_DOUBLE_EQ(ccp.pooled, -1.0);
  EXPECT_DOUBLE_EQ(Ml2pTrend(r).pooled, 1.0);
  EXPECT_EQ(r.MeanCcp(0, 0).size(), 5u);
  EXPECT_THROW(r.MeanCcp(3, 0), InvalidArgument);
}

TEST(CrossTrend, ShapesAndContrast) {
  const SweepResult a = Synthetic(4, 2);
  SweepResult b = a;
  EXPECT_TRUE(CrossTrendCheck(a, b).zero_contrast);
  for (auto& c : b.cells) c.ccp[0] *= 0.5;
  const CrossTrendReport report = CrossTrendCheck(a, b);
  EXPECT_FALSE(report.zero_contrast);
  ASSERT_EQ(report.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(report.entries[0].ml2p_spearman_under_mean, 1.0);
  EXPECT_NEAR(report.entries[0].ccp_abs_last_under_iid, 0.5 * 3.05, 1e-12);
  EXPECT_NE(FormatCrossTrend(report).find("zero_contrast"), std::string::npos);
  EXPECT_THROW(CrossTrendCheck(a, Synthetic(3, 2)), InvalidArgument);
}

SweepConfig TinySweep() {
  SweepConfig config;
  config.depths = {0, 1};
  config.lambdas = {0.0, 0.5};
  config.seeds = {0, 1};
  config.train.epochs = 3;
  config.train.batch_size = 32;
  config.ig_steps = 8;
  return config;
}

TEST(Sweep, CellProducesFiniteMeasures) {
  const Dataset d = testing::Correlated(150, 3, 0.5, {1, 0.5, 0.25}, 1.0, 30);
  const SweepCell cell = RunSweepCell(d, TinySweep(), 1, 0.5, 4);
  EXPECT_TRUE(cell.failure.empty()) << cell.failure;
  ASSERT_EQ(cell.ccp.size(), 1u);
  EXPECT_TRUE(std::isfinite(cell.ccp[0]));
  EXPECT_GT(cell.ml2p[0], 0.0);
  EXPECT_GT(cell.metric, 0.0);
  EXPECT_GE(cell.epochs_run, 1u);
}

TEST(Sweep, ClosedFormDepthZeroUsesCcpSolution) {
  const Dataset d = testing::Correlated(150, 3, 0.5, {1, 0.5, 0.25}, 1.0, 31);
  SweepConfig config = TinySweep();
  config.closed_form_depth0 = true;
  const SweepCell low = RunSweepCell(d, config, 0, 0.0, 1);
  const SweepCell high = RunSweepCell(d, config, 0, 0.9, 1);
  EXPECT_EQ(low.epochs_run, 0u);
  EXPECT_LT(high.ccp[0], low.ccp[0]);
}

TEST(Sweep, ResultIndependentOfThreads) {
  const Dataset d = testing::Correlated(150, 3, 0.5, {1, 0.5, 0.25}, 1.0, 32);
  SweepConfig config = TinySweep();
  config.threads = 1;
  const SweepResult a = LambdaSweep(d, config);
  config.threads = 4;
  const SweepResult b = LambdaSweep(d, config);
  EXPECT_EQ(a.cells.size(), 8u);
  EXPECT_EQ(FormatSweep(a, ReportFormat::kJson), FormatSweep(b, ReportFormat::kJson));
}

TEST(Sweep, ClassificationHasOneEntryPerClass) {
  Dataset d = testing::Correlated(150, 3, 0.5, {1, 0.5, 0.25}, 1.0, 33);
  d.task = Task::kClassification;
  for (Eigen::Index i = 0; i < d.response.size(); ++i) {
    d.response[i] = d.response[i] < -0.5 ? 0 : (d.response[i] < 0.5 ? 1 : 2);
  }
  d.class_labels = {"lo", "mid", "hi"};
  SweepConfig config = TinySweep();
  config.depths = {1};
  const SweepResult r = LambdaSweep(d, config);
  EXPECT_EQ(r.outputs, 3u);
  EXPECT_EQ(r.cells[0].ccp.size(), 3u);
  EXPECT_EQ(r.Aggregate().size(), 2u * 3u);
  EXPECT_LE(r.cells[0].metric, 1.0);
}

TEST(Sweep, RejectsBadConfig) {
  const Dataset d = testing::Correlated(150, 3, 0.5, {1, 0.5, 0.25}, 1.0, 34);
  SweepConfig config = TinySweep();
  config.depths = {kMaxHiddenLayers + 1};
  EXPECT_THROW(LambdaSweep(d, config), InvalidArgument);
  config = TinySweep();
  config.lambdas = {1.0};
  EXPECT_THROW(LambdaSweep(d, config), InvalidArgument);
}

}  // namespace
}  // namespace ablate
