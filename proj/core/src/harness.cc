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

#include "ablate/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "ablate/error.h"
#include "ablate/io.h"
#include "ablate/penalty.h"

namespace ablate {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

void ValidateSchedule(const std::vector<std::size_t>& schedule) {
  if (schedule.empty()) throw InvalidArgument("empty N schedule");
  if (schedule.front() == 0) throw InvalidArgument("N schedule must start above 0");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) {
      throw InvalidArgument("N schedule must be strictly increasing");
    }
  }
}

void MeanAndStderr(const std::vector<double>& values, double& mean,
                   double& stderr_out) {
  if (values.empty()) {
    mean = kNaN;
    stderr_out = kNaN;
    return;
  }
  const double n = static_cast<double>(values.size());
  mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) {
    stderr_out = kNaN;
    return;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  stderr_out = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::string CsvField(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

nlohmann::json JsonNumber(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("spearman: inputs differ in length");
  }
  if (x.size() < 2) return kNaN;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) return kNaN;
  }
  return Pearson(AverageRanks(x), AverageRanks(y));
}

double Median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end(), [](double a, double b) {
    // NaN sorts last.
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
  });
  const std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("log-log slope needs two equally long series");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InvalidArgument("log-log slope needs positive values");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

std::vector<std::size_t> GeometricSchedule(std::size_t first, std::size_t last,
                                           std::size_t ratio) {
  if (first == 0 || first > last || ratio < 2) {
    throw InvalidArgument("geometric schedule needs 0 < first <= last, ratio >= 2");
  }
  std::vector<std::size_t> out;
  for (std::size_t n = first; n <= last; n *= ratio) {
    out.push_back(n);
    if (n > last / ratio) break;
  }
  if (out.back() != last) out.push_back(last);
  return out;
}

void ParallelFor(std::size_t count, std::size_t threads,
                 const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

MomentAccumulator::MomentAccumulator(Eigen::VectorXd feature_shift,
                                     double response_shift)
    : shift_(std::move(feature_shift)), response_shift_(response_shift) {
  const Eigen::Index k = shift_.size();
  block_.resize(kBlockRows, k);
  block_y_.resize(kBlockRows);
  sum_ = Eigen::VectorXd::Zero(k);
  xx_ = Eigen::MatrixXd::Zero(k, k);
  xy_ = Eigen::VectorXd::Zero(k);
}

void MomentAccumulator::Add(const Eigen::Ref<const Eigen::VectorXd>& x,
                            double y) {
  block_.row(fill_) = (x - shift_).transpose();
  block_y_[fill_] = y - response_shift_;
  ++fill_;
  ++count_;
  if (fill_ == kBlockRows) Flush();
}

void MomentAccumulator::Flush() {
  if (fill_ == 0) return;
  const auto b = block_.topRows(fill_);
  const auto by = block_y_.head(fill_);
  xx_.noalias() += b.transpose() * b;
  xy_.noalias() += b.transpose() * by;
  sum_ += b.colwise().sum().transpose();
  ysum_ += by.sum();
  fill_ = 0;
}

CenteredMoments MomentAccumulator::Moments() const {
  if (count_ == 0) throw InvalidArgument("no rows accumulated");
  Eigen::MatrixXd xx = xx_;
  Eigen::VectorXd xy = xy_;
  Eigen::VectorXd sum = sum_;
  double ysum = ysum_;
  if (fill_ > 0) {
    const auto b = block_.topRows(fill_);
    const auto by = block_y_.head(fill_);
    xx.noalias() += b.transpose() * b;
    xy.noalias() += b.transpose() * by;
    sum += b.colwise().sum().transpose();
    ysum += by.sum();
  }
  const double n = static_cast<double>(count_);
  const Eigen::VectorXd m = sum / n;
  const double my = ysum / n;
  CenteredMoments out;
  out.n = count_;
  out.feature_means = shift_ + m;
  out.response_mean = response_shift_ + my;
  out.gram = xx - n * m * m.transpose();
  out.gram = 0.5 * (out.gram + out.gram.transpose()).eval();
  out.cross = xy - n * my * m;
  return out;
}

MomentLimits AugmentedMomentLimits(const Dataset& data, AugmentMode mode,
                                   double lambda) {
  ValidateAblationRate(lambda);
  if (data.rows() == 0) throw DataError("moment limits need data");
  const CenteredMoments m = ComputeCenteredMoments(data.features, data.response);
  const double n = static_cast<double>(m.n);
  const Eigen::VectorXd v = m.Variances();
  MomentLimits out;
  if (mode == AugmentMode::kMeanAblation) {
    out.gram = (1.0 - lambda) * (1.0 - lambda) * m.gram / n;
    out.gram.diagonal() += lambda * (1.0 - lambda) * v;
    out.cross = (1.0 - lambda) * m.cross / n;
  } else {
    out.gram = m.gram / n;
    out.gram.diagonal() +=
        lambda / (1.0 - lambda) *
        (v.array() + m.feature_means.array().square()).matrix();
    out.cross = m.cross / n;
  }
  return out;
}

double MomentCheckEntry::z() const {
  const double diff = empirical - limit;
  if (standard_error > 0.0) return diff / standard_error;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::vector<MomentCheckEntry> CheckAugmentedMoments(const Dataset& data,
                                                    AugmentMode mode,
                                                    double lambda,
                                                    std::size_t n_synthetic,
                                                    std::uint64_t seed) {
  if (n_synthetic < 2) throw InvalidArgument("moment check needs N >= 2");
  const MomentLimits limits = AugmentedMomentLimits(data, mode, lambda);
  const AugmentedRowSource source(data, mode, lambda, seed);
  const Eigen::Index k = static_cast<Eigen::Index>(data.cols());
  const Eigen::VectorXd mu = source.means();
  const double mu_y = data.response.mean();

  // Products are taken around the exact population means of the augmented
  // distribution, so each entry is a plain sample mean of i.i.d. terms.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j; l < k; ++l) entries.emplace_back(j, l);
  }
  for (Eigen::Index j = 0; j < k; ++j) entries.emplace_back(j, k);
  const std::size_t e = entries.size();
  std::vector<double> sum(e, 0.0), sum_sq(e, 0.0);
  Eigen::VectorXd x(k), centered(k + 1);
  for (std::size_t i = 0; i < n_synthetic; ++i) {
    const double y = source.Row(i, x);
    centered.head(k) = x - mu;
    centered[k] = y - mu_y;
    for (std::size_t t = 0; t < e; ++t) {
      const double p = centered[entries[t].first] * centered[entries[t].second];
      sum[t] += p;
      sum_sq[t] += p * p;
    }
  }
  const double n = static_cast<double>(n_synthetic);
  std::vector<MomentCheckEntry> out;
  out.reserve(e);
  for (std::size_t t = 0; t < e; ++t) {
    MomentCheckEntry entry;
    entry.row = static_cast<std::size_t>(entries[t].first);
    entry.col = static_cast<std::size_t>(entries[t].second);
    const double mean = sum[t] / n;
    const double var = std::max(0.0, sum_sq[t] / n - mean * mean);
    entry.empirical = mean;
    entry.standard_error = std::sqrt(var * n / (n - 1.0)) / std::sqrt(n);
    entry.limit = entries[t].second == k
                      ? limits.cross[entries[t].first]
                      : limits.gram(entries[t].first, entries[t].second);
    out.push_back(entry);
  }
  return out;
}

// ---------------------------------------------------------------------------

const ConvergencePoint& ConvergenceRun::At(std::size_t seed_index,
                                           std::size_t n_index) const {
  if (seed_index >= seeds.size() || n_index >= schedule.size()) {
    throw InvalidArgument("convergence point index out of range");
  }
  return points.at(seed_index * schedule.size() + n_index);
}

std::vector<double> ConvergenceRun::MedianL2() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    std::vector<double> values;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const double d = At(s, j).l2;
      values.push_back(std::isnan(d) ? std::numeric_limits<double>::infinity()
                                     : d);
    }
    out.push_back(Median(values));
  }
  return out;
}

double ConvergenceRun::MaxFinalLinf() const {
  if (schedule.empty() || seeds.empty()) return kNaN;
  double worst = 0.0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const double d = At(s, schedule.size() - 1).linf;
    if (std::isnan(d)) return kNaN;
    worst = std::max(worst, d);
  }
  return worst;
}

ConvergenceRun ConvergeToClosedForm(const Dataset& data, AugmentMode mode,
                                    double lambda,
                                    const std::vector<std::size_t>& schedule,
                                    const std::vector<std::uint64_t>& seeds,
                                    std::size_t threads) {
  ValidateAblationRate(lambda);
  ValidateSchedule(schedule);
  if (seeds.empty()) throw InvalidArgument("convergence run needs seeds");
  data.Validate();

  ConvergenceRun run;
  run.mode = mode;
  run.lambda = lambda;
  run.schedule = schedule;
  run.seeds = seeds;
  run.closed_form_beta = mode == AugmentMode::kMeanAblation
                             ? FitCcp(data, lambda).model.beta
                             : FitMl2p(data, lambda).model.beta;
  const MomentLimits limits = AugmentedMomentLimits(data, mode, lambda);
  run.points.resize(seeds.size() * schedule.size());

  ParallelFor(seeds.size(), threads, [&](std::size_t s) {
    const AugmentedRowSource source(data, mode, lambda, seeds[s]);
    MomentAccumulator acc(source.means(), data.response.mean());
    Eigen::VectorXd x(static_cast<Eigen::Index>(data.cols()));
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
      for (; row < schedule[j]; ++row) {
        const double y = source.Row(row, x);
        acc.Add(x, y);
      }
      ConvergencePoint& p = run.points[s * schedule.size() + j];
      p.n_synthetic = schedule[j];
      p.seed = seeds[s];
      const CenteredMoments m = acc.Moments();
      const double n = static_cast<double>(m.n);
      p.gram_residual = (m.gram / n - limits.gram).cwiseAbs().maxCoeff();
      p.cross_residual = (m.cross / n - limits.cross).cwiseAbs().maxCoeff();
      try {
        const Eigen::VectorXd diff =
            FitOlsFromMoments(m).beta - run.closed_form_beta;
        p.l2 = diff.norm();
        p.linf = diff.cwiseAbs().maxCoeff();
      } catch (const Error& e) {
        p.l2 = kNaN;
        p.linf = kNaN;
        p.failure = e.what();
      }
    }
  });
  return run;
}

ConvergenceRun ConvergeTheorem1(const Dataset& data, double lambda,
                                const std::vector<std::size_t>& schedule,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t threads) {
  return ConvergeToClosedForm(data, AugmentMode::kMeanAblation, lambda,
                              schedule, seeds, threads);
}

ConvergenceRun ConvergeTheorem2(const Dataset& data, double lambda,
                                const std::vector<std::size_t>& schedule,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t threads) {
  return ConvergeToClosedForm(data, AugmentMode::kInvertedDropout, lambda,
                              schedule, seeds, threads);
}

ConvergenceVerdict JudgeConvergence(const ConvergenceRun& run,
                                    double linf_tolerance) {
  ConvergenceVerdict verdict;
  verdict.max_final_linf = run.MaxFinalLinf();
  verdict.final_within_tolerance = verdict.max_final_linf <= linf_tolerance;
  const std::vector<double> medians = run.MedianL2();
  verdict.median_non_increasing = !medians.empty();
  for (std::size_t j = 1; j < medians.size(); ++j) {
    if (!(medians[j] <= medians[j - 1])) verdict.median_non_increasing = false;
  }
  return verdict;
}

// ---------------------------------------------------------------------------

namespace {

struct PreparedSplit {
  Dataset train, validation, test;
  FeatureStats test_stats;
};

PreparedSplit PrepareSplit(const Dataset& data, const SplitSpec& base,
                           std::uint64_t seed) {
  SplitSpec spec = base;
  spec.validation_seed = seed;
  const DataSplit split = Split(data, spec);
  const Standardized train = Standardize(split.train);
  PreparedSplit out;
  out.train = train.dataset;
  out.validation = Standardize(split.validation, train.stats).dataset;
  out.test = Standardize(split.test, train.stats).dataset;
  out.test_stats = ComputeFeatureStats(out.test.features);
  return out;
}

MlpModel LinearAsMlp(const LinearModel& linear, Task task) {
  const auto k = static_cast<std::size_t>(linear.beta.size());
  MlpModel model = InitMlp(MakeLayerDims(k, 0, 1), task, 0);
  model.layers[0].weights = linear.beta;
  model.layers[0].bias = Eigen::VectorXd::Constant(1, linear.intercept);
  return model;
}

std::size_t OutputCount(const Dataset& data) {
  return data.task == Task::kRegression ? 1 : data.NumClasses();
}

}  // namespace

SweepCell RunSweepCell(const Dataset& data, const SweepConfig& config,
                       std::size_t depth, double lambda, std::uint64_t seed) {
  SweepCell cell;
  cell.depth = depth;
  cell.lambda = lambda;
  cell.seed = seed;
  const std::size_t outputs = OutputCount(data);
  try {
    const PreparedSplit split = PrepareSplit(data, config.split, seed);
    MlpModel model;
    if (depth == 0 && config.closed_form_depth0 &&
        data.task == Task::kRegression) {
      const LinearModel linear =
          config.mode == AugmentMode::kMeanAblation
              ? FitCcp(split.train, lambda).model
              : FitMl2p(split.train, lambda).model;
      model = LinearAsMlp(linear, data.task);
    } else {
      TrainConfig train = config.train;
      train.seed = seed;
      const MlpModel initial =
          InitMlp(MakeLayerDims(data.cols(), depth, outputs), data.task, seed);
      TrainResult result;
      if (config.materialized_rows > 0) {
        train.augment.reset();
        const Dataset augmented = BuildAugmented(
            split.train,
            AugmentSpec{config.mode, lambda, config.materialized_rows, seed});
        result = Train(initial, augmented, split.validation, train);
      } else {
        train.augment = AugmentSpec{config.mode, lambda, 0, seed};
        result = Train(initial, split.train, split.validation, train);
      }
      model = result.model;
      cell.epochs_run = result.log.size();
    }
    if (!model.AllFinite()) throw NumericalError("training diverged");
    const Metrics metrics = Evaluate(model, split.test);
    cell.metric =
        data.task == Task::kRegression ? metrics.mse : metrics.accuracy;

    AttributionConfig ig;
    ig.baseline = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.cols()));
    ig.steps = config.ig_steps;
    for (std::size_t o = 0; o < outputs; ++o) {
      ig.output_index = o;
      const AttributionResult attr =
          IntegratedGradients(model, split.test.features, ig);
      cell.ccp.push_back(CcpFromAttributions(AttributionContributions(attr)));
      cell.ml2p.push_back(
          Ml2pFromAvgGradients(attr.avg_gradients, split.test_stats));
    }
  } catch (const Error& e) {
    cell.failure = e.what();
    cell.metric = kNaN;
    cell.ccp.assign(outputs, kNaN);
    cell.ml2p.assign(outputs, kNaN);
  }
  return cell;
}

SweepResult LambdaSweep(const Dataset& raw, const SweepConfig& config) {
  for (double lambda : config.lambdas) ValidateAblationRate(lambda);
  for (std::size_t depth : config.depths) {
    if (depth > kMaxHiddenLayers) {
      throw InvalidArgument("sweep depth exceeds the hidden layer limit");
    }
  }
  if (config.ig_steps == 0) throw InvalidArgument("sweep needs ig_steps >= 1");
  config.train.Validate();
  const Dataset data = raw.HasCategorical() ? OneHotEncode(raw) : raw;
  data.Validate();

  SweepResult result;
  result.dataset_id = config.dataset_id;
  result.task = data.task;
  result.mode = config.mode;
  result.depths = config.depths;
  result.lambdas = config.lambdas;
  result.seeds = config.seeds;
  result.outputs = OutputCount(data);

  const std::size_t nl = config.lambdas.size();
  const std::size_t ns = config.seeds.size();
  result.cells.resize(config.depths.size() * nl * ns);
  ParallelFor(result.cells.size(), config.threads, [&](std::size_t i) {
    const std::size_t d = i / (nl * ns);
    const std::size_t l = (i / ns) % nl;
    const std::size_t s = i % ns;
    result.cells[i] = RunSweepCell(data, config, config.depths[d],
                                   config.lambdas[l], config.seeds[s]);
  });
  return result;
}

std::vector<SweepAggregate> SweepResult::Aggregate() const {
  std::vector<SweepAggregate> out;
  const std::size_t nl = lambdas.size();
  const std::size_t ns = seeds.size();
  if (ns == 0) return out;
  for (std::size_t d = 0; d < depths.size(); ++d) {
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t o = 0; o < outputs; ++o) {
        std::vector<double> metric, ccp, ml2p;
        for (std::size_t s = 0; s < ns; ++s) {
          const SweepCell& c = cells.at((d * nl + l) * ns + s);
          if (!c.failure.empty()) continue;
          metric.push_back(c.metric);
          ccp.push_back(c.ccp.at(o));
          ml2p.push_back(c.ml2p.at(o));
        }
        SweepAggregate a;
        a.depth = depths[d];
        a.lambda = lambdas[l];
        a.output = o;
        a.count = metric.size();
        MeanAndStderr(metric, a.metric_mean, a.metric_stderr);
        MeanAndStderr(ccp, a.ccp_mean, a.ccp_stderr);
        MeanAndStderr(ml2p, a.ml2p_mean, a.ml2p_stderr);
        out.push_back(a);
      }
    }
  }
  return out;
}

namespace {

std::vector<double> MeanOverSeeds(const SweepResult& sweep, std::size_t depth,
                                  std::size_t output, bool ccp) {
  const auto it = std::find(sweep.depths.begin(), sweep.depths.end(), depth);
  if (it == sweep.depths.end()) throw InvalidArgument("depth not in sweep");
  if (output >= sweep.outputs) throw InvalidArgument("output not in sweep");
  const auto d = static_cast<std::size_t>(it - sweep.depths.begin());
  const std::size_t nl = sweep.lambdas.size();
  const std::size_t ns = sweep.seeds.size();
  std::vector<double> out;
  for (std::size_t l = 0; l < nl; ++l) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const SweepCell& c = sweep.cells.at((d * nl + l) * ns + s);
      if (!c.failure.empty()) continue;
      sum += ccp ? c.ccp.at(output) : c.ml2p.at(output);
      ++count;
    }
    out.push_back(count == 0 ? kNaN : sum / static_cast<double>(count));
  }
  return out;
}

TrendSummary Trend(const SweepResult& sweep, bool ccp) {
  TrendSummary summary;
  double total = 0.0;
  for (std::size_t depth : sweep.depths) {
    for (std::size_t o = 0; o < sweep.outputs; ++o) {
      TrendStat stat;
      stat.depth = depth;
      stat.output = o;
      stat.spearman = Spearman(sweep.lambdas, MeanOverSeeds(sweep, depth, o, ccp));
      total += stat.spearman;
      summary.per_depth.push_back(stat);
    }
  }
  summary.pooled = summary.per_depth.empty()
                       ? kNaN
                       : total / static_cast<double>(summary.per_depth.size());
  return summary;
}

}  // namespace

std::vector<double> SweepResult::MeanCcp(std::size_t depth,
                                         std::size_t output) const {
  return MeanOverSeeds(*this, depth, output, true);
}

std::vector<double> SweepResult::MeanMl2p(std::size_t depth,
                                          std::size_t output) const {
  return MeanOverSeeds(*this, depth, output, false);
}

TrendSummary CcpTrend(const SweepResult& sweep) { return Trend(sweep, true); }
TrendSummary Ml2pTrend(const SweepResult& sweep) { return Trend(sweep, false); }

CrossTrendReport CrossTrendCheck(const SweepResult& sweep_mean,
                                 const SweepResult& sweep_iid) {
  if (sweep_mean.depths != sweep_iid.depths ||
      sweep_mean.lambdas != sweep_iid.lambdas ||
      sweep_mean.seeds != sweep_iid.seeds ||
      sweep_mean.outputs != sweep_iid.outputs ||
      sweep_mean.cells.size() != sweep_iid.cells.size()) {
    throw InvalidArgument("cross-trend check: mismatched sweep shapes");
  }
  if (sweep_mean.lambdas.empty()) {
    throw InvalidArgument("cross-trend check: empty lambda grid");
  }
  CrossTrendReport report;
  const TrendSummary ml2p_trend = Ml2pTrend(sweep_mean);
  report.pooled_ml2p_spearman_under_mean = ml2p_trend.pooled;
  for (const TrendStat& stat : ml2p_trend.per_depth) {
    CrossTrendEntry entry;
    entry.depth = stat.depth;
    entry.output = stat.output;
    entry.ml2p_spearman_under_mean = stat.spearman;
    const std::vector<double> ccp = sweep_iid.MeanCcp(stat.depth, stat.output);
    entry.ccp_abs_first_under_iid = std::abs(ccp.front());
    entry.ccp_abs_last_under_iid = std::abs(ccp.back());
    report.entries.push_back(entry);
  }
  report.zero_contrast = true;
  for (std::size_t i = 0; i < sweep_mean.cells.size(); ++i) {
    const SweepCell& a = sweep_mean.cells[i];
    const SweepCell& b = sweep_iid.cells[i];
    if (a.ccp != b.ccp || a.ml2p != b.ml2p || a.failure != b.failure) {
      report.zero_contrast = false;
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw InvalidArgument("unknown report format '" + name + "'");
}

ReportFormat FormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".json" ? ReportFormat::kJson : ReportFormat::kCsv;
}

std::string FormatSweep(const SweepResult& result, ReportFormat format) {
  const std::size_t nl = result.lambdas.size();
  const std::size_t ns = result.seeds.size();
  const std::string mode = AugmentModeName(result.mode);
  const std::vector<SweepAggregate> aggregates = result.Aggregate();

  if (format == ReportFormat::kJson) {
    nlohmann::json doc;
    doc["dataset"] = result.dataset_id;
    doc["task"] = TaskName(result.task);
    doc["mode"] = mode;
    doc["depths"] = result.depths;
    doc["lambdas"] = result.lambdas;
    doc["seeds"] = result.seeds;
    doc["outputs"] = result.outputs;
    doc["cells"] = nlohmann::json::array();
    for (const SweepCell& c : result.cells) {
      nlohmann::json cell;
      cell["depth"] = c.depth;
      cell["lambda"] = c.lambda;
      cell["seed"] = c.seed;
      cell["metric"] = JsonNumber(c.metric);
      cell["ccp"] = nlohmann::json::array();
      cell["ml2p"] = nlohmann::json::array();
      for (double v : c.ccp) cell["ccp"].push_back(JsonNumber(v));
      for (double v : c.ml2p) cell["ml2p"].push_back(JsonNumber(v));
      cell["epochs"] = c.epochs_run;
      cell["failure"] = c.failure;
      doc["cells"].push_back(cell);
    }
    doc["aggregates"] = nlohmann::json::array();
    for (const SweepAggregate& a : aggregates) {
      nlohmann::json agg;
      agg["depth"] = a.depth;
      agg["lambda"] = a.lambda;
      agg["output"] = a.output;
      agg["count"] = a.count;
      agg["metric_mean"] = JsonNumber(a.metric_mean);
      agg["metric_stderr"] = JsonNumber(a.metric_stderr);
      agg["ccp_mean"] = JsonNumber(a.ccp_mean);
      agg["ccp_stderr"] = JsonNumber(a.ccp_stderr);
      agg["ml2p_mean"] = JsonNumber(a.ml2p_mean);
      agg["ml2p_stderr"] = JsonNumber(a.ml2p_stderr);
      doc["aggregates"].push_back(agg);
    }
    return doc.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "dataset,depth,mode,lambda,seed,output,row,count,metric,metric_stderr,"
         "ccp,ccp_stderr,ml2p,ml2p_stderr,epochs,failure\n";
  const std::string dataset = CsvField(result.dataset_id);
  std::size_t agg_index = 0;
  for (std::size_t d = 0; d < result.depths.size(); ++d) {
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t o = 0; o < result.outputs; ++o) {
        for (std::size_t s = 0; s < ns; ++s) {
          const SweepCell& c = result.cells.at((d * nl + l) * ns + s);
          out << dataset << ',' << c.depth << ',' << mode << ','
              << FormatNumber(c.lambda) << ',' << c.seed << ',' << o
              << ",seed,1," << FormatNumber(c.metric) << ",,"
              << FormatNumber(c.ccp.at(o)) << ",,"
              << FormatNumber(c.ml2p.at(o)) << ",," << c.epochs_run << ','
              << CsvField(c.failure) << '\n';
        }
        if (ns == 0) continue;
        const SweepAggregate& a = aggregates.at(agg_index++);
        out << dataset << ',' << a.depth << ',' << mode << ','
            << FormatNumber(a.lambda) << ",," << o << ",mean," << a.count
            << ',' << FormatNumber(a.metric_mean) << ','
            << FormatNumber(a.metric_stderr) << ',' << FormatNumber(a.ccp_mean)
            << ',' << FormatNumber(a.ccp_stderr) << ','
            << FormatNumber(a.ml2p_mean) << ',' << FormatNumber(a.ml2p_stderr)
            << ",,\n";
      }
    }
  }
  return out.str();
}

namespace {

double JsonToDouble(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

SweepResult SweepFromJson(const std::string& text) {
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    SweepResult result;
    result.dataset_id = doc.at("dataset").get<std::string>();
    result.task = ParseTask(doc.at("task").get<std::string>());
    result.mode = ParseAugmentMode(doc.at("mode").get<std::string>());
    result.depths = doc.at("depths").get<std::vector<std::size_t>>();
    result.lambdas = doc.at("lambdas").get<std::vector<double>>();
    result.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    result.outputs = doc.at("outputs").get<std::size_t>();
    for (const auto& c : doc.at("cells")) {
      SweepCell cell;
      cell.depth = c.at("depth").get<std::size_t>();
      cell.lambda = c.at("lambda").get<double>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      cell.metric = JsonToDouble(c.at("metric"));
      for (const auto& v : c.at("ccp")) cell.ccp.push_back(JsonToDouble(v));
      for (const auto& v : c.at("ml2p")) cell.ml2p.push_back(JsonToDouble(v));
      cell.epochs_run = c.at("epochs").get<std::size_t>();
      cell.failure = c.at("failure").get<std::string>();
      if (cell.ccp.size() != result.outputs || cell.ml2p.size() != result.outputs) {
        throw DataError("sweep cell has the wrong number of outputs");
      }
      result.cells.push_back(std::move(cell));
    }
    if (result.cells.size() !=
        result.depths.size() * result.lambdas.size() * result.seeds.size()) {
      throw DataError("sweep report is missing grid cells");
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid sweep report: ") + e.what());
  }
}

std::string FormatConvergence(const std::vector<ConvergenceRun>& runs,
                              ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::json doc = nlohmann::json::array();
    for (const ConvergenceRun& run : runs) {
      nlohmann::json r;
      r["mode"] = AugmentModeName(run.mode);
      r["lambda"] = run.lambda;
      r["schedule"] = run.schedule;
      r["seeds"] = run.seeds;
      r["closed_form_beta"] = std::vector<double>(
          run.closed_form_beta.data(),
          run.closed_form_beta.data() + run.closed_form_beta.size());
      r["median_l2"] = nlohmann::json::array();
      for (double v : run.MedianL2()) r["median_l2"].push_back(JsonNumber(v));
      r["points"] = nlohmann::json::array();
      for (const ConvergencePoint& p : run.points) {
        nlohmann::json point;
        point["n"] = p.n_synthetic;
        point["seed"] = p.seed;
        point["l2"] = JsonNumber(p.l2);
        point["linf"] = JsonNumber(p.linf);
        point["gram_residual"] = JsonNumber(p.gram_residual);
        point["cross_residual"] = JsonNumber(p.cross_residual);
        point["failure"] = p.failure;
        r["points"].push_back(point);
      }
      doc.push_back(r);
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "mode,lambda,row,seed,n,l2,linf,gram_residual,cross_residual,failure\n";
  for (const ConvergenceRun& run : runs) {
    const std::string mode = AugmentModeName(run.mode);
    for (const ConvergencePoint& p : run.points) {
      out << mode << ',' << FormatNumber(run.lambda) << ",seed," << p.seed
          << ',' << p.n_synthetic << ',' << FormatNumber(p.l2) << ','
          << FormatNumber(p.linf) << ',' << FormatNumber(p.gram_residual)
          << ',' << FormatNumber(p.cross_residual) << ','
          << CsvField(p.failure) << '\n';
    }
    const std::vector<double> medians = run.MedianL2();
    for (std::size_t j = 0; j < run.schedule.size(); ++j) {
      out << mode << ',' << FormatNumber(run.lambda) << ",median,,"
          << run.schedule[j] << ',' << FormatNumber(medians[j]) << ",,,,\n";
    }
  }
  return out.str();
}

std::string FormatCrossTrend(const CrossTrendReport& report) {
  nlohmann::json doc;
  doc["pooled_ml2p_spearman_under_mean"] =
      JsonNumber(report.pooled_ml2p_spearman_under_mean);
  doc["zero_contrast"] = report.zero_contrast;
  doc["entries"] = nlohmann::json::array();
  for (const CrossTrendEntry& e : report.entries) {
    nlohmann::json entry;
    entry["depth"] = e.depth;
    entry["output"] = e.output;
    entry["ml2p_spearman_under_mean"] = JsonNumber(e.ml2p_spearman_under_mean);
    entry["ccp_abs_first_under_iid"] = JsonNumber(e.ccp_abs_first_under_iid);
    entry["ccp_abs_last_under_iid"] = JsonNumber(e.ccp_abs_last_under_iid);
    doc["entries"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

void EmitReport(const SweepResult& result, ReportFormat format,
                const std::filesystem::path& path) {
  WriteTextFile(path, FormatSweep(result, format));
}

}  // namespace ablate
