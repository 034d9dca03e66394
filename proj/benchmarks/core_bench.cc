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


#include <random>

#include <benchmark/benchmark.h>

#include "ablate/augment.h"
#include "ablate/dataset.h"
#include "ablate/harness.h"
#include "ablate/linear.h"
#include "ablate/penalty.h"

namespace ablate {
namespace {

Dataset Data(std::size_t n, std::size_t k) {
  SyntheticSpec spec;
  spec.n = n;
  spec.k = k;
  spec.correlation = 0.5;
  spec.true_beta.assign(k, 1.0);
  spec.seed = 1;
  return SynthCorrelated(spec);
}

void BM_FitCcp(benchmark::State& state) {
  const Dataset d = Data(2000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(FitCcp(d, 0.5));
}
BENCHMARK(BM_FitCcp)->Arg(8)->Arg(32)->Arg(128);

void BM_FitMl2p(benchmark::State& state) {
  const Dataset d = Data(2000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(FitMl2p(d, 0.5));
}
BENCHMARK(BM_FitMl2p)->Arg(8)->Arg(32)->Arg(128);

void BM_CcpVarianceForm(benchmark::State& state) {
  const Dataset d = Data(static_cast<std::size_t>(state.range(0)), 16);
  const LinearModel m{Eigen::VectorXd::Ones(16), 0.0};
  const ContributionMatrix c = ContributionsLinear(m, d.features);
  for (auto _ : state) benchmark::DoNotOptimize(CcpVarianceForm(c));
}
BENCHMARK(BM_CcpVarianceForm)->Arg(1000)->Arg(100000);

void BM_BuildAugmented(benchmark::State& state) {
  const Dataset d = Data(200, 8);
  const auto mode = state.range(1) == 0 ? AugmentMode::kMeanAblation : AugmentMode::kInvertedDropout;
  AugmentSpec spec{mode, 0.5, static_cast<std::size_t>(state.range(0)), 3};
  for (auto _ : state) benchmark::DoNotOptimize(BuildAugmented(d, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildAugmented)->Args({100000, 0})->Args({100000, 1});

void BM_StreamedMoments(benchmark::State& state) {
  const Dataset d = Data(200, 3);
  const AugmentedRowSource source(d, AugmentMode::kMeanAblation, 0.3, 5);
  const auto rows = static_cast<std::uint64_t>(state.range(0));
  Eigen::VectorXd x(3);
  for (auto _ : state) {
    MomentAccumulator acc(source.means(), d.response.mean());
    for (std::uint64_t i = 0; i < rows; ++i) {
      const double y = source.Row(i, x);
      acc.Add(x, y);
    }
    benchmark::DoNotOptimize(acc.Moments());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StreamedMoments)->Arg(1000000);

}  // namespace
}  // namespace ablate

BENCHMARK_MAIN();
