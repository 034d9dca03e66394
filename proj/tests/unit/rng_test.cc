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


#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ablate/rng.h"

namespace ablate {
namespace {

TEST(Rng, SameKeySameStream) {
  Rng a(42, StreamPurpose::kMask, 3);
  Rng b(42, StreamPurpose::kMask, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, KeysSeparateStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (auto purpose : {StreamPurpose::kMask, StreamPurpose::kSplit, StreamPurpose::kInit}) {
      for (std::uint64_t index = 0; index < 4; ++index) {
        firsts.insert(Rng(seed, purpose, index)());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 48u);
}

TEST(Rng, UniformMoments) {
  Rng rng(7);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.Below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, BernoulliRate) {
  Rng rng(3);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += rng.Bernoulli(0.3);
  EXPECT_NEAR(hits / 100000.0, 0.3, 0.005);
}

TEST(Rng, MixKeyIsConstexpr) {
  static_assert(MixKey(1, StreamPurpose::kJob, 2) != MixKey(1, StreamPurpose::kJob, 3));
  SUCCEED();
}

}  // namespace
}  // namespace ablate
