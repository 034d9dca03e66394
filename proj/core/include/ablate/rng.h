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

// Seedable random streams.
//
// Every random quantity in the library is drawn from a stream identified by
// (seed, purpose, index). The stream key is hashed with SplitMix64 and used to
// seed a xoshiro256** generator, so any row, step or job can be regenerated
// independently of the order in which others were produced. Results are
// bit-stable across runs; normal deviates go through std::normal_distribution
// and are therefore stable per standard library implementation.

#ifndef ABLATE_RNG_H_
#define ABLATE_RNG_H_

#include <cstdint>
#include <limits>

namespace ablate {

// Purposes keep streams that share a seed statistically independent.
enum class StreamPurpose : std::uint64_t {
  kSplit = 1,
  kSynthetic = 2,
  kAugmentRow = 3,
  kMask = 4,
  kBatchMask = 5,
  kInit = 6,
  kShuffle = 7,
  kJob = 8,
};

inline constexpr std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hashes a stream key into a 64-bit value.
inline constexpr std::uint64_t MixKey(std::uint64_t seed, StreamPurpose purpose,
                                      std::uint64_t index) {
  std::uint64_t state = seed;
  std::uint64_t h = SplitMix64(state);
  state = h ^ (static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL);
  h = SplitMix64(state);
  state = h ^ index;
  return SplitMix64(state);
}

// xoshiro256** satisfying UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { Reseed(seed); }
  Rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0)
      : Rng(MixKey(seed, purpose, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t Below(std::uint64_t bound) {
    __extension__ using U128 = unsigned __int128;
    const U128 product = static_cast<U128>((*this)()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
  }

  // True with probability p.
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  static constexpr std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void Reseed(std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto& word : s_) word = SplitMix64(state);
  }

  std::uint64_t s_[4];
};

}  // namespace ablate

#endif  // ABLATE_RNG_H_
