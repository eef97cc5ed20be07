// Copyright 2026 The tripseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRIPSEG_RANDOM_H_
#define TRIPSEG_RANDOM_H_

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace tripseg {

// SplitMix64, used only to expand a user seed into generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();

 private:
  std::uint64_t state_;
};

// xoshiro256** seeded from SplitMix64(seed). Every seeded operation in the
// toolkit (frame partitioning, fusion-check instances) draws from this
// generator so outputs are reproducible across platforms and standard
// libraries. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return Next(); }

  std::uint64_t Next();

  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t UniformBelow(std::uint64_t bound);

  // 53-bit uniform double in [0, 1).
  double UniformUnit();

  // Uniform double in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * UniformUnit(); }

 private:
  std::array<std::uint64_t, 4> s_;
};

// Fisher-Yates: for i = n-1 down to 1, swap item i with item
// UniformBelow(i + 1).
template <typename T>
void Shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.UniformBelow(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace tripseg

#endif  // TRIPSEG_RANDOM_H_
