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

#ifndef TRIPSEG_STATS_H_
#define TRIPSEG_STATS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripseg/dataset_io.h"

namespace tripseg {

struct SubsetPartition {
  std::uint64_t seed = 0;
  std::size_t subset_size = 0;
  std::vector<std::vector<FrameKey>> subsets;  // disjoint; each sorted
};

// Sorts a copy of `frames`, shuffles it with Rng(seed) (Fisher-Yates) and
// cuts the first n_subsets * subset_size entries into consecutive chunks, so
// the result depends only on the set of frames. Remaining frames are unused. Throws Error(kInvalidArgument) if there are not enough
// frames, or if `frames` repeats a key.
SubsetPartition PartitionFrames(const std::vector<FrameKey>& frames,
                                std::size_t n_subsets, std::size_t subset_size,
                                std::uint64_t seed);

enum class WilcoxonMethod { kExact, kNormalApprox };
std::string_view WilcoxonMethodName(WilcoxonMethod method);

// Exact null distribution is used up to this many non-zero differences.
inline constexpr int kWilcoxonExactMaxN = 20;

struct WilcoxonResult {
  double statistic = 0;  // W+, sum of ranks of positive differences
  int n_effective = 0;   // number of non-zero differences
  double p_value = 1;    // P(W+ >= observed) under H0
  WilcoxonMethod method = WilcoxonMethod::kExact;
};

// One-sided signed-rank test of H1: median(x - y) > 0. Zero differences
// are dropped and tied |d| share their average rank. With n_effective <= 20
// the p-value is exact (all 2^n sign assignments); otherwise a normal
// approximation with tie and continuity corrections. `force` pins the
// branch regardless of n. Throws Error(kInvalidArgument) on length mismatch,
// empty input, or when every difference is zero.
WilcoxonResult WilcoxonOneSided(std::span<const double> x, std::span<const double> y,
                                std::optional<WilcoxonMethod> force = std::nullopt);

struct MethodComparison {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> deltas;  // a - b per subset
  double median_a = 0;
  double median_b = 0;
  double median_delta = 0;
  WilcoxonResult wilcoxon;
};

// Paired per-subset metric values; tests whether method a beats method b.
MethodComparison CompareMethods(std::span<const double> a, std::span<const double> b);

struct ComparisonContext {
  std::string metric;
  std::size_t n_subsets = 0;
  std::size_t subset_size = 0;
  std::uint64_t seed = 0;
};

Json ComparisonToJson(const MethodComparison& comparison, const ComparisonContext& context);
std::string FormatComparison(const MethodComparison& comparison,
                             const ComparisonContext& context);

}  // namespace tripseg

#endif  // TRIPSEG_STATS_H_
