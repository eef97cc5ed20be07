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

#include "tripseg/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tripseg/error.h"
#include "tripseg/random.h"

namespace tripseg {
namespace {

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SubsetPartition PartitionFrames(const std::vector<FrameKey>& frames,
                                std::size_t n_subsets, std::size_t subset_size,
                                std::uint64_t seed) {
  if (n_subsets == 0 || subset_size == 0) {
    Fail(ErrorKind::kInvalidArgument, "n_subsets and subset_size must be positive");
  }
  if (n_subsets > frames.size() / subset_size) {
    Fail(ErrorKind::kInvalidArgument,
         "need " + std::to_string(n_subsets) + " x " + std::to_string(subset_size) +
             " frames but only " + std::to_string(frames.size()) + " are available");
  }
  std::vector<FrameKey> order = frames;
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    Fail(ErrorKind::kInvalidArgument, "frame list contains duplicates");
  }
  Rng rng(seed);
  Shuffle(std::span<FrameKey>(order), rng);
  SubsetPartition partition;
  partition.seed = seed;
  partition.subset_size = subset_size;
  for (std::size_t s = 0; s < n_subsets; ++s) {
    std::vector<FrameKey> subset(order.begin() + s * subset_size,
                                 order.begin() + (s + 1) * subset_size);
    std::sort(subset.begin(), subset.end());
    partition.subsets.push_back(std::move(subset));
  }
  return partition;
}

std::string_view WilcoxonMethodName(WilcoxonMethod method) {
  return method == WilcoxonMethod::kExact ? "exact" : "normal_approx";
}

WilcoxonResult WilcoxonOneSided(std::span<const double> x, std::span<const double> y,
                                std::optional<WilcoxonMethod> force) {
  if (x.size() != y.size()) {
    Fail(ErrorKind::kInvalidArgument, "paired samples differ in length (" +
                                          std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
  }
  if (x.empty()) Fail(ErrorKind::kInvalidArgument, "paired samples are empty");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (!std::isfinite(diff)) Fail(ErrorKind::kInvalidArgument, "non-finite sample value");
    if (diff != 0.0) d.push_back(diff);
  }
  const int n = static_cast<int>(d.size());
  if (n == 0) {
    Fail(ErrorKind::kInvalidArgument, "all paired differences are zero; no test possible");
  }

  // Doubled average ranks are integers: a tie group spanning ranks
  // [first, last] gets first + last.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::fabs(d[a]) < std::fabs(d[b]); });
  std::vector<int> rank2(n);
  double tie_term = 0;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    for (int k = i; k <= j; ++k) rank2[order[k]] = (i + 1) + (j + 1);
    const double t = j - i + 1;
    tie_term += t * t * t - t;
    i = j + 1;
  }
  int w2 = 0;
  for (int i = 0; i < n; ++i) {
    if (d[i] > 0) w2 += rank2[i];
  }

  WilcoxonResult result;
  result.statistic = 0.5 * w2;
  result.n_effective = n;
  result.method = force.value_or(n <= kWilcoxonExactMaxN ? WilcoxonMethod::kExact
                                                         : WilcoxonMethod::kNormalApprox);
  if (result.method == WilcoxonMethod::kExact) {
    if (n > 62) Fail(ErrorKind::kInvalidArgument, "exact test limited to n <= 62");
    // Number of sign assignments reaching each doubled rank sum.
    const int max_sum = n * (n + 1);
    std::vector<double> ways(max_sum + 1, 0.0);
    ways[0] = 1.0;
    int reach = 0;
    for (int r : rank2) {
      for (int s = reach; s >= 0; --s) {
        if (ways[s] != 0.0) ways[s + r] += ways[s];
      }
      reach += r;
    }
    double tail = 0;
    for (int s = w2; s <= max_sum; ++s) tail += ways[s];
    result.p_value = tail / std::ldexp(1.0, n);
  } else {
    const double nn = n;
    const double mean = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double z = (result.statistic - mean - 0.5) / std::sqrt(var);
    result.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  result.p_value = std::clamp(result.p_value, 0.0, 1.0);
  return result;
}

MethodComparison CompareMethods(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kInvalidArgument, "per-subset score lists differ in length (" +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
  }
  MethodComparison c;
  c.a.assign(a.begin(), a.end());
  c.b.assign(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) c.deltas.push_back(a[i] - b[i]);
  c.wilcoxon = WilcoxonOneSided(a, b);
  c.median_a = Median(c.a);
  c.median_b = Median(c.b);
  c.median_delta = Median(c.deltas);
  return c;
}

Json ComparisonToJson(const MethodComparison& c, const ComparisonContext& context) {
  Json out;
  out["metric"] = context.metric;
  out["n_subsets"] = context.n_subsets;
  out["subset_size"] = context.subset_size;
  out["seed"] = context.seed;
  Json per_subset = Json::array();
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    per_subset.push_back({{"a", c.a[i]}, {"b", c.b[i]}});
  }
  out["per_subset"] = std::move(per_subset);
  out["wilcoxon"] = {{"W", c.wilcoxon.statistic},
                     {"n_effective", c.wilcoxon.n_effective},
                     {"p_value", c.wilcoxon.p_value},
                     {"method", WilcoxonMethodName(c.wilcoxon.method)}};
  out["median_a"] = c.median_a;
  out["median_b"] = c.median_b;
  out["median_delta"] = c.median_delta;
  return out;
}

std::string FormatComparison(const MethodComparison& c, const ComparisonContext& context) {
  std::ostringstream out;
  char buf[160];
  out << context.metric << " over " << context.n_subsets << " subsets of "
      << context.subset_size << " frames (seed " << context.seed << ")\n";
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "  subset %2zu: a=%8.3f b=%8.3f delta=%+8.3f\n", i,
                  c.a[i], c.b[i], c.deltas[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "median a=%.3f b=%.3f delta=%+.3f\n"
                "one-sided Wilcoxon signed-rank (a > b): W=%.1f n=%d p=%.6g (%s)\n",
                c.median_a, c.median_b, c.median_delta, c.wilcoxon.statistic,
                c.wilcoxon.n_effective, c.wilcoxon.p_value,
                std::string(WilcoxonMethodName(c.wilcoxon.method)).c_str());
  out << buf;
  return out.str();
}

}  // namespace tripseg
