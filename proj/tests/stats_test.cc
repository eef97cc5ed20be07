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
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "testing/oracles.h"
#include "tripseg/error.h"

namespace tripseg {
namespace {

std::vector<FrameKey> Frames(int videos, int per_video) {
  std::vector<FrameKey> out;
  for (int v = 0; v < videos; ++v) {
    for (int f = 0; f < per_video; ++f) out.push_back({"VID" + std::to_string(v), f});
  }
  return out;
}

TEST(PartitionTest, DisjointSortedAndSized) {
  const auto frames = Frames(13, 500);
  const auto p = PartitionFrames(frames, 12, 500, 0);
  ASSERT_EQ(p.subsets.size(), 12u);
  std::set<FrameKey> seen;
  for (const auto& s : p.subsets) {
    EXPECT_EQ(s.size(), 500u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    for (const auto& k : s) EXPECT_TRUE(seen.insert(k).second);
  }
  EXPECT_EQ(seen.size(), 6000u);
}

TEST(PartitionTest, DeterministicPerSeed) {
  const auto frames = Frames(4, 50);
  const auto a = PartitionFrames(frames, 3, 20, 7);
  const auto b = PartitionFrames(frames, 3, 20, 7);
  const auto c = PartitionFrames(frames, 3, 20, 8);
  EXPECT_EQ(a.subsets, b.subsets);
  EXPECT_NE(a.subsets, c.subsets);
  // Input order does not matter beyond the multiset.
  auto reversed = frames;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(PartitionFrames(reversed, 3, 20, 7).subsets, a.subsets);
}

TEST(PartitionTest, RejectsTooFewOrRepeatedFrames) {
  EXPECT_THROW(PartitionFrames(Frames(1, 10), 2, 6, 0), Error);
  auto dup = Frames(1, 10);
  dup.push_back(dup[0]);
  EXPECT_THROW(PartitionFrames(dup, 1, 5, 0), Error);
  EXPECT_NO_THROW(PartitionFrames(Frames(1, 10), 2, 5, 0));
}

TEST(WilcoxonTest, AllPositiveTwelveIsOneOver4096) {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(10 + i * 0.5);
    y.push_back(9);
  }
  const auto r = WilcoxonOneSided(x, y);
  EXPECT_EQ(r.method, WilcoxonMethod::kExact);
  EXPECT_EQ(r.n_effective, 12);
  EXPECT_EQ(r.statistic, 78);
  EXPECT_NEAR(r.p_value, 1.0 / 4096, 1e-15);
}

TEST(WilcoxonTest, MatchesEnumerationWithTiesAndZeros) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      // Small integer grid so ties and zero differences are common.
      x[i] = static_cast<double>(rng() % 7);
      y[i] = static_cast<double>(rng() % 7);
    }
    if (std::equal(x.begin(), x.end(), y.begin())) continue;
    const auto r = WilcoxonOneSided(x, y);
    EXPECT_NEAR(r.p_value, testing::WilcoxonEnumerationP(x, y), 1e-12) << "trial " << trial;
  }
}

TEST(WilcoxonTest, StatisticsOfSwappedSamplesSumToTotal) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 25);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    const auto ab = WilcoxonOneSided(x, y);
    const auto ba = WilcoxonOneSided(y, x);
    EXPECT_DOUBLE_EQ(ab.statistic + ba.statistic, n * (n + 1) / 2.0);
    // P(W >= w) + P(W <= w) = 1 + P(W = w) under the symmetric null.
    EXPECT_GE(ab.p_value + ba.p_value, 1.0 - 1e-12);
    EXPECT_LE(ab.p_value + ba.p_value, 2.0);
  }
}

TEST(WilcoxonTest, ExactAndNormalAgreeForModerateN) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 15 + static_cast<int>(rng() % 6);
    std::vector<double> x(n), y(n);
    const double shift = 0.5 * g(rng);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng) + shift;
      y[i] = g(rng);
    }
    const auto exact = WilcoxonOneSided(x, y, WilcoxonMethod::kExact);
    const auto approx = WilcoxonOneSided(x, y, WilcoxonMethod::kNormalApprox);
    EXPECT_EQ(approx.method, WilcoxonMethod::kNormalApprox);
    worst = std::max(worst, std::abs(exact.p_value - approx.p_value));
  }
  EXPECT_LE(worst, 0.01);
}

TEST(WilcoxonTest, MethodSelectionAndErrors) {
  std::vector<double> x(21), y(21, 0.0);
  for (int i = 0; i < 21; ++i) x[i] = i + 1;
  EXPECT_EQ(WilcoxonOneSided(x, y).method, WilcoxonMethod::kNormalApprox);
  x.pop_back();
  y.pop_back();
  EXPECT_EQ(WilcoxonOneSided(x, y).method, WilcoxonMethod::kExact);
  EXPECT_THROW(WilcoxonOneSided(x, x), Error);
  EXPECT_THROW(WilcoxonOneSided(std::vector<double>{}, std::vector<double>{}), Error);
  EXPECT_THROW(WilcoxonOneSided(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
}

TEST(CompareMethodsTest, MediansAndJson) {
  const std::vector<double> a{40, 42, 41, 43};
  const std::vector<double> b{38, 39, 41, 40};
  const auto c = CompareMethods(a, b);
  EXPECT_EQ(c.deltas, (std::vector<double>{2, 3, 0, 3}));
  EXPECT_DOUBLE_EQ(c.median_a, 41.5);
  EXPECT_DOUBLE_EQ(c.median_b, 39.5);
  EXPECT_DOUBLE_EQ(c.median_delta, 2.5);
  EXPECT_EQ(c.wilcoxon.n_effective, 3);
  EXPECT_NEAR(c.wilcoxon.p_value, 1.0 / 8, 1e-15);
  const Json j = ComparisonToJson(c, {"mAP_IVT_seg", 4, 10, 3});
  EXPECT_EQ(j["metric"], "mAP_IVT_seg");
  EXPECT_EQ(j["per_subset"].size(), 4u);
  EXPECT_EQ(j["wilcoxon"]["method"], "exact");
  EXPECT_EQ(j["seed"], 3);
  EXPECT_NE(FormatComparison(c, {"mAP_IVT_seg", 4, 10, 3}).find("mAP_IVT_seg"), std::string::npos);
}

}  // namespace
}  // namespace tripseg
