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

#ifndef TRIPSEG_FUSION_H_
#define TRIPSEG_FUSION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace tripseg::fusion {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Tissue-class logits of one frame: row (r * width + c) holds the channel
// vector of pixel (r, c).
struct AnatomyLogits {
  int height = 0;
  int width = 0;
  Matrix values;  // (height * width) x channels

  int channels() const { return static_cast<int>(values.cols()); }
};

// One scale of the anatomy feature pyramid, laid out like AnatomyLogits.
struct FeatureLevel {
  int height = 0;
  int width = 0;
  Matrix tokens;  // (height * width) x dim
};

using AnatomyFeatures = std::vector<FeatureLevel>;

// Row-vector convention throughout: a query row q is projected as q * w_q.
struct FusionParams {
  Matrix w_q;         // dim x dim
  Matrix w_k;         // dim x dim
  Matrix w_v;         // dim x dim
  Matrix w_g;         // dim x dim
  RowVector b_g;      // dim
  Matrix projection;  // channels x dim, pixel-wise anatomy embedding

  int dim() const { return static_cast<int>(w_q.rows()); }
};

// Everything one forward pass consumes.
struct FusionInputs {
  Matrix queries;  // num_queries x dim
  AnatomyLogits logits;
  FusionParams params;
  int levels = 1;
};

// Level 0 is logits.values * projection; level l is the 2x2 average pool of
// level l-1 (floor division of both extents). Throws
// Error(kInvalidArgument) if levels < 1 or the frame is smaller than
// 2^(levels-1) in either direction.
AnatomyFeatures EncodeAnatomy(const AnatomyLogits& logits, const Matrix& projection,
                              int levels);

// Stacks all levels (level 0 first, row-major within a level) into one
// token matrix.
Matrix FlattenTokens(const AnatomyFeatures& features);

// softmax((Q w_q)(T w_k)^T / sqrt(dim)) (T w_v) over the flattened tokens T.
// When `weights` is given it receives the softmax matrix.
Matrix Attention(const Matrix& queries, const AnatomyFeatures& features,
                 const FusionParams& params, Matrix* weights = nullptr);

// Q + sigmoid(A w_g + b_g) ⊙ A, row by row. When `gate` is given it
// receives the sigmoid matrix.
Matrix GatedFusion(const Matrix& queries, const Matrix& attended, const Matrix& w_g,
                   const RowVector& b_g, Matrix* gate = nullptr);

Matrix FusionForward(const FusionInputs& in);

// ||FusionForward(in)||_F^2 and its analytic gradients.
double FusionLoss(const FusionInputs& in);

struct FusionGradients {
  Matrix queries;
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
  Matrix w_g;
  RowVector b_g;
  Matrix projection;
};

FusionGradients FusionLossGradients(const FusionInputs& in);

// Block names in report order.
inline constexpr const char* kGradientBlocks[] = {"Q",   "W_g", "b_g", "W_q",
                                                  "W_k", "W_v", "P"};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative errors use max(|analytic|, |numeric|, abs_floor) as the
  // denominator so entries that are zero up to rounding do not blow up.
  double abs_floor = 1e-6;
  // Negative control: flip the sign of this block's analytic gradient.
  std::optional<std::string> corrupt_block;
};

struct BlockError {
  std::string block;
  double max_relative_error = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<BlockError> blocks;
  bool passed = false;
};

// Compares every analytic gradient entry with the central difference
// (L(x + h) - L(x - h)) / 2h.
GradCheckReport GradCheck(const FusionInputs& in, const GradCheckOptions& options = {});

struct FusionCheckConfig {
  int dim = 8;
  int queries = 4;
  int height = 4;
  int width = 4;
  int channels = 6;
  int levels = 2;
  int instances = 5;
};

// Seeded instance with entries uniform in [-1, 1).
FusionInputs RandomFusionInputs(std::uint64_t seed, const FusionCheckConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0;      // worst observed quantity
  double threshold = 0;  // bound it is held to
};

struct FusionCheckReport {
  std::uint64_t seed = 0;
  FusionCheckConfig config;
  std::vector<CheckResult> checks;
  // Gradient errors of the first instance, for the per-block dump.
  GradCheckReport gradients;

  bool passed() const;
};

// The full invariant and gradient suite on config.instances seeded
// instances.
FusionCheckReport RunFusionChecks(std::uint64_t seed, const FusionCheckConfig& config = {});

nlohmann::ordered_json FusionCheckToJson(const FusionCheckReport& report);
std::string FormatFusionCheck(const FusionCheckReport& report);

}  // namespace tripseg::fusion

#endif  // TRIPSEG_FUSION_H_
