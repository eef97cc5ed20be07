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

#include "tripseg/fusion.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "tripseg/error.h"
#include "tripseg/random.h"

namespace tripseg::fusion {
namespace {

using Json = nlohmann::ordered_json;

void Require(bool ok, const std::string& what) {
  if (!ok) Fail(ErrorKind::kInvalidArgument, what);
}

void RequireShape(const Eigen::MatrixBase<auto>& m, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    Fail(ErrorKind::kInvalidArgument,
         std::string(name) + ": expected " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
  }
}

void RequireFinite(const Eigen::MatrixBase<auto>& m, const char* name) {
  if (!m.allFinite()) Fail(ErrorKind::kInvalidArgument, std::string(name) + ": non-finite entry");
}

void CheckParams(const FusionParams& p) {
  const int d = p.dim();
  Require(d >= 1, "fusion params: dim must be >= 1");
  RequireShape(p.w_q, d, d, "W_q");
  RequireShape(p.w_k, d, d, "W_k");
  RequireShape(p.w_v, d, d, "W_v");
  RequireShape(p.w_g, d, d, "W_g");
  RequireShape(p.b_g, 1, d, "b_g");
  Require(p.projection.cols() == d, "P: column count must equal dim");
  RequireFinite(p.w_q, "W_q");
  RequireFinite(p.w_k, "W_k");
  RequireFinite(p.w_v, "W_v");
  RequireFinite(p.w_g, "W_g");
  RequireFinite(p.b_g, "b_g");
  RequireFinite(p.projection, "P");
}

Matrix RowSoftmax(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double m = s.row(r).maxCoeff();
    out.row(r) = (s.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix Sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix Pool(const FeatureLevel& in, int out_h, int out_w) {
  Matrix out(static_cast<Eigen::Index>(out_h) * out_w, in.tokens.cols());
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const auto at = [&](int rr, int cc) { return in.tokens.row(rr * in.width + cc); };
      out.row(r * out_w + c) = 0.25 * (at(2 * r, 2 * c) + at(2 * r, 2 * c + 1) +
                                       at(2 * r + 1, 2 * c) + at(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

// Adjoint of Pool: spreads each pooled gradient evenly over its 2x2 block.
void Unpool(const Matrix& grad, int out_h, int out_w, int in_w, Matrix& into) {
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const auto g = 0.25 * grad.row(r * out_w + c);
      into.row(2 * r * in_w + 2 * c) += g;
      into.row(2 * r * in_w + 2 * c + 1) += g;
      into.row((2 * r + 1) * in_w + 2 * c) += g;
      into.row((2 * r + 1) * in_w + 2 * c + 1) += g;
    }
  }
}

// Intermediates of one forward pass, kept for the backward pass.
struct Tape {
  AnatomyFeatures features;
  Matrix tokens, qp, k, v, weights, attended, gate, out;
};

Tape Forward(const FusionInputs& in) {
  Tape t;
  t.features = EncodeAnatomy(in.logits, in.params.projection, in.levels);
  t.tokens = FlattenTokens(t.features);
  const auto& p = in.params;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.dim()));
  t.qp = in.queries * p.w_q;
  t.k = t.tokens * p.w_k;
  t.v = t.tokens * p.w_v;
  t.weights = RowSoftmax((t.qp * t.k.transpose()) * scale);
  t.attended = t.weights * t.v;
  t.out = GatedFusion(in.queries, t.attended, p.w_g, p.b_g, &t.gate);
  return t;
}

// Mutable views of every differentiable block, in kGradientBlocks order.
template <typename Inputs>
auto Blocks(Inputs& in) {
  auto& p = in.params;
  return std::array<std::pair<double*, Eigen::Index>, 7>{{
      {in.queries.data(), in.queries.size()},
      {p.w_g.data(), p.w_g.size()},
      {p.b_g.data(), p.b_g.size()},
      {p.w_q.data(), p.w_q.size()},
      {p.w_k.data(), p.w_k.size()},
      {p.w_v.data(), p.w_v.size()},
      {p.projection.data(), p.projection.size()},
  }};
}

}  // namespace

AnatomyFeatures EncodeAnatomy(const AnatomyLogits& logits, const Matrix& projection,
                              int levels) {
  Require(levels >= 1, "encode_anatomy: level count must be >= 1");
  Require(logits.height >= 1 && logits.width >= 1, "encode_anatomy: empty logits");
  RequireShape(logits.values, static_cast<Eigen::Index>(logits.height) * logits.width,
               logits.channels(), "logits");
  RequireShape(projection, logits.channels(), projection.cols(), "P");
  RequireFinite(logits.values, "logits");
  const long need = 1L << (levels - 1);
  if (logits.height < need || logits.width < need) {
    Fail(ErrorKind::kInvalidArgument,
         "encode_anatomy: " + std::to_string(logits.height) + "x" +
             std::to_string(logits.width) + " is too small for " + std::to_string(levels) +
             " levels");
  }
  AnatomyFeatures out;
  out.push_back({logits.height, logits.width, logits.values * projection});
  for (int l = 1; l < levels; ++l) {
    const FeatureLevel& prev = out.back();
    const int h = prev.height / 2;
    const int w = prev.width / 2;
    FeatureLevel next{h, w, Pool(prev, h, w)};
    out.push_back(std::move(next));
  }
  return out;
}

Matrix FlattenTokens(const AnatomyFeatures& features) {
  Require(!features.empty(), "flatten: no feature levels");
  const Eigen::Index d = features.front().tokens.cols();
  Eigen::Index rows = 0;
  for (const auto& level : features) {
    Require(level.tokens.cols() == d, "flatten: levels disagree on channel dim");
    RequireShape(level.tokens, static_cast<Eigen::Index>(level.height) * level.width, d,
                 "feature level");
    rows += level.tokens.rows();
  }
  Matrix out(rows, d);
  Eigen::Index at = 0;
  for (const auto& level : features) {
    out.middleRows(at, level.tokens.rows()) = level.tokens;
    at += level.tokens.rows();
  }
  return out;
}

Matrix Attention(const Matrix& queries, const AnatomyFeatures& features,
                 const FusionParams& params, Matrix* weights) {
  CheckParams(params);
  const int d = params.dim();
  Require(queries.rows() >= 1, "attention: no queries");
  RequireShape(queries, queries.rows(), d, "Q");
  RequireFinite(queries, "Q");
  const Matrix tokens = FlattenTokens(features);
  RequireShape(tokens, tokens.rows(), d, "tokens");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix s = ((queries * params.w_q) * (tokens * params.w_k).transpose()) * scale;
  Matrix p = RowSoftmax(s);
  Matrix a = p * (tokens * params.w_v);
  if (weights != nullptr) *weights = std::move(p);
  return a;
}

Matrix GatedFusion(const Matrix& queries, const Matrix& attended, const Matrix& w_g,
                   const RowVector& b_g, Matrix* gate) {
  const Eigen::Index d = queries.cols();
  RequireShape(attended, queries.rows(), d, "A");
  RequireShape(w_g, d, d, "W_g");
  RequireShape(b_g, 1, d, "b_g");
  Matrix z = attended * w_g;
  z.rowwise() += b_g;
  Matrix g = Sigmoid(z);
  Matrix out = queries + g.cwiseProduct(attended).eval();
  if (gate != nullptr) *gate = std::move(g);
  return out;
}

Matrix FusionForward(const FusionInputs& in) {
  const AnatomyFeatures features =
      EncodeAnatomy(in.logits, in.params.projection, in.levels);
  const Matrix a = Attention(in.queries, features, in.params);
  return GatedFusion(in.queries, a, in.params.w_g, in.params.b_g);
}

double FusionLoss(const FusionInputs& in) { return FusionForward(in).squaredNorm(); }

FusionGradients FusionLossGradients(const FusionInputs& in) {
  CheckParams(in.params);
  RequireShape(in.queries, in.queries.rows(), in.params.dim(), "Q");
  const Tape t = Forward(in);
  const auto& p = in.params;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.dim()));

  FusionGradients g;
  const Matrix d_out = 2.0 * t.out;
  const Matrix d_gate = d_out.cwiseProduct(t.attended);
  const Matrix d_z =
      d_gate.cwiseProduct(t.gate).cwiseProduct((1.0 - t.gate.array()).matrix());
  g.w_g = t.attended.transpose() * d_z;
  g.b_g = d_z.colwise().sum();
  const Matrix d_a = d_out.cwiseProduct(t.gate) + d_z * p.w_g.transpose();

  const Matrix d_weights = d_a * t.v.transpose();
  const Matrix d_v = t.weights.transpose() * d_a;
  const Eigen::VectorXd inner = d_weights.cwiseProduct(t.weights).rowwise().sum();
  const Matrix d_s = t.weights.cwiseProduct(d_weights.colwise() - inner);
  const Matrix d_qp = d_s * t.k * scale;
  const Matrix d_k = d_s.transpose() * t.qp * scale;

  g.w_q = in.queries.transpose() * d_qp;
  g.queries = d_out + d_qp * p.w_q.transpose();
  g.w_k = t.tokens.transpose() * d_k;
  g.w_v = t.tokens.transpose() * d_v;

  const Matrix d_tokens = d_k * p.w_k.transpose() + d_v * p.w_v.transpose();
  // Split the token gradient per level, then push deeper levels back down.
  std::vector<Matrix> level_grads;
  Eigen::Index at = 0;
  for (const auto& level : t.features) {
    level_grads.push_back(d_tokens.middleRows(at, level.tokens.rows()));
    at += level.tokens.rows();
  }
  for (size_t l = t.features.size() - 1; l >= 1; --l) {
    const FeatureLevel& fine = t.features[l - 1];
    const FeatureLevel& coarse = t.features[l];
    Unpool(level_grads[l], coarse.height, coarse.width, fine.width, level_grads[l - 1]);
  }
  g.projection = in.logits.values.transpose() * level_grads[0];
  return g;
}

GradCheckReport GradCheck(const FusionInputs& in, const GradCheckOptions& options) {
  Require(options.step > 0, "grad_check: step must be positive");
  FusionGradients analytic = FusionLossGradients(in);
  auto analytic_blocks = std::array<std::pair<double*, Eigen::Index>, 7>{{
      {analytic.queries.data(), analytic.queries.size()},
      {analytic.w_g.data(), analytic.w_g.size()},
      {analytic.b_g.data(), analytic.b_g.size()},
      {analytic.w_q.data(), analytic.w_q.size()},
      {analytic.w_k.data(), analytic.w_k.size()},
      {analytic.w_v.data(), analytic.w_v.size()},
      {analytic.projection.data(), analytic.projection.size()},
  }};
  bool corrupt_known = !options.corrupt_block.has_value();

  FusionInputs work = in;
  auto blocks = Blocks(work);
  GradCheckReport report;
  report.passed = true;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const bool corrupt = options.corrupt_block && *options.corrupt_block == kGradientBlocks[b];
    corrupt_known = corrupt_known || corrupt;
    auto [data, size] = blocks[b];
    double worst = 0;
    for (Eigen::Index i = 0; i < size; ++i) {
      const double saved = data[i];
      data[i] = saved + options.step;
      const double up = FusionLoss(work);
      data[i] = saved - options.step;
      const double down = FusionLoss(work);
      data[i] = saved;
      const double numeric = (up - down) / (2 * options.step);
      double a = analytic_blocks[b].first[i];
      if (corrupt) a = -a;
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    const bool ok = worst <= options.tolerance;
    report.blocks.push_back({kGradientBlocks[b], worst, ok});
    report.passed = report.passed && ok;
  }
  Require(corrupt_known, "grad_check: unknown block '" + options.corrupt_block.value_or("") + "'");
  return report;
}

FusionInputs RandomFusionInputs(std::uint64_t seed, const FusionCheckConfig& c) {
  Require(c.dim >= 1 && c.queries >= 1 && c.channels >= 1 && c.levels >= 1,
          "fusion-check: dimensions must be positive");
  Rng rng(seed);
  auto fill = [&rng](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Uniform(-1.0, 1.0);
    return m;
  };
  FusionInputs in;
  in.levels = c.levels;
  in.queries = fill(c.queries, c.dim);
  in.logits.height = c.height;
  in.logits.width = c.width;
  in.logits.values = fill(static_cast<Eigen::Index>(c.height) * c.width, c.channels);
  in.params.w_q = fill(c.dim, c.dim);
  in.params.w_k = fill(c.dim, c.dim);
  in.params.w_v = fill(c.dim, c.dim);
  in.params.w_g = fill(c.dim, c.dim);
  in.params.b_g = fill(1, c.dim);
  in.params.projection = fill(c.channels, c.dim);
  return in;
}

bool FusionCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.passed; });
}

FusionCheckReport RunFusionChecks(std::uint64_t seed, const FusionCheckConfig& config) {
  Require(config.instances >= 1, "fusion-check: need at least one instance");
  FusionCheckReport report;
  report.seed = seed;
  report.config = config;

  double softmax_dev = 0, gate_lo = 1, gate_hi = 0, identity_dev = 0, half_dev = 0;
  double saturation_ratio = 0, perm_dev = 0, compose_dev = 0, grad_worst = 0;
  bool all_flagged = true;
  int flagged = 0, controls = 0;
  SplitMix64 seeds(seed);
  for (int n = 0; n < config.instances; ++n) {
    const FusionInputs in = RandomFusionInputs(seeds.Next(), config);
    const auto& p = in.params;
    const AnatomyFeatures feats = EncodeAnatomy(in.logits, p.projection, in.levels);
    Matrix weights, gate;
    const Matrix a = Attention(in.queries, feats, p, &weights);
    const Matrix out = GatedFusion(in.queries, a, p.w_g, p.b_g, &gate);

    softmax_dev = std::max(softmax_dev,
                           (weights.rowwise().sum().array() - 1.0).abs().maxCoeff());
    gate_lo = std::min(gate_lo, gate.minCoeff());
    gate_hi = std::max(gate_hi, gate.maxCoeff());

    const Matrix zero = Matrix::Zero(a.rows(), a.cols());
    const Matrix same = GatedFusion(in.queries, zero, p.w_g, p.b_g);
    for (Eigen::Index i = 0; i < same.size(); ++i) {
      // Bitwise comparison: any difference at all counts.
      if (std::memcmp(&same.data()[i], &in.queries.data()[i], sizeof(double)) != 0) {
        identity_dev = std::max(identity_dev,
                                std::max(std::abs(same.data()[i] - in.queries.data()[i]),
                                         std::numeric_limits<double>::min()));
      }
    }

    const Matrix w0 = Matrix::Zero(p.dim(), p.dim());
    const RowVector b0 = RowVector::Zero(p.dim());
    const Matrix half = GatedFusion(in.queries, a, w0, b0);
    half_dev = std::max(half_dev, (half - (in.queries + 0.5 * a)).cwiseAbs().maxCoeff());

    const RowVector b_sat = RowVector::Constant(p.dim(), -20.0);
    const Matrix sat = GatedFusion(in.queries, a, w0, b_sat);
    const double a_max = a.cwiseAbs().maxCoeff();
    if (a_max > 0) {
      saturation_ratio =
          std::max(saturation_ratio, (sat - in.queries).cwiseAbs().maxCoeff() / a_max);
    }

    // Reverse the query rows and compare against the reversed output.
    FusionInputs permuted = in;
    permuted.queries = in.queries.colwise().reverse();
    const Matrix permuted_out = FusionForward(permuted);
    perm_dev = std::max(perm_dev,
                        (permuted_out - Matrix(out.colwise().reverse())).cwiseAbs().maxCoeff());

    compose_dev = std::max(compose_dev, (FusionForward(in) - out).cwiseAbs().maxCoeff());

    const GradCheckReport grads = GradCheck(in);
    for (const auto& block : grads.blocks) {
      grad_worst = std::max(grad_worst, block.max_relative_error);
    }
    if (n == 0) {
      report.gradients = grads;
      for (const char* block : kGradientBlocks) {
        GradCheckOptions corrupt;
        corrupt.corrupt_block = block;
        const bool caught = !GradCheck(in, corrupt).passed;
        ++controls;
        flagged += caught ? 1 : 0;
        all_flagged = all_flagged && caught;
      }
    }
  }

  const double sat_bound = 1.0 / (1.0 + std::exp(20.0));
  report.checks = {
      {"softmax_rows_sum_to_one", softmax_dev <= 1e-12, softmax_dev, 1e-12},
      {"gate_strictly_inside_unit_interval", gate_lo > 0 && gate_hi < 1,
       std::min(gate_lo, 1.0 - gate_hi), 0},
      {"zero_attention_is_identity", identity_dev == 0, identity_dev, 0},
      {"zero_gate_params_give_half_residual", half_dev <= 1e-15, half_dev, 1e-15},
      // Small slack over sigmoid(-20) absorbs the rounding of Q + g*a.
      {"saturated_gate_bound", saturation_ratio <= sat_bound * (1 + 1e-6), saturation_ratio,
       sat_bound},
      {"query_permutation_equivariance", perm_dev <= 1e-12, perm_dev, 1e-12},
      {"forward_equals_composition", compose_dev == 0, compose_dev, 0},
      {"gradients_match_central_differences", grad_worst <= 1e-4, grad_worst, 1e-4},
      {"corrupted_gradient_is_flagged", all_flagged, static_cast<double>(flagged),
       static_cast<double>(controls)},
  };
  return report;
}

Json FusionCheckToJson(const FusionCheckReport& report) {
  Json j;
  j["seed"] = report.seed;
  j["config"] = {{"dim", report.config.dim},         {"queries", report.config.queries},
                 {"height", report.config.height},   {"width", report.config.width},
                 {"channels", report.config.channels}, {"levels", report.config.levels},
                 {"instances", report.config.instances}};
  j["passed"] = report.passed();
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
  }
  j["checks"] = std::move(checks);
  Json blocks = Json::object();
  for (const auto& b : report.gradients.blocks) {
    blocks[b.block] = {{"max_relative_error", b.max_relative_error}, {"passed", b.passed}};
  }
  j["gradient_blocks"] = std::move(blocks);
  return j;
}

std::string FormatFusionCheck(const FusionCheckReport& report) {
  std::ostringstream os;
  char buf[160];
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof(buf), "%-4s %-38s value=%.3e bound=%.3e\n",
                  c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.threshold);
    os << buf;
  }
  for (const auto& b : report.gradients.blocks) {
    std::snprintf(buf, sizeof(buf), "     grad %-4s max_rel_err=%.3e\n", b.block.c_str(),
                  b.max_relative_error);
    os << buf;
  }
  const size_t passed = std::count_if(report.checks.begin(), report.checks.end(),
                                      [](const CheckResult& c) { return c.passed; });
  os << passed << "/" << report.checks.size() << " checks passed (seed " << report.seed << ")\n";
  return os.str();
}

}  // namespace tripseg::fusion
