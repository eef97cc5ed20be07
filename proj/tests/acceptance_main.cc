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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional: TRIPSEG_RELEASE_DIR (+ TRIPSEG_RELEASE_SCHEMA) points
// at a real ground-truth release for the dataset statistics check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "testing/fixtures.h"
#include "testing/oracles.h"
#include "testing/synth.h"
#include "tripseg/alignment.h"
#include "tripseg/cli.h"
#include "tripseg/dataset_io.h"
#include "tripseg/eval.h"
#include "tripseg/fusion.h"
#include "tripseg/mask.h"
#include "tripseg/stats.h"

namespace tripseg {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

int RunCliArgs(std::vector<std::string> args, std::string* out_text) {
  args.insert(args.begin(), "tripseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

EvalConfig Config(EvalMode mode, int jobs = 1) {
  EvalConfig c;
  c.mode = mode;
  c.jobs = jobs;
  return c;
}

Outcome OracleEquivalence() {
  const TripletSchema& s = testing::FixtureSchema();
  std::mt19937_64 rng(20240601);
  std::vector<testing::MicroInstance> instances;
  for (int i = 0; i < 1000; ++i) instances.push_back(testing::RandomMicroInstance(rng, s));
  double worst = 0;
  std::int64_t classes = 0;
  double eval_seconds = 0;
  for (const auto& inst : instances) {
    for (EvalMode mode : {EvalMode::kSeg, EvalMode::kDet}) {
      const auto start = Clock::now();
      const EvalReport r = EvaluateGrounded(inst.gt, inst.preds, Config(mode), s);
      eval_seconds += Seconds(start);
      for (const auto& comp : r.components) {
        const auto want = testing::OracleGroundedAps(inst.gt, inst.preds, mode == EvalMode::kSeg,
                                                     0.5, comp.component, s);
        if (want.size() != comp.per_class_ap.size()) return {false, "class sets differ"};
        for (const auto& [cls, ap] : want) {
          const auto it = comp.per_class_ap.find(cls);
          if (it == comp.per_class_ap.end()) return {false, "missing class"};
          worst = std::max(worst, std::abs(it->second / 100.0 - ap));
          ++classes;
        }
      }
    }
  }
  return {worst <= 1e-9 && eval_seconds < 60.0,
          Fmt("1000 instances x {seg,det}, %lld class APs, max |diff| %.2e, eval %.2fs (1 thread)",
              static_cast<long long>(classes), worst, eval_seconds)};
}

Outcome PerfectPrediction() {
  const TripletSchema& s = testing::FixtureSchema();
  std::vector<std::vector<FrameRecord>> fixtures{
      ReadGroundTruth(testing::DataPath("gt_small"), s)};
  std::mt19937_64 rng(7);
  while (fixtures.size() < 101) {
    auto inst = testing::RandomMicroInstance(rng, s);
    bool any = false;
    for (const auto& f : inst.gt) {
      for (const auto& g : f.instances) any = any || g.grounded();
    }
    if (any) fixtures.push_back(std::move(inst.gt));
  }
  int checked = 0;
  for (const auto& gt : fixtures) {
    const EvalReport seg = EvaluateGrounded(gt, testing::ClonePredictions(gt), Config(EvalMode::kSeg), s);
    const EvalReport det =
        EvaluateGrounded(gt, testing::ClonePredictions(gt, true), Config(EvalMode::kDet), s);
    const EvalReport rec =
        EvaluateRecognition(gt, testing::OneHotRecognition(gt, s.num_triplets()), Config(EvalMode::kRec), s);
    for (const EvalReport* r : {&seg, &det, &rec}) {
      if (r->components.size() != 6) return {false, "expected six components"};
      for (const auto& c : r->components) {
        if (!(c.map == 100.0)) {
          return {false, Fmt("%s mAP_%s = %.17g", std::string(EvalModeName(r->mode)).c_str(),
                             std::string(ComponentName(c.component)).c_str(), c.map)};
        }
        ++checked;
      }
    }
  }
  return {true, Fmt("%zu fixtures, %d mAP values all exactly 100.0", fixtures.size(), checked)};
}

Outcome CodecRoundTrip() {
  std::mt19937_64 rng(99);
  std::vector<RleMask> masks;
  for (int i = 0; i < 1000; ++i) {
    const int h = 1 + static_cast<int>(rng() % 48), w = 1 + static_cast<int>(rng() % 48);
    masks.push_back(testing::NaiveEncode(testing::RandomBlob(rng, h, w, 0.2, true)));
  }
  for (const auto& m : masks) {
    if (!(RleEncode(RleDecode(m)) == m)) return {false, "encode(decode(m)) != m"};
  }
  int pairs = 0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const RleMask& a = masks[i];
    // Partner of the same size: a perturbed copy.
    const RleMask b = testing::NaiveEncode(testing::Perturb(rng, testing::NaiveDecode(a), 0.15));
    for (const RleMask* other : {&a, &b}) {
      const MaskOverlap o = ComputeOverlap(a, *other);
      const auto [inter, uni] = testing::PixelOverlap(a, *other);
      if (static_cast<std::int64_t>(o.intersection) != inter ||
          static_cast<std::int64_t>(o.union_area) != uni) {
        return {false, Fmt("overlap mismatch on mask %zu", i)};
      }
      ++pairs;
    }
  }
  return {true, Fmt("1000 masks round-trip; %d overlaps equal pixel counts exactly", pairs)};
}

std::vector<FrameRecord> RecFrames(const std::vector<std::vector<int>>& labels) {
  std::vector<FrameRecord> gt;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    gt.push_back({"VID01", static_cast<int>(i), 4, 4, {}, labels[i]});
  }
  return gt;
}

RecognitionRecord RecScores(int frame, const std::vector<std::pair<int, double>>& scores) {
  RecognitionRecord r{"VID01", frame, std::vector<double>(100, 0.0)};
  for (auto [t, v] : scores) r.scores[t] = v;
  return r;
}

Outcome RecognitionAp() {
  const TripletSchema& s = testing::FixtureSchema();
  double worst = 0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const auto two = RecFrames({{5}, {}});
  const auto hit = EvaluateRecognition(two, {RecScores(0, {{5, 0.9}}), RecScores(1, {{5, 0.2}})},
                                       Config(EvalMode::kRec), s);
  const auto miss = EvaluateRecognition(two, {RecScores(0, {{5, 0.2}}), RecScores(1, {{5, 0.9}})},
                                        Config(EvalMode::kRec), s);
  for (const auto& c : hit.components) check(c.map, 100.0);
  for (const auto& c : miss.components) check(c.map, 50.0);
  const auto three = EvaluateRecognition(
      RecFrames({{3}, {9}, {3}}),
      {RecScores(0, {{3, 0.6}}), RecScores(1, {{3, 0.8}, {9, 0.7}}), RecScores(2, {{3, 0.1}})},
      Config(EvalMode::kRec), s);
  check(three.Find(Component::kIVT)->per_class_ap.at(3), 100.0 * (0.5 + 2.0 / 3) / 2);
  check(three.Find(Component::kIVT)->per_class_ap.at(9), 100.0);
  check(three.Find(Component::kI)->map, 100.0);
  const double hand = worst;

  // Max projection against per-triplet enumeration.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FrameRecord> gt;
  std::vector<RecognitionRecord> recs;
  for (int f = 0; f < 10; ++f) {
    std::vector<int> labels;
    for (int k = 1 + static_cast<int>(rng() % 3); k > 0; --k) labels.push_back(static_cast<int>(rng() % 100));
    std::sort(labels.begin(), labels.end());
    gt.push_back({"VID01", f, 4, 4, {}, labels});
    RecognitionRecord r{"VID01", f, {}};
    for (int t = 0; t < 100; ++t) r.scores.push_back(u(rng));
    recs.push_back(r);
  }
  const auto report = EvaluateRecognition(gt, recs, Config(EvalMode::kRec), s);
  int classes = 0;
  for (Component c : kAllComponents) {
    std::map<int, std::vector<std::pair<double, bool>>> items;
    for (int f = 0; f < 10; ++f) {
      std::map<int, double> best;
      for (int t = 0; t < 100; ++t) {
        const int cls = testing::OracleClass(s, t, c);
        best[cls] = std::max(best.count(cls) ? best[cls] : 0.0, recs[f].scores[t]);
      }
      for (auto [cls, score] : best) {
        bool pos = false;
        for (int t : gt[f].frame_triplets) pos = pos || testing::OracleClass(s, t, c) == cls;
        items[cls].push_back({score, pos});
      }
    }
    const auto& got = report.Find(c)->per_class_ap;
    for (auto& [cls, list] : items) {
      const auto g = std::count_if(list.begin(), list.end(), [](auto& x) { return x.second; });
      if (g == 0) {
        if (got.count(cls)) return {false, "zero-GT class reported"};
        continue;
      }
      if (!got.count(cls)) return {false, "class missing"};
      check(got.at(cls) / 100.0, testing::OracleAp(list, g, false));
      ++classes;
    }
  }
  return {worst <= 1e-12,
          Fmt("hand fixtures max |diff| %.1e (incl. 2-frame AP 0.5); 10-frame max projection, "
              "%d classes, max |diff| %.1e", hand, classes, worst)};
}

Outcome WilcoxonExactness() {
  std::mt19937_64 rng(5);
  double worst = 0;
  int cases = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 0; k < 60; ++k) {
      std::vector<double> x(n), y(n);
      for (int i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng() % 7);
        y[i] = static_cast<double>(rng() % 7);
      }
      if (std::equal(x.begin(), x.end(), y.begin())) continue;
      worst = std::max(worst, std::abs(WilcoxonOneSided(x, y).p_value -
                                       testing::WilcoxonEnumerationP(x, y)));
      ++cases;
    }
  }
  std::vector<double> pos(12), zero(12, 0.0);
  for (int i = 0; i < 12; ++i) pos[i] = 1 + 0.1 * i;
  const double p12 = WilcoxonOneSided(pos, zero).p_value;
  std::normal_distribution<double> g;
  double gap = 0;
  for (int k = 0; k < 300; ++k) {
    const int n = 15 + static_cast<int>(rng() % 6);
    std::vector<double> x(n), y(n);
    const double shift = 0.5 * g(rng);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng) + shift;
      y[i] = g(rng);
    }
    gap = std::max(gap, std::abs(WilcoxonOneSided(x, y, WilcoxonMethod::kExact).p_value -
                                 WilcoxonOneSided(x, y, WilcoxonMethod::kNormalApprox).p_value));
  }
  return {worst <= 1e-12 && std::abs(p12 - 1.0 / 4096) <= 1e-15 && gap <= 0.01,
          Fmt("%d cases n<=12 max |diff| %.1e; n=12 all positive p=%.10g; exact vs normal "
              "n in [15,20] max gap %.4f", cases, worst, p12, gap)};
}

Outcome FusionMath() {
  const fusion::FusionCheckReport report = fusion::RunFusionChecks(0);
  const char* required[] = {"softmax_rows_sum_to_one", "zero_attention_is_identity",
                            "zero_gate_params_give_half_residual",
                            "gradients_match_central_differences", "corrupted_gradient_is_flagged"};
  std::string detail;
  bool ok = report.passed();
  for (const char* name : required) {
    const auto it = std::find_if(report.checks.begin(), report.checks.end(),
                                 [&](const auto& c) { return c.name == name; });
    if (it == report.checks.end()) return {false, std::string("missing check ") + name};
    ok = ok && it->passed;
    if (!detail.empty()) detail += "; ";
    detail += Fmt("%s %.1e", name, it->value);
  }
  return {ok, Fmt("%zu checks, ", report.checks.size()) + detail};
}

Outcome AlignmentConservation() {
  const TripletSchema& s = testing::FixtureSchema();
  std::mt19937_64 rng(31337);
  std::int64_t labels_total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto streams = testing::RandomAlignmentStreams(rng, s, 5, 60);
    const AlignmentResult one = AlignFrames(streams.labels, streams.masks, s, 1);
    std::set<FrameKey> mask_keys;
    for (const auto& m : streams.masks) mask_keys.insert(m.key());
    std::int64_t expected = 0;
    for (const auto& l : streams.labels) {
      if (mask_keys.count(l.key())) expected += static_cast<std::int64_t>(l.triplets.size());
    }
    const AlignmentSummary sum = ComputeAlignmentStats(one.report, one.frames);
    const std::int64_t accounted = sum.assigned + sum.by_kind[0] + sum.by_kind[1] + sum.by_kind[2];
    if (accounted != expected || sum.total_triplets != expected) {
      return {false, Fmt("trial %d: %lld accounted vs %lld labels", trial,
                         static_cast<long long>(accounted), static_cast<long long>(expected))};
    }
    labels_total += expected;
    for (int jobs : {2, 4}) {
      const AlignmentResult many = AlignFrames(streams.labels, streams.masks, s, jobs);
      if (!(many.frames == one.frames) || !(many.report.entries == one.report.entries)) {
        return {false, Fmt("trial %d: output differs with %d jobs", trial, jobs)};
      }
    }
  }
  return {true, Fmt("20 seeded stream pairs, %lld labels conserved, identical for jobs 1/2/4",
                    static_cast<long long>(labels_total))};
}

Outcome DatasetStats() {
  testing::TempDir dir;
  const auto frames = testing::SyntheticStatsDataset(30955, 49866, 50, testing::FixtureSchema());
  WriteGroundTruth(frames, dir / "gt");
  std::string text;
  const int code = RunCliArgs({"--jobs", "4", "stats", "--schema", testing::DataPath("schema.csv"),
                               "--gt", dir / "gt"},
                              &text);
  const std::string want = "30,955 annotated frames and 49,866 spatially grounded triplets";
  const bool ok = code == kExitOk && text.find(want) != std::string::npos;
  std::string detail = ok ? "synthetic: \"" + want + "\"" : "synthetic output: " + text;
  const char* release = std::getenv("TRIPSEG_RELEASE_DIR");
  const char* schema = std::getenv("TRIPSEG_RELEASE_SCHEMA");
  if (release && schema) {
    std::string real;
    const int rc = RunCliArgs({"stats", "--schema", schema, "--gt", release}, &real);
    const bool real_ok = rc == kExitOk && real.find(want) != std::string::npos;
    detail += real_ok ? "; release matches" : "; release output: " + real.substr(0, real.find('\n'));
    return {ok && real_ok, detail};
  }
  return {ok, detail + "; real release skipped (TRIPSEG_RELEASE_DIR/TRIPSEG_RELEASE_SCHEMA unset)"};
}

Outcome Throughput() {
  const TripletSchema& s = testing::FixtureSchema();
  constexpr int kFrames = 5000, kSize = 512;
  std::mt19937_64 rng(4242);
  auto pick = [&rng](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  // A vertical band whose top and bottom edges wander column by column.
  auto band = [&](int c0, int c1, int top) {
    std::vector<std::pair<int, int>> cols(kSize, {0, 0});
    for (int c = c0; c < c1; ++c) {
      const int r0 = std::clamp(top + pick(9) - 4, 0, kSize - 1);
      cols[c] = {r0, std::min(kSize, r0 + 60 + pick(40))};
    }
    return testing::ColumnIntervalMask(kSize, cols);
  };
  std::vector<FrameRecord> gt;
  std::vector<DetectionRecord> preds;
  for (int f = 0; f < kFrames; ++f) {
    FrameRecord fr{"VID" + std::to_string(1 + f % 50), f / 50, kSize, kSize, {}, {}};
    for (int i = 0; i < 3; ++i) {
      const int t = pick(s.num_triplets());
      const int c0 = i * 170, top = 50 + pick(350);
      fr.instances.push_back({i, s.Components(t).instrument, t, band(c0, c0 + 150, top), {}});
      fr.frame_triplets.push_back(t);
      const int pt = pick(4) ? t : pick(s.num_triplets());
      preds.push_back({fr.video_id, fr.frame_id, pt, 0.05 + 0.9 * (pick(1000) / 1000.0),
                       band(c0 + pick(20), c0 + 150 - pick(20), top), std::nullopt});
    }
    std::sort(fr.frame_triplets.begin(), fr.frame_triplets.end());
    gt.push_back(std::move(fr));
  }
  std::sort(gt.begin(), gt.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
  testing::TempDir dir;
  WriteGroundTruth(gt, dir / "gt");
  WriteTextFile(dir / "pred.json", SerializeDetections(preds));
  const auto start = Clock::now();
  std::string text;
  const int code = RunCliArgs({"--jobs", "4", "eval", "--schema", testing::DataPath("schema.csv"),
                               "--gt", dir / "gt", "--pred", dir / "pred.json", "--mode", "seg"},
                              &text);
  const double secs = Seconds(start);
  return {code == kExitOk && secs < 60.0,
          Fmt("eval of %d frames x 3 instances at %dx%d with 4 workers: %.2fs (exit %d, "
              "including JSON parsing)", kFrames, kSize, kSize, secs, code)};
}

}  // namespace
}  // namespace tripseg

int main() {
  using tripseg::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", tripseg::OracleEquivalence},
      {"perfect_prediction_fixed_point", tripseg::PerfectPrediction},
      {"codec_round_trip", tripseg::CodecRoundTrip},
      {"recognition_ap", tripseg::RecognitionAp},
      {"wilcoxon_exactness", tripseg::WilcoxonExactness},
      {"fusion_math", tripseg::FusionMath},
      {"alignment_conservation", tripseg::AlignmentConservation},
      {"dataset_statistics_format", tripseg::DatasetStats},
      {"throughput", tripseg::Throughput},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
