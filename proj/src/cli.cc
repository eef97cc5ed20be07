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

#include "tripseg/cli.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tripseg/alignment.h"
#include "tripseg/dataset_io.h"
#include "tripseg/error.h"
#include "tripseg/eval.h"
#include "tripseg/fusion.h"
#include "tripseg/schema.h"
#include "tripseg/stats.h"

namespace tripseg {
namespace {

namespace fs = std::filesystem;

struct Flags {
  int jobs = 1;
  std::uint64_t seed = 0;
  bool verbose = false;

  std::string schema;
  std::string gt;
  std::string pred;
  std::string out;
  std::string report;
  std::string json;

  // align
  std::string labels;
  std::string masks;

  // eval
  std::string mode = "seg";
  double iou = 0.5;
  std::vector<std::string> components;
  std::string averaging = "pooled";
  std::string ap_method;
  std::string label = "method";

  // compare
  std::string pred_a;
  std::string pred_b;
  std::string scores_a;
  std::string scores_b;
  std::string metric = "IVT";
  std::size_t n_subsets = 12;
  std::size_t subset_size = 500;

  // fusion-check
  int instances = 5;
};

void WriteJson(const std::string& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

EvalConfig MakeEvalConfig(const Flags& f) {
  EvalConfig config;
  config.mode = ParseEvalMode(f.mode);
  config.iou_threshold = f.iou;
  if (!f.components.empty()) {
    config.components.clear();
    for (const auto& name : f.components) config.components.push_back(ParseComponent(name));
  }
  config.averaging = ParseAveraging(f.averaging);
  if (!f.ap_method.empty()) config.ap_method = ParseApMethod(f.ap_method);
  config.jobs = f.jobs;
  config.Validate();
  return config;
}

int CmdValidate(const Flags& f, std::ostream& out, std::ostream& err) {
  const TripletSchema schema = LoadSchema(f.schema);
  const auto files = ValidateGroundTruth(f.gt, schema, f.jobs);
  std::size_t errors = 0;
  int frames = 0;
  bool io = false;
  for (const auto& d : files) {
    frames += d.frame_count;
    errors += d.errors.size();
    io = io || d.io_error;
    for (const auto& e : d.errors) err << d.file.filename().string() << ": " << e << "\n";
    if (f.verbose && d.errors.empty()) {
      err << d.file.filename().string() << ": ok (" << d.frame_count << " frames)\n";
    }
  }
  out << files.size() << " files, " << frames << " frames, " << errors << " errors\n";
  if (io) return kExitIoError;
  return errors == 0 ? kExitOk : kExitDomainError;
}

int CmdAlign(const Flags& f, std::ostream& out, std::ostream&) {
  const TripletSchema schema = LoadSchema(f.schema);
  const auto labels = ReadLabelStream(f.labels, schema);
  const auto masks = ReadMaskStream(f.masks, schema);
  const AlignmentResult result = AlignFrames(labels, masks, schema, f.jobs);
  const AlignmentSummary summary = ComputeAlignmentStats(result.report, result.frames);
  if (!f.out.empty()) WriteGroundTruth(result.frames, f.out);
  if (!f.report.empty()) WriteJson(f.report, AlignmentReportToJson(result.report));
  out << FormatAlignmentSummary(summary);
  return kExitOk;
}

int CmdStats(const Flags& f, std::ostream& out, std::ostream&) {
  const TripletSchema schema = LoadSchema(f.schema);
  const auto frames = ReadGroundTruth(f.gt, schema, f.jobs);
  const StatsSummary stats = ComputeDatasetStats(frames, schema);
  if (!f.json.empty()) WriteJson(f.json, StatsToJson(stats, schema));
  out << FormatStats(stats, schema);
  return kExitOk;
}

Json ConfigJson(const Flags& f, const EvalConfig& config) {
  Json j;
  j["gt"] = f.gt;
  j["schema"] = f.schema;
  j["mode"] = EvalModeName(config.mode);
  j["iou_threshold"] = config.iou_threshold;
  Json comps = Json::array();
  for (Component c : config.components) comps.push_back(ComponentName(c));
  j["components"] = std::move(comps);
  j["averaging"] = AveragingName(config.averaging);
  j["ap_method"] = ApMethodName(config.EffectiveApMethod());
  return j;
}

int CmdEval(const Flags& f, std::ostream& out, std::ostream& err) {
  const EvalConfig config = MakeEvalConfig(f);
  const TripletSchema schema = LoadSchema(f.schema);
  const auto gt = ReadGroundTruth(f.gt, schema, f.jobs);
  const PredictionSet preds = ReadPredictions(f.pred, config.mode, schema.num_triplets());
  const EvalReport report = Evaluate(gt, preds, config, schema);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  if (!f.out.empty()) {
    Json j = ReportToJson(report, schema);
    Json cfg = ConfigJson(f, config);
    cfg["predictions"] = f.pred;
    j["config"] = std::move(cfg);
    WriteJson(f.out, j);
  }
  out << RenderReportTable(report, f.label);
  return kExitOk;
}

std::vector<double> ReadScoreList(const std::string& path) {
  const std::string text = ReadTextFile(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kParse, path + ": " + e.what());
  }
  if (!j.is_array()) Fail(ErrorKind::kParse, path + ": expected a JSON array of numbers");
  std::vector<double> values;
  for (const auto& v : j) {
    if (!v.is_number()) Fail(ErrorKind::kParse, path + ": expected a JSON array of numbers");
    values.push_back(v.get<double>());
  }
  return values;
}

int CmdCompare(const Flags& f, std::ostream& out, std::ostream& err) {
  ComparisonContext context;
  context.seed = f.seed;
  std::vector<double> a, b;
  if (!f.scores_a.empty()) {
    a = ReadScoreList(f.scores_a);
    b = ReadScoreList(f.scores_b);
    context.metric = f.metric;
    context.n_subsets = a.size();
    context.subset_size = f.subset_size;
  } else {
    const EvalConfig base = MakeEvalConfig(f);
    const Component component = ParseComponent(f.metric);
    EvalConfig config = base;
    config.components = {component};
    const TripletSchema schema = LoadSchema(f.schema);
    const auto gt = ReadGroundTruth(f.gt, schema, f.jobs);
    const PredictionSet pa = ReadPredictions(f.pred_a, config.mode, schema.num_triplets());
    const PredictionSet pb = ReadPredictions(f.pred_b, config.mode, schema.num_triplets());
    std::vector<FrameKey> keys;
    keys.reserve(gt.size());
    for (const auto& frame : gt) keys.push_back(frame.key());
    const SubsetPartition partition =
        PartitionFrames(keys, f.n_subsets, f.subset_size, f.seed);
    context.metric = "mAP_" + std::string(ComponentName(component)) + "_" +
                     std::string(EvalModeName(config.mode));
    context.n_subsets = f.n_subsets;
    context.subset_size = f.subset_size;
    for (std::size_t s = 0; s < partition.subsets.size(); ++s) {
      const std::set<FrameKey> subset(partition.subsets[s].begin(), partition.subsets[s].end());
      for (const PredictionSet* preds : {&pa, &pb}) {
        const EvalReport r = EvaluateSubset(gt, *preds, subset, config, schema);
        const double value = r.Find(component)->map;
        if (std::isnan(value)) {
          Fail(ErrorKind::kValidation, "subset " + std::to_string(s) + " has no ground truth for " +
                                           std::string(ComponentName(component)));
        }
        (preds == &pa ? a : b).push_back(value);
      }
    }
    if (f.verbose) err << "evaluated " << partition.subsets.size() << " subsets\n";
  }
  const MethodComparison comparison = CompareMethods(a, b);
  if (!f.out.empty()) WriteJson(f.out, ComparisonToJson(comparison, context));
  out << FormatComparison(comparison, context);
  return kExitOk;
}

int CmdFusionCheck(const Flags& f, std::ostream& out, std::ostream&) {
  fusion::FusionCheckConfig config;
  config.instances = f.instances;
  const fusion::FusionCheckReport report = fusion::RunFusionChecks(f.seed, config);
  if (!f.json.empty()) WriteJson(f.json, fusion::FusionCheckToJson(report));
  out << fusion::FormatFusionCheck(report);
  return report.passed() ? kExitOk : kExitDomainError;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Instance-grounded surgical triplet dataset and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-j,--jobs", f.jobs, "Worker threads; results do not depend on it")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", f.seed, "Seed for every random choice (compare, fusion-check)")
      ->capture_default_str();
  app.add_flag("-v,--verbose", f.verbose, "Extra diagnostics on stderr");

  auto schema_opt = [&](CLI::App* sub) {
    sub->add_option("--schema", f.schema, "Triplet schema CSV")->required();
  };
  auto eval_opts = [&](CLI::App* sub) {
    sub->add_option("--mode", f.mode, "seg, det or rec")
        ->capture_default_str()
        ->check(CLI::IsMember({"seg", "det", "rec"}));
    sub->add_option("--iou", f.iou, "IoU threshold in (0, 1]")->capture_default_str();
    sub->add_option("--averaging", f.averaging, "pooled or per_video")
        ->capture_default_str()
        ->check(CLI::IsMember({"pooled", "per_video"}));
    sub->add_option("--ap-method", f.ap_method,
                    "envelope or step (default: envelope for seg/det, step for rec)")
        ->check(CLI::IsMember({"envelope", "step"}));
  };

  CLI::App* validate = app.add_subcommand("validate", "Check ground-truth files");
  schema_opt(validate);
  validate->add_option("--gt", f.gt, "Ground-truth directory")->required();

  CLI::App* align = app.add_subcommand("align", "Fuse a label stream with a mask stream");
  schema_opt(align);
  align->add_option("--labels", f.labels, "Label CSV (video_id,frame_id,triplet_id)")
      ->required();
  align->add_option("--masks", f.masks, "Directory of instance mask files")->required();
  align->add_option("--out", f.out, "Write aligned ground truth here");
  align->add_option("--report", f.report, "Write the ambiguity report JSON here");

  CLI::App* stats = app.add_subcommand("stats", "Dataset statistics");
  schema_opt(stats);
  stats->add_option("--gt", f.gt, "Ground-truth directory")->required();
  stats->add_option("--json", f.json, "Write statistics JSON here");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate predictions");
  schema_opt(eval);
  eval->add_option("--gt", f.gt, "Ground-truth directory")->required();
  eval->add_option("--pred", f.pred, "Prediction JSON")->required();
  eval_opts(eval);
  eval->add_option("--components", f.components, "Subset of I,V,T,IV,IT,IVT")->delimiter(',');
  eval->add_option("--out", f.out, "Write the report JSON here");
  eval->add_option("--label", f.label, "Row label in the table")->capture_default_str();

  CLI::App* compare = app.add_subcommand("compare", "Paired subset comparison of two methods");
  CLI::Option* sa = compare->add_option("--scores-a", f.scores_a, "JSON list of per-subset values");
  CLI::Option* sb = compare->add_option("--scores-b", f.scores_b, "JSON list of per-subset values");
  sa->needs(sb);
  sb->needs(sa);
  CLI::Option* pa = compare->add_option("--pred-a", f.pred_a, "Predictions of method a");
  CLI::Option* pb = compare->add_option("--pred-b", f.pred_b, "Predictions of method b");
  pa->needs(pb);
  pb->needs(pa);
  pa->excludes(sa);
  pb->excludes(sb);
  compare->add_option("--gt", f.gt, "Ground-truth directory");
  compare->add_option("--schema", f.schema, "Triplet schema CSV");
  eval_opts(compare);
  compare->add_option("--metric", f.metric, "Component to compare (I, V, T, IV, IT, IVT)")
      ->capture_default_str();
  compare->add_option("--n-subsets", f.n_subsets, "Number of subsets")->capture_default_str();
  compare->add_option("--subset-size", f.subset_size, "Frames per subset")
      ->capture_default_str();
  compare->add_option("--out", f.out, "Write the comparison JSON here");

  CLI::App* fusion = app.add_subcommand("fusion-check", "Verify the gated fusion math");
  fusion->add_option("--instances", f.instances, "Random instances to check")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fusion->add_option("--json", f.json, "Write per-check and per-block results here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomainError;
  }

  try {
    if (*validate) return CmdValidate(f, out, err);
    if (*align) return CmdAlign(f, out, err);
    if (*stats) return CmdStats(f, out, err);
    if (*eval) return CmdEval(f, out, err);
    if (*compare) {
      if (f.scores_a.empty() && f.pred_a.empty()) {
        err << "compare: give --pred-a/--pred-b or --scores-a/--scores-b\n";
        return kExitDomainError;
      }
      if (!f.pred_a.empty() && (f.gt.empty() || f.schema.empty())) {
        err << "compare: --pred-a/--pred-b need --gt and --schema\n";
        return kExitDomainError;
      }
      return CmdCompare(f, out, err);
    }
    if (*fusion) return CmdFusionCheck(f, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::kIo ? kExitIoError : kExitDomainError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitDomainError;
}

}  // namespace tripseg
