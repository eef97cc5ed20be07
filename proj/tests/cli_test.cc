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

#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "testing/fixtures.h"
#include "testing/synth.h"
#include "tripseg/dataset_io.h"

namespace tripseg {
namespace {

using testing::DataPath;
using testing::FixtureSchema;
using testing::TempDir;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tripseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kSchema = DataPath("schema.csv");
const std::string kGt = DataPath("gt_small");

TEST(CliTest, ValidateCleanFixture) {
  const CliRun r = Cli({"validate", "--schema", kSchema, "--gt", kGt});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("2 files, 3 frames, 0 errors"), std::string::npos) << r.out;
}

TEST(CliTest, ValidateReportsInstrumentMismatch) {
  TempDir dir;
  auto frames = ReadGroundTruth(kGt, FixtureSchema());
  frames[0].instances[0].instrument_id = 5;  // triplet 5 implies instrument 2
  // Serialize without validation, then check through the CLI.
  std::vector<FrameRecord> vid01;
  for (const auto& f : frames) {
    if (f.video_id == "VID01") vid01.push_back(f);
  }
  WriteTextFile(dir / "VID01.json", SerializeGroundTruthVideo(vid01));
  const CliRun r = Cli({"validate", "--schema", kSchema, "--gt", dir.path().string()});
  EXPECT_EQ(r.code, kExitDomainError);
  EXPECT_NE(r.err.find("VID01.json"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("frame 0"), std::string::npos) << r.err;
}

TEST(CliTest, MissingInputsAreIoErrors) {
  EXPECT_EQ(Cli({"validate", "--schema", kSchema, "--gt", "/nonexistent/gt"}).code, kExitIoError);
  EXPECT_EQ(Cli({"stats", "--schema", "/nonexistent.csv", "--gt", kGt}).code, kExitIoError);
  EXPECT_EQ(Cli({"eval", "--schema", kSchema, "--gt", kGt, "--pred", "/nonexistent.json"}).code,
            kExitIoError);
}

TEST(CliTest, UsageErrorsAndHelp) {
  EXPECT_EQ(Cli({}).code, kExitDomainError);
  EXPECT_EQ(Cli({"bogus"}).code, kExitDomainError);
  EXPECT_EQ(Cli({"eval", "--schema", kSchema}).code, kExitDomainError);
  EXPECT_EQ(Cli({"--jobs", "0", "fusion-check"}).code, kExitDomainError);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(CliTest, EvalPerfectPredictionsAndReport) {
  TempDir dir;
  const auto gt = ReadGroundTruth(kGt, FixtureSchema());
  WriteTextFile(dir / "pred.json", SerializeDetections(testing::ClonePredictions(gt)));
  const CliRun r = Cli({"eval", "--schema", kSchema, "--gt", kGt, "--pred", dir / "pred.json",
                     "--label", "clone", "--out", dir / "report.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("clone"), std::string::npos);
  EXPECT_NE(r.out.find("100.00"), std::string::npos);
  const Json j = Json::parse(ReadTextFile(dir / "report.json"));
  EXPECT_EQ(j["components"]["IVT"]["mAP"], 100.0);
  EXPECT_EQ(j["config"]["mode"], "seg");
  EXPECT_EQ(j["matching"], "greedy_by_score_one_to_one");
}

TEST(CliTest, EvalModeMismatchIsDomainError) {
  TempDir dir;
  const auto gt = ReadGroundTruth(kGt, FixtureSchema());
  WriteTextFile(dir / "rec.json", SerializeRecognition(testing::OneHotRecognition(gt, 100)));
  EXPECT_EQ(Cli({"eval", "--schema", kSchema, "--gt", kGt, "--pred", dir / "rec.json"}).code,
            kExitDomainError);
  const CliRun ok = Cli({"eval", "--schema", kSchema, "--gt", kGt, "--pred", dir / "rec.json",
                      "--mode", "rec"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(Cli({"eval", "--schema", kSchema, "--gt", kGt, "--pred", dir / "rec.json", "--mode",
                 "rec", "--iou", "1.5"})
                .code,
            kExitDomainError);
}

TEST(CliTest, StatsPrintsCounts) {
  const CliRun r = Cli({"stats", "--schema", kSchema, "--gt", kGt});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("3 annotated frames and 4 spatially grounded triplets"), std::string::npos)
      << r.out;
}

TEST(CliTest, CompareFromScoreLists) {
  TempDir dir;
  WriteTextFile(dir / "a.json", "[41, 42, 43, 44]");
  WriteTextFile(dir / "b.json", "[40, 40, 40, 40]");
  const CliRun r = Cli({"compare", "--scores-a", dir / "a.json", "--scores-b", dir / "b.json",
                     "--out", dir / "cmp.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(ReadTextFile(dir / "cmp.json"));
  EXPECT_NEAR(j["wilcoxon"]["p_value"].get<double>(), 1.0 / 16, 1e-15);
  EXPECT_EQ(Cli({"compare", "--scores-a", dir / "a.json"}).code, kExitDomainError);
}

TEST(CliTest, CompareFromPredictions) {
  TempDir dir;
  const auto gt = testing::SyntheticStatsDataset(6000, 6000, 12, FixtureSchema());
  WriteGroundTruth(gt, dir / "gt");
  auto good = testing::ClonePredictions(gt);
  auto bad = good;
  for (std::size_t i = 0; i < bad.size(); i += 3) bad[i].triplet_id = (bad[i].triplet_id + 1) % 100;
  WriteTextFile(dir / "a.json", SerializeDetections(good));
  WriteTextFile(dir / "b.json", SerializeDetections(bad));
  const CliRun r = Cli({"compare", "--schema", kSchema, "--gt", dir / "gt", "--pred-a", dir / "a.json",
                     "--pred-b", dir / "b.json", "--out", dir / "cmp.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(ReadTextFile(dir / "cmp.json"));
  EXPECT_EQ(j["n_subsets"], 12);
  EXPECT_EQ(j["subset_size"], 500);
  EXPECT_EQ(j["metric"], "mAP_IVT_seg");
  EXPECT_EQ(j["per_subset"].size(), 12u);
  EXPECT_NEAR(j["wilcoxon"]["p_value"].get<double>(), 1.0 / 4096, 1e-15);
  const CliRun few = Cli({"compare", "--schema", kSchema, "--gt", kGt, "--pred-a", dir / "a.json",
                       "--pred-b", dir / "b.json"});
  EXPECT_EQ(few.code, kExitDomainError);
}

TEST(CliTest, FusionCheckPasses) {
  TempDir dir;
  const CliRun r = Cli({"--seed", "3", "fusion-check", "--json", dir / "fusion.json"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(Json::parse(ReadTextFile(dir / "fusion.json"))["seed"], 3);
}

TEST(CliTest, OutputsIndependentOfJobs) {
  TempDir dir;
  const auto gt = ReadGroundTruth(kGt, FixtureSchema());
  WriteTextFile(dir / "pred.json", SerializeDetections(testing::ClonePredictions(gt)));
  std::string first;
  for (const char* jobs : {"1", "3"}) {
    const std::string out = dir / (std::string("r") + jobs + ".json");
    const CliRun r = Cli({"--jobs", jobs, "eval", "--schema", kSchema, "--gt", kGt, "--pred",
                       dir / "pred.json", "--out", out});
    ASSERT_EQ(r.code, kExitOk);
    const std::string text = ReadTextFile(out) + r.out;
    if (first.empty()) first = text;
    EXPECT_EQ(text, first);
  }
}

}  // namespace
}  // namespace tripseg
