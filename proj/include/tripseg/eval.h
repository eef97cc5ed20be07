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

#ifndef TRIPSEG_EVAL_H_
#define TRIPSEG_EVAL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripseg/dataset_io.h"
#include "tripseg/schema.h"

namespace tripseg {

enum class Averaging { kPooled, kPerVideo };
enum class ApMethod { kEnvelope, kStep };

std::string_view AveragingName(Averaging averaging);
Averaging ParseAveraging(std::string_view name);
std::string_view ApMethodName(ApMethod method);
ApMethod ParseApMethod(std::string_view name);

// Name of the matching rule, embedded in every report.
inline constexpr std::string_view kMatchingRule = "greedy_by_score_one_to_one";

struct EvalConfig {
  EvalMode mode = EvalMode::kSeg;
  double iou_threshold = 0.5;
  std::vector<Component> components{kAllComponents.begin(), kAllComponents.end()};
  Averaging averaging = Averaging::kPooled;
  // Unset means the mode's convention: envelope for seg/det, step for rec.
  std::optional<ApMethod> ap_method;
  int jobs = 1;

  ApMethod EffectiveApMethod() const;
  // Throws Error(kInvalidArgument) unless iou_threshold is in (0, 1] and
  // components is non-empty.
  void Validate() const;
};

// Greedy one-to-one matching within one frame and class. `scores` must be in
// descending order; each prediction, in that order, takes the still
// unmatched ground truth with the highest IoU >= iou_threshold. IoU ties go
// to the lowest ground-truth index. Returns the matched ground-truth index
// per prediction, or -1 for a false positive.
using IouFn = std::function<double(std::size_t pred, std::size_t gt)>;
std::vector<int> MatchFrame(std::span<const double> scores, std::size_t num_gts,
                            double iou_threshold, const IouFn& iou);

struct ScoredMatch {
  double score = 0;
  bool true_positive = false;
};

// Average precision in [0, 1]. Items are stably sorted by descending score,
// then:
//   envelope: sum over recall steps of the maximum precision at any rank
//             with recall >= that step;
//   step:     sum of (R_n - R_{n-1}) * P_n with raw precisions.
// Throws Error(kInvalidArgument) when gt_count < 1.
double AveragePrecision(std::span<const ScoredMatch> items,
                        std::int64_t gt_count, ApMethod method);

// A detection relabelled into one component space. Score and geometry are
// those of detections[source].
struct ComponentDetection {
  ComponentKey key;
  int class_index = 0;
  double score = 0;
  std::size_t source = 0;
};

std::vector<ComponentDetection> ProjectDetections(
    std::span<const DetectionRecord> detections, Component component,
    const TripletSchema& schema);

struct ComponentResult {
  Component component = Component::kIVT;
  double map = 0;  // percent; NaN when no class has ground truth
  std::map<int, double> per_class_ap;  // dense class index -> percent
  std::int64_t gt_count = 0;
  std::int64_t pred_count = 0;
};

struct EvalReport {
  EvalMode mode = EvalMode::kSeg;
  double iou_threshold = 0.5;
  Averaging averaging = Averaging::kPooled;
  ApMethod ap_method = ApMethod::kEnvelope;
  std::int64_t frame_count = 0;
  std::vector<ComponentResult> components;
  // Predictions whose (video, frame) is absent from the ground truth. They
  // are scored as false positives in their stated frame.
  std::int64_t unknown_frame_predictions = 0;
  std::vector<std::string> warnings;

  const ComponentResult* Find(Component component) const;
};

// Segmentation (mask IoU) or detection (box IoU) evaluation.
EvalReport EvaluateGrounded(const std::vector<FrameRecord>& gt,
                            const std::vector<DetectionRecord>& predictions,
                            const EvalConfig& config, const TripletSchema& schema);

// Frame-level recognition evaluation. Frames without a record score zero
// for every class.
EvalReport EvaluateRecognition(const std::vector<FrameRecord>& gt,
                               const std::vector<RecognitionRecord>& predictions,
                               const EvalConfig& config,
                               const TripletSchema& schema);

// Dispatches on config.mode; the prediction alternative must match it.
EvalReport Evaluate(const std::vector<FrameRecord>& gt,
                    const PredictionSet& predictions, const EvalConfig& config,
                    const TripletSchema& schema);

// Full evaluation restricted to the ground-truth frames in `subset` and the
// predictions on those frames. Throws Error(kValidation) if a subset frame
// is not in the ground truth.
EvalReport EvaluateSubset(const std::vector<FrameRecord>& gt,
                          const PredictionSet& predictions,
                          const std::set<FrameKey>& subset,
                          const EvalConfig& config, const TripletSchema& schema);

Json ReportToJson(const EvalReport& report, const TripletSchema& schema);

// Two-line table: a header "mAP_I mAP_V mAP_T mAP_IV mAP_IT mAP_IVT" and one
// row labelled `label`, two decimals per value.
std::string RenderReportTable(const EvalReport& report, std::string_view label);

}  // namespace tripseg

#endif  // TRIPSEG_EVAL_H_
