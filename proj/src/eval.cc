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

#include "tripseg/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tripseg/error.h"
#include "tripseg/parallel.h"

namespace tripseg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-class ranked outcomes plus ground-truth counts, split by video when
// per-video averaging is requested (video 0 holds everything otherwise).
struct ClassAccumulator {
  std::map<int, std::vector<ScoredMatch>> matches_by_video;
  std::map<int, std::int64_t> gt_by_video;
  std::int64_t gt_total = 0;
};

// Mean of per-class APs (percent) over classes with ground truth.
ComponentResult Summarize(Component component,
                          const std::vector<ClassAccumulator>& classes,
                          Averaging averaging, ApMethod method) {
  ComponentResult result;
  result.component = component;
  double sum = 0;
  for (std::size_t cls = 0; cls < classes.size(); ++cls) {
    const ClassAccumulator& acc = classes[cls];
    result.gt_count += acc.gt_total;
    if (acc.gt_total == 0) continue;
    double ap = 0;
    if (averaging == Averaging::kPooled) {
      std::vector<ScoredMatch> all;
      for (const auto& [video, items] : acc.matches_by_video) {
        all.insert(all.end(), items.begin(), items.end());
      }
      ap = AveragePrecision(all, acc.gt_total, method);
    } else {
      double video_sum = 0;
      int videos = 0;
      for (const auto& [video, gt] : acc.gt_by_video) {
        if (gt == 0) continue;
        const auto it = acc.matches_by_video.find(video);
        static const std::vector<ScoredMatch> kNone;
        video_sum += AveragePrecision(
            it == acc.matches_by_video.end() ? kNone : it->second, gt, method);
        ++videos;
      }
      ap = video_sum / videos;
    }
    result.per_class_ap[static_cast<int>(cls)] = 100.0 * ap;
    sum += 100.0 * ap;
  }
  result.map = result.per_class_ap.empty()
                   ? kNaN
                   : sum / static_cast<double>(result.per_class_ap.size());
  return result;
}

std::vector<Component> UniqueComponents(const std::vector<Component>& requested) {
  std::vector<Component> out;
  for (Component c : requested) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

void CheckUniqueFrames(const std::vector<FrameRecord>& gt) {
  std::set<FrameKey> keys;
  for (const auto& f : gt) {
    if (!keys.insert(f.key()).second) {
      Fail(ErrorKind::kValidation, "duplicate ground-truth frame " + f.key().ToString());
    }
  }
}

// All predictions and grounded ground truth of one frame, with their IoU
// matrix (row-major, predictions x ground truth).
struct FrameBucket {
  FrameKey key;
  const FrameRecord* gt = nullptr;
  int video = 0;
  std::vector<const GroundedInstance*> gts;
  std::vector<std::size_t> preds;
  std::vector<double> iou;
};

}  // namespace

std::string_view AveragingName(Averaging averaging) {
  return averaging == Averaging::kPooled ? "pooled" : "per_video";
}

Averaging ParseAveraging(std::string_view name) {
  if (name == "pooled") return Averaging::kPooled;
  if (name == "per_video") return Averaging::kPerVideo;
  Fail(ErrorKind::kInvalidArgument,
       "unknown averaging '" + std::string(name) + "' (expected pooled or per_video)");
}

std::string_view ApMethodName(ApMethod method) {
  return method == ApMethod::kEnvelope ? "envelope" : "step";
}

ApMethod ParseApMethod(std::string_view name) {
  if (name == "envelope") return ApMethod::kEnvelope;
  if (name == "step") return ApMethod::kStep;
  Fail(ErrorKind::kInvalidArgument,
       "unknown AP method '" + std::string(name) + "' (expected envelope or step)");
}

ApMethod EvalConfig::EffectiveApMethod() const {
  if (ap_method) return *ap_method;
  return mode == EvalMode::kRec ? ApMethod::kStep : ApMethod::kEnvelope;
}

void EvalConfig::Validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "IoU threshold must lie in (0, 1]");
  }
  if (components.empty()) {
    Fail(ErrorKind::kInvalidArgument, "at least one component is required");
  }
}

const ComponentResult* EvalReport::Find(Component component) const {
  for (const auto& c : components) {
    if (c.component == component) return &c;
  }
  return nullptr;
}

std::vector<int> MatchFrame(std::span<const double> scores, std::size_t num_gts,
                            double iou_threshold, const IouFn& iou) {
  for (std::size_t p = 1; p < scores.size(); ++p) {
    if (scores[p] > scores[p - 1]) {
      Fail(ErrorKind::kInvalidArgument,
           "MatchFrame requires predictions in descending score order");
    }
  }
  std::vector<int> matched(scores.size(), -1);
  std::vector<bool> taken(num_gts, false);
  for (std::size_t p = 0; p < scores.size(); ++p) {
    double best = -1.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < num_gts; ++g) {
      if (taken[g]) continue;
      const double v = iou(p, g);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = true;
      matched[p] = best_gt;
    }
  }
  return matched;
}

double AveragePrecision(std::span<const ScoredMatch> items, std::int64_t gt_count,
                        ApMethod method) {
  if (gt_count < 1) {
    Fail(ErrorKind::kInvalidArgument,
         "average precision needs at least one ground truth; exclude the class");
  }
  std::vector<ScoredMatch> ranked(items.begin(), items.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) {
                     return a.score > b.score;
                   });
  const std::size_t n = ranked.size();
  std::vector<double> precision(n), recall(n);
  std::int64_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranked[k].true_positive) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }
  if (method == ApMethod::kEnvelope) {
    for (std::size_t k = n; k-- > 1;) {
      precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }
  }
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!ranked[k].true_positive) continue;
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

std::vector<ComponentDetection> ProjectDetections(
    std::span<const DetectionRecord> detections, Component component,
    const TripletSchema& schema) {
  std::vector<ComponentDetection> out;
  out.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const DetectionRecord& d = detections[i];
    out.push_back({schema.Project(d.triplet_id, component),
                   schema.ProjectIndex(d.triplet_id, component), d.score, i});
  }
  return out;
}

EvalReport EvaluateGrounded(const std::vector<FrameRecord>& gt,
                            const std::vector<DetectionRecord>& predictions,
                            const EvalConfig& config, const TripletSchema& schema) {
  config.Validate();
  if (config.mode == EvalMode::kRec) {
    Fail(ErrorKind::kInvalidArgument, "EvaluateGrounded handles seg and det modes only");
  }
  CheckUniqueFrames(gt);
  const bool seg = config.mode == EvalMode::kSeg;

  EvalReport report;
  report.mode = config.mode;
  report.iou_threshold = config.iou_threshold;
  report.averaging = config.averaging;
  report.ap_method = config.EffectiveApMethod();
  report.frame_count = static_cast<std::int64_t>(gt.size());

  std::map<FrameKey, FrameBucket> by_key;
  for (const auto& frame : gt) {
    FrameBucket& b = by_key[frame.key()];
    b.key = frame.key();
    b.gt = &frame;
    for (const auto& inst : frame.instances) {
      if (inst.grounded()) b.gts.push_back(&inst);
    }
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const DetectionRecord& d = predictions[i];
    const std::string where = "prediction " + std::to_string(i) + ": ";
    if (d.triplet_id < 0 || d.triplet_id >= schema.num_triplets()) {
      Fail(ErrorKind::kValidation,
           where + "triplet_id " + std::to_string(d.triplet_id) + " is out of range");
    }
    if (seg && !d.mask) Fail(ErrorKind::kValidation, where + "seg mode requires a mask");
    if (!seg && !d.mask && !d.bbox) {
      Fail(ErrorKind::kValidation, where + "det mode requires a bbox or a mask");
    }
    FrameBucket& b = by_key[d.key()];
    if (b.gt == nullptr) {
      b.key = d.key();
      ++report.unknown_frame_predictions;
    } else if (d.mask && (d.mask->height != b.gt->height || d.mask->width != b.gt->width)) {
      Fail(ErrorKind::kValidation, where + "mask size differs from frame " +
                                       d.key().ToString());
    }
    b.preds.push_back(i);
  }
  if (report.unknown_frame_predictions > 0) {
    report.warnings.push_back(std::to_string(report.unknown_frame_predictions) +
                              " prediction(s) reference frames absent from the "
                              "ground truth; scored as false positives");
  }

  std::vector<FrameBucket> buckets;
  buckets.reserve(by_key.size());
  std::map<std::string, int> video_index;
  for (auto& [key, bucket] : by_key) {
    bucket.video = video_index.emplace(key.video_id, static_cast<int>(video_index.size()))
                       .first->second;
    buckets.push_back(std::move(bucket));
  }

  // IoU matrices are shared by every component, so compute them once.
  ParallelFor(buckets.size(), config.jobs, [&](std::size_t bi) {
    FrameBucket& b = buckets[bi];
    const std::size_t ng = b.gts.size();
    if (ng == 0 || b.preds.empty()) return;
    b.iou.assign(b.preds.size() * ng, 0.0);
    std::vector<BBox> gt_boxes;
    if (!seg) {
      for (const auto* g : b.gts) gt_boxes.push_back(MaskToBbox(g->mask));
    }
    for (std::size_t p = 0; p < b.preds.size(); ++p) {
      const DetectionRecord& d = predictions[b.preds[p]];
      if (seg) {
        for (std::size_t g = 0; g < ng; ++g) {
          b.iou[p * ng + g] = MaskIou(*d.mask, b.gts[g]->mask);
        }
        continue;
      }
      std::optional<BBox> box = d.bbox;
      if (!box && !d.mask->Empty()) box = MaskToBbox(*d.mask);
      if (!box) continue;  // empty mask without a box never matches
      for (std::size_t g = 0; g < ng; ++g) {
        b.iou[p * ng + g] = BoxIou(*box, gt_boxes[g]);
      }
    }
  });

  const std::vector<Component> components = UniqueComponents(config.components);
  report.components.resize(components.size());
  ParallelFor(components.size(), config.jobs, [&](std::size_t ci) {
    const Component component = components[ci];
    std::vector<ClassAccumulator> classes(schema.ClassCount(component));
    for (const FrameBucket& b : buckets) {
      const int video = config.averaging == Averaging::kPerVideo ? b.video : 0;
      const std::size_t ng = b.gts.size();
      // class -> (prediction positions, ground-truth positions) in this frame
      std::map<int, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
      for (std::size_t p = 0; p < b.preds.size(); ++p) {
        const int cls = schema.ProjectIndex(predictions[b.preds[p]].triplet_id, component);
        groups[cls].first.push_back(p);
      }
      for (std::size_t g = 0; g < ng; ++g) {
        groups[schema.ProjectIndex(*b.gts[g]->triplet_id, component)].second.push_back(g);
      }
      for (auto& [cls, group] : groups) {
        auto& [pred_pos, gt_pos] = group;
        ClassAccumulator& acc = classes[cls];
        acc.gt_total += static_cast<std::int64_t>(gt_pos.size());
        acc.gt_by_video[video] += static_cast<std::int64_t>(gt_pos.size());
        if (pred_pos.empty()) continue;
        std::stable_sort(pred_pos.begin(), pred_pos.end(),
                         [&](std::size_t x, std::size_t y) {
                           return predictions[b.preds[x]].score >
                                  predictions[b.preds[y]].score;
                         });
        std::vector<double> scores;
        scores.reserve(pred_pos.size());
        for (std::size_t p : pred_pos) scores.push_back(predictions[b.preds[p]].score);
        const std::vector<int> matched =
            MatchFrame(scores, gt_pos.size(), config.iou_threshold,
                       [&](std::size_t p, std::size_t g) {
                         return b.iou[pred_pos[p] * ng + gt_pos[g]];
                       });
        auto& out = acc.matches_by_video[video];
        for (std::size_t k = 0; k < matched.size(); ++k) {
          out.push_back({scores[k], matched[k] >= 0});
        }
      }
    }
    ComponentResult result =
        Summarize(component, classes, config.averaging, report.ap_method);
    result.pred_count = static_cast<std::int64_t>(predictions.size());
    report.components[ci] = std::move(result);
  });
  return report;
}

EvalReport EvaluateRecognition(const std::vector<FrameRecord>& gt,
                               const std::vector<RecognitionRecord>& predictions,
                               const EvalConfig& config,
                               const TripletSchema& schema) {
  config.Validate();
  CheckUniqueFrames(gt);
  EvalReport report;
  report.mode = EvalMode::kRec;
  report.iou_threshold = config.iou_threshold;
  report.averaging = config.averaging;
  report.ap_method = config.EffectiveApMethod();
  report.frame_count = static_cast<std::int64_t>(gt.size());

  const int num_triplets = schema.num_triplets();
  std::map<FrameKey, const RecognitionRecord*> by_key;
  for (const auto& r : predictions) {
    if (static_cast<int>(r.scores.size()) != num_triplets) {
      Fail(ErrorKind::kValidation, "recognition record " + r.key().ToString() +
                                       " must carry " + std::to_string(num_triplets) +
                                       " scores");
    }
    if (!by_key.emplace(r.key(), &r).second) {
      Fail(ErrorKind::kValidation, "duplicate recognition record " + r.key().ToString());
    }
  }
  std::int64_t matched_records = 0;
  std::vector<const RecognitionRecord*> frame_record(gt.size(), nullptr);
  for (std::size_t f = 0; f < gt.size(); ++f) {
    const auto it = by_key.find(gt[f].key());
    if (it != by_key.end()) {
      frame_record[f] = it->second;
      ++matched_records;
    }
  }
  report.unknown_frame_predictions =
      static_cast<std::int64_t>(predictions.size()) - matched_records;
  if (report.unknown_frame_predictions > 0) {
    report.warnings.push_back(std::to_string(report.unknown_frame_predictions) +
                              " recognition record(s) reference frames absent from "
                              "the ground truth; ignored");
  }
  std::map<std::string, int> video_index;
  std::vector<int> frame_video(gt.size());
  for (std::size_t f = 0; f < gt.size(); ++f) {
    frame_video[f] =
        video_index.emplace(gt[f].video_id, static_cast<int>(video_index.size()))
            .first->second;
  }

  const std::vector<Component> components = UniqueComponents(config.components);
  report.components.resize(components.size());
  ParallelFor(components.size(), config.jobs, [&](std::size_t ci) {
    const Component component = components[ci];
    const int num_classes = schema.ClassCount(component);
    std::vector<int> class_of(num_triplets);
    for (int t = 0; t < num_triplets; ++t) class_of[t] = schema.ProjectIndex(t, component);

    std::vector<ClassAccumulator> classes(num_classes);
    std::vector<double> class_score(num_classes);
    std::vector<char> positive(num_classes);
    for (std::size_t f = 0; f < gt.size(); ++f) {
      std::fill(class_score.begin(), class_score.end(), 0.0);
      std::fill(positive.begin(), positive.end(), 0);
      if (const RecognitionRecord* r = frame_record[f]) {
        for (int t = 0; t < num_triplets; ++t) {
          class_score[class_of[t]] = std::max(class_score[class_of[t]], r->scores[t]);
        }
      }
      for (int t : gt[f].frame_triplets) positive[class_of[t]] = 1;
      const int video = config.averaging == Averaging::kPerVideo ? frame_video[f] : 0;
      for (int cls : schema.RealizedClasses(component)) {
        ClassAccumulator& acc = classes[cls];
        acc.matches_by_video[video].push_back({class_score[cls], positive[cls] != 0});
        if (positive[cls]) {
          ++acc.gt_total;
          ++acc.gt_by_video[video];
        }
      }
    }
    ComponentResult result =
        Summarize(component, classes, config.averaging, report.ap_method);
    result.pred_count = matched_records;
    report.components[ci] = std::move(result);
  });
  return report;
}

EvalReport Evaluate(const std::vector<FrameRecord>& gt, const PredictionSet& predictions,
                    const EvalConfig& config, const TripletSchema& schema) {
  if (config.mode == EvalMode::kRec) {
    const auto* recs = std::get_if<std::vector<RecognitionRecord>>(&predictions);
    if (recs == nullptr) {
      Fail(ErrorKind::kInvalidArgument, "rec mode needs recognition records");
    }
    return EvaluateRecognition(gt, *recs, config, schema);
  }
  const auto* dets = std::get_if<std::vector<DetectionRecord>>(&predictions);
  if (dets == nullptr) {
    Fail(ErrorKind::kInvalidArgument,
         std::string(EvalModeName(config.mode)) + " mode needs detection records");
  }
  return EvaluateGrounded(gt, *dets, config, schema);
}

EvalReport EvaluateSubset(const std::vector<FrameRecord>& gt,
                          const PredictionSet& predictions,
                          const std::set<FrameKey>& subset, const EvalConfig& config,
                          const TripletSchema& schema) {
  std::vector<FrameRecord> kept;
  std::set<FrameKey> found;
  for (const auto& f : gt) {
    if (subset.count(f.key())) {
      kept.push_back(f);
      found.insert(f.key());
    }
  }
  if (found.size() != subset.size()) {
    for (const auto& key : subset) {
      if (!found.count(key)) {
        Fail(ErrorKind::kValidation,
             "subset frame " + key.ToString() + " is not in the ground truth");
      }
    }
  }
  auto filter = [&](const auto& records) {
    std::decay_t<decltype(records)> out;
    for (const auto& r : records) {
      if (subset.count(r.key())) out.push_back(r);
    }
    return out;
  };
  return std::visit(
      [&](const auto& records) {
        return Evaluate(kept, PredictionSet(filter(records)), config, schema);
      },
      predictions);
}

}  // namespace tripseg
