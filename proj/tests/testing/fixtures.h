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

// Prediction fixtures derived from ground truth.
#ifndef TRIPSEG_TESTS_TESTING_FIXTURES_H_
#define TRIPSEG_TESTS_TESTING_FIXTURES_H_

#include <vector>

#include "tripseg/dataset_io.h"

namespace tripseg::testing {

// One detection per grounded instance, same class and mask, score 1.0.
inline std::vector<DetectionRecord> ClonePredictions(const std::vector<FrameRecord>& gt,
                                                     bool with_boxes = false) {
  std::vector<DetectionRecord> out;
  for (const auto& f : gt) {
    for (const auto& inst : f.instances) {
      if (!inst.triplet_id) continue;
      DetectionRecord d{f.video_id, f.frame_id, *inst.triplet_id, 1.0, inst.mask, std::nullopt};
      if (with_boxes) {
        d.bbox = MaskToBbox(inst.mask);
        d.mask.reset();
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

// Recognition scores of 1.0 exactly on each frame's labels, 0 elsewhere.
inline std::vector<RecognitionRecord> OneHotRecognition(const std::vector<FrameRecord>& gt,
                                                        int num_triplets) {
  std::vector<RecognitionRecord> out;
  for (const auto& f : gt) {
    RecognitionRecord r{f.video_id, f.frame_id, std::vector<double>(num_triplets, 0.0)};
    for (int t : f.frame_triplets) r.scores[t] = 1.0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tripseg::testing

#endif  // TRIPSEG_TESTS_TESTING_FIXTURES_H_
