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

#ifndef TRIPSEG_ALIGNMENT_H_
#define TRIPSEG_ALIGNMENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tripseg/dataset_io.h"
#include "tripseg/schema.h"

namespace tripseg {

// Frame-level labels from the triplet source. `triplets` is a multiset: the
// same triplet may occur twice (two graspers retracting the gallbladder).
struct TripletLabelFrame {
  std::string video_id;
  int frame_id = 0;
  std::vector<int> triplets;

  FrameKey key() const { return {video_id, frame_id}; }
};

struct MaskInstance {
  int instance_id = 0;
  int instrument_id = 0;
  RleMask mask;
};

// Instrument instances from the mask source, without triplet links.
struct InstanceMaskFrame {
  std::string video_id;
  int frame_id = 0;
  int width = 0;
  int height = 0;
  std::vector<MaskInstance> instances;

  FrameKey key() const { return {video_id, frame_id}; }
};

enum class AmbiguityKind {
  kMultiInstanceOneTriplet,
  kMultiTripletOneInstance,
  kTripletWithoutInstance,
  kInstanceWithoutTriplet,
  kFrameMissingInOneSource,
};
inline constexpr int kNumAmbiguityKinds = 5;

std::string_view AmbiguityKindName(AmbiguityKind kind);

// One case left for manual resolution. Triplet-level kinds carry the
// triplet id (one entry per label occurrence); instance-level kinds list the
// instance ids involved.
struct AmbiguityEntry {
  std::string video_id;
  int frame_id = 0;
  AmbiguityKind kind = AmbiguityKind::kFrameMissingInOneSource;
  std::string detail;
  std::optional<int> triplet_id;
  std::vector<int> instance_ids;

  friend bool operator==(const AmbiguityEntry&, const AmbiguityEntry&) = default;
};

struct AmbiguityReport {
  std::vector<AmbiguityEntry> entries;  // sorted by (video_id, frame_id)
};

struct AlignmentResult {
  // One record per frame present in both streams.
  std::vector<FrameRecord> frames;
  AmbiguityReport report;
};

// Fuses the two streams on (video_id, frame_id). Within a frame, for each
// instrument class: with exactly one instance and exactly one label of that
// class, the label is assigned to the instance. Otherwise nothing is
// assigned and every label occurrence is reported:
//   no instance of the class              -> TripletWithoutInstance
//   one instance, several labels          -> MultiTripletOneInstance
//   several instances, one or more labels -> MultiInstanceOneTriplet
// Instances in the last two cases are flagged "ambiguous"; instances whose
// class has no label are flagged "unmatched" and reported as
// InstanceWithoutTriplet. Frames present in one stream only are reported as
// FrameMissingInOneSource. Both inputs must be sorted by (video_id,
// frame_id) without duplicates; violations throw Error(kValidation).
// Videos are aligned independently on up to `jobs` threads; the output does
// not depend on `jobs`.
AlignmentResult AlignFrames(const std::vector<TripletLabelFrame>& labels,
                            const std::vector<InstanceMaskFrame>& masks,
                            const TripletSchema& schema, int jobs = 1);

struct AlignmentVideoStats {
  std::int64_t triplets = 0;
  std::int64_t assigned = 0;
  std::int64_t entries = 0;
};

struct AlignmentSummary {
  std::array<std::int64_t, kNumAmbiguityKinds> by_kind{};
  std::int64_t total_triplets = 0;  // over aligned frames
  std::int64_t assigned = 0;
  double assignment_rate = 1.0;  // 1.0 when there are no labels to assign
  std::map<std::string, AlignmentVideoStats> per_video;
};

AlignmentSummary ComputeAlignmentStats(const AmbiguityReport& report,
                                       const std::vector<FrameRecord>& frames);

Json AlignmentReportToJson(const AmbiguityReport& report);
std::string FormatAlignmentSummary(const AlignmentSummary& summary);

// Label stream CSV: header "video_id,frame_id,triplet_id", one row per label
// occurrence. Consecutive rows of the same frame are grouped; ordering is
// preserved so AlignFrames can reject unsorted input.
std::vector<TripletLabelFrame> ParseLabelCsv(std::string_view text,
                                             const TripletSchema& schema);
std::vector<TripletLabelFrame> ReadLabelStream(const std::filesystem::path& path,
                                               const TripletSchema& schema);

// Mask stream: *.json files in the ground-truth layout, without triplet ids.
// Files are read in name order, frames in file order.
std::vector<InstanceMaskFrame> ParseMaskStreamVideo(std::string_view json_text,
                                                    const std::string& source,
                                                    const TripletSchema& schema);
std::vector<InstanceMaskFrame> ReadMaskStream(const std::filesystem::path& dir,
                                              const TripletSchema& schema);

}  // namespace tripseg

#endif  // TRIPSEG_ALIGNMENT_H_
