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

#ifndef TRIPSEG_DATASET_IO_H_
#define TRIPSEG_DATASET_IO_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tripseg/mask.h"
#include "tripseg/schema.h"

namespace tripseg {

using Json = nlohmann::ordered_json;

// (video, frame index) key shared by ground truth, predictions and the
// alignment streams. Orders by video id, then frame id.
struct FrameKey {
  std::string video_id;
  int frame_id = 0;

  std::string ToString() const;
  friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
  friend bool operator==(const FrameKey&, const FrameKey&) = default;
};

inline constexpr std::string_view kFlagUnmatched = "unmatched";
inline constexpr std::string_view kFlagAmbiguous = "ambiguous";

// One instrument instance mask, linked to a triplet when the link is known.
struct GroundedInstance {
  int instance_id = 0;
  int instrument_id = 0;
  std::optional<int> triplet_id;
  RleMask mask;
  std::vector<std::string> flags;  // sorted, unique

  bool grounded() const { return triplet_id.has_value(); }
  friend bool operator==(const GroundedInstance&,
                         const GroundedInstance&) = default;
};

struct FrameRecord {
  std::string video_id;
  int frame_id = 0;
  int width = 0;
  int height = 0;
  std::vector<GroundedInstance> instances;
  // Frame-level labels, sorted; may repeat a triplet and may contain
  // triplets with no instance (out-of-view interactions).
  std::vector<int> frame_triplets;

  FrameKey key() const { return {video_id, frame_id}; }
  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct DetectionRecord {
  std::string video_id;
  int frame_id = 0;
  int triplet_id = 0;
  double score = 0;
  std::optional<RleMask> mask;
  std::optional<BBox> bbox;

  FrameKey key() const { return {video_id, frame_id}; }
};

struct RecognitionRecord {
  std::string video_id;
  int frame_id = 0;
  std::vector<double> scores;  // one per triplet id

  FrameKey key() const { return {video_id, frame_id}; }
};

enum class EvalMode { kSeg, kDet, kRec };

std::string_view EvalModeName(EvalMode mode);
EvalMode ParseEvalMode(std::string_view name);

// ---------------------------------------------------------------------------
// RLE <-> JSON: {"size":[H,W],"counts":[c0,c1,...]}
// ---------------------------------------------------------------------------

Json RleToJson(const RleMask& mask);
// Throws Error(kParse) on shape errors and Error(kValidation) on RLE
// invariant violations.
RleMask RleFromJson(const Json& value);

// ---------------------------------------------------------------------------
// Ground truth: one <video_id>.json per video.
// ---------------------------------------------------------------------------

// Problems found in one ground-truth file. `io_error` is set when the file
// could not be read at all.
struct FileDiagnostics {
  std::filesystem::path file;
  std::vector<std::string> errors;
  bool io_error = false;
  int frame_count = 0;
};

// Parses one video file, appending every violation to `errors` with a
// "frame <id>: instance <id>:" locus. Returns the frames that parsed, sorted
// by frame id.
std::vector<FrameRecord> ParseGroundTruthVideo(std::string_view json_text,
                                               const std::string& source,
                                               const TripletSchema& schema,
                                               std::vector<std::string>* errors);

// Validates every *.json file under `dir` without stopping at the first
// problem. Throws Error(kIo) when `dir` is not a readable directory.
std::vector<FileDiagnostics> ValidateGroundTruth(
    const std::filesystem::path& dir, const TripletSchema& schema, int jobs = 1);

// Loads every *.json file under `dir`, sorted by (video_id, frame_id).
// Throws on the first invalid file with the file, frame and instance locus.
std::vector<FrameRecord> ReadGroundTruth(const std::filesystem::path& dir,
                                         const TripletSchema& schema,
                                         int jobs = 1);

// Canonical serialization of one video's frames (all must share video_id
// and dimensions).
std::string SerializeGroundTruthVideo(const std::vector<FrameRecord>& frames);

// Writes <dir>/<video_id>.json per video, creating `dir` if needed.
void WriteGroundTruth(const std::vector<FrameRecord>& frames,
                      const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Predictions.
// ---------------------------------------------------------------------------

using PredictionSet =
    std::variant<std::vector<DetectionRecord>, std::vector<RecognitionRecord>>;

// seg/det: array of {"video_id","frame_id","triplet_id","score","mask","bbox"}.
// seg mode requires a mask on every record; det mode needs a mask or a box.
std::vector<DetectionRecord> ParseDetections(std::string_view json_text,
                                             EvalMode mode);
// rec: array of {"video_id","frame_id","scores":[num_triplets floats]}, at
// most one record per frame.
std::vector<RecognitionRecord> ParseRecognition(std::string_view json_text,
                                                int num_triplets = 100);

PredictionSet ReadPredictions(const std::filesystem::path& path, EvalMode mode,
                              int num_triplets = 100);

std::string SerializeDetections(const std::vector<DetectionRecord>& records);
std::string SerializeRecognition(const std::vector<RecognitionRecord>& records);

// ---------------------------------------------------------------------------
// Statistics.
// ---------------------------------------------------------------------------

struct VideoStats {
  std::int64_t frames = 0;
  std::int64_t instances = 0;
  std::int64_t grounded = 0;

  friend bool operator==(const VideoStats&, const VideoStats&) = default;
};

struct StatsSummary {
  std::int64_t frames = 0;
  std::int64_t instances = 0;
  std::int64_t grounded = 0;  // instances carrying a triplet id
  std::int64_t frame_labels = 0;
  // Grounded-instance histograms, indexed by component id.
  std::vector<std::int64_t> instrument_hist;
  std::vector<std::int64_t> verb_hist;
  std::vector<std::int64_t> target_hist;
  std::vector<std::int64_t> triplet_hist;
  std::map<std::string, VideoStats> per_video;

  friend bool operator==(const StatsSummary&, const StatsSummary&) = default;
};

StatsSummary ComputeDatasetStats(const std::vector<FrameRecord>& frames,
                                 const TripletSchema& schema);
Json StatsToJson(const StatsSummary& stats, const TripletSchema& schema);
// Human summary, headed by "<N> annotated frames and <M> spatially grounded
// triplets from <V> videos" with thousands separators.
std::string FormatStats(const StatsSummary& stats, const TripletSchema& schema);

// 49866 -> "49,866".
std::string WithThousands(std::int64_t value);

// Whole-file helpers shared by the readers and the CLI. Both throw
// Error(kIo).
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace tripseg

#endif  // TRIPSEG_DATASET_IO_H_
