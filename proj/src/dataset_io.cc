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

#include "tripseg/dataset_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tripseg/error.h"
#include "tripseg/parallel.h"

namespace tripseg {
namespace fs = std::filesystem;

namespace {

const Json* Field(const Json& object, const char* name) {
  const auto it = object.find(name);
  return it == object.end() ? nullptr : &*it;
}

std::optional<int> AsInt(const Json* value) {
  if (value == nullptr || !value->is_number_integer()) return std::nullopt;
  if (value->is_number_unsigned()) {
    const auto v = value->get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      return std::nullopt;
    }
    return static_cast<int>(v);
  }
  const auto v = value->get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    return std::nullopt;
  }
  return static_cast<int>(v);
}

std::optional<double> AsDouble(const Json* value) {
  if (value == nullptr || !value->is_number()) return std::nullopt;
  return value->get<double>();
}

std::optional<std::string> AsString(const Json* value) {
  if (value == nullptr || !value->is_string()) return std::nullopt;
  return value->get<std::string>();
}

Json ParseJsonOrThrow(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    Fail(ErrorKind::kParse, source + ": JSON parse error: " + e.what());
  }
}

std::vector<fs::path> ListJsonFiles(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    Fail(ErrorKind::kIo, "not a readable directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (ec) Fail(ErrorKind::kIo, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

struct LoadedFile {
  FileDiagnostics diagnostics;
  std::vector<FrameRecord> frames;
};

LoadedFile LoadVideoFile(const fs::path& file, const TripletSchema& schema) {
  LoadedFile loaded;
  loaded.diagnostics.file = file;
  std::string text;
  try {
    text = ReadTextFile(file);
  } catch (const Error& e) {
    loaded.diagnostics.io_error = true;
    loaded.diagnostics.errors.push_back(e.what());
    return loaded;
  }
  const std::string source = file.filename().string();
  loaded.frames =
      ParseGroundTruthVideo(text, source, schema, &loaded.diagnostics.errors);
  loaded.diagnostics.frame_count = static_cast<int>(loaded.frames.size());
  if (!loaded.frames.empty() &&
      loaded.frames.front().video_id != file.stem().string()) {
    loaded.diagnostics.errors.push_back(
        source + ": video_id '" + loaded.frames.front().video_id +
        "' does not match the file name");
  }
  return loaded;
}

std::vector<LoadedFile> LoadDirectory(const fs::path& dir,
                                      const TripletSchema& schema, int jobs) {
  const std::vector<fs::path> files = ListJsonFiles(dir);
  std::vector<LoadedFile> loaded(files.size());
  ParallelFor(files.size(), jobs,
              [&](std::size_t i) { loaded[i] = LoadVideoFile(files[i], schema); });
  return loaded;
}

std::string ScoreRangeMessage(std::size_t index, double score) {
  std::ostringstream msg;
  msg << "prediction " << index << ": score " << score << " is outside [0, 1]";
  return msg.str();
}

}  // namespace

std::string FrameKey::ToString() const {
  return video_id + "/" + std::to_string(frame_id);
}

std::string_view EvalModeName(EvalMode mode) {
  switch (mode) {
    case EvalMode::kSeg: return "seg";
    case EvalMode::kDet: return "det";
    case EvalMode::kRec: return "rec";
  }
  return "?";
}

EvalMode ParseEvalMode(std::string_view name) {
  if (name == "seg") return EvalMode::kSeg;
  if (name == "det") return EvalMode::kDet;
  if (name == "rec") return EvalMode::kRec;
  Fail(ErrorKind::kInvalidArgument,
       "unknown mode '" + std::string(name) + "' (expected seg, det or rec)");
}

Json RleToJson(const RleMask& mask) {
  Json out;
  out["size"] = {mask.height, mask.width};
  out["counts"] = mask.counts;
  return out;
}

RleMask RleFromJson(const Json& value) {
  if (!value.is_object()) Fail(ErrorKind::kParse, "RLE must be an object");
  const Json* size = Field(value, "size");
  const Json* counts = Field(value, "counts");
  if (size == nullptr || !size->is_array() || size->size() != 2) {
    Fail(ErrorKind::kParse, "RLE 'size' must be [height, width]");
  }
  const auto height = AsInt(&(*size)[0]);
  const auto width = AsInt(&(*size)[1]);
  if (!height || !width) Fail(ErrorKind::kParse, "RLE 'size' entries must be integers");
  if (counts == nullptr || !counts->is_array()) {
    Fail(ErrorKind::kParse, "RLE 'counts' must be an array of integers");
  }
  RleMask mask{*height, *width, {}};
  mask.counts.reserve(counts->size());
  for (const auto& c : *counts) {
    if (!c.is_number_unsigned() ||
        c.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      Fail(ErrorKind::kParse, "RLE 'counts' must hold non-negative integers");
    }
    mask.counts.push_back(c.get<std::uint32_t>());
  }
  ValidateRle(mask);
  return mask;
}

std::vector<FrameRecord> ParseGroundTruthVideo(std::string_view json_text,
                                               const std::string& source,
                                               const TripletSchema& schema,
                                               std::vector<std::string>* errors) {
  auto report = [&](const std::string& msg) {
    errors->push_back(source + ": " + msg);
  };
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    report(std::string("JSON parse error: ") + e.what());
    return {};
  }
  if (!doc.is_object()) {
    report("top level must be an object");
    return {};
  }
  const auto video_id = AsString(Field(doc, "video_id"));
  const auto width = AsInt(Field(doc, "width"));
  const auto height = AsInt(Field(doc, "height"));
  const Json* frames_json = Field(doc, "frames");
  bool header_ok = true;
  if (!video_id || video_id->empty()) {
    report("missing string field 'video_id'");
    header_ok = false;
  }
  if (!width || *width <= 0) {
    report("'width' must be a positive integer");
    header_ok = false;
  }
  if (!height || *height <= 0) {
    report("'height' must be a positive integer");
    header_ok = false;
  }
  if (frames_json == nullptr || !frames_json->is_array()) {
    report("missing array field 'frames'");
    header_ok = false;
  }
  if (!header_ok) return {};

  std::vector<FrameRecord> frames;
  std::set<int> frame_ids;
  for (std::size_t fi = 0; fi < frames_json->size(); ++fi) {
    const Json& fj = (*frames_json)[fi];
    const auto frame_id = fj.is_object() ? AsInt(Field(fj, "frame_id")) : std::nullopt;
    if (!frame_id || *frame_id < 0) {
      report("frames[" + std::to_string(fi) +
             "]: 'frame_id' must be a non-negative integer");
      continue;
    }
    const std::string floc = "frame " + std::to_string(*frame_id) + ": ";
    if (!frame_ids.insert(*frame_id).second) {
      report(floc + "duplicate frame_id");
      continue;
    }
    FrameRecord frame;
    frame.video_id = *video_id;
    frame.frame_id = *frame_id;
    frame.width = *width;
    frame.height = *height;
    bool ok = true;

    const Json* ft = Field(fj, "frame_triplets");
    if (ft == nullptr || !ft->is_array()) {
      report(floc + "missing array field 'frame_triplets'");
      ok = false;
    } else {
      for (const auto& t : *ft) {
        const auto id = AsInt(&t);
        if (!id || *id < 0 || *id >= schema.num_triplets()) {
          report(floc + "frame_triplets entry " + t.dump() + " is not a valid triplet id");
          ok = false;
          continue;
        }
        frame.frame_triplets.push_back(*id);
      }
      std::sort(frame.frame_triplets.begin(), frame.frame_triplets.end());
    }

    const Json* insts = Field(fj, "instances");
    if (insts == nullptr || !insts->is_array()) {
      report(floc + "missing array field 'instances'");
      continue;
    }
    std::set<int> instance_ids;
    for (std::size_t ii = 0; ii < insts->size(); ++ii) {
      const Json& ij = (*insts)[ii];
      const auto instance_id =
          ij.is_object() ? AsInt(Field(ij, "instance_id")) : std::nullopt;
      if (!instance_id) {
        report(floc + "instances[" + std::to_string(ii) +
               "]: 'instance_id' must be an integer");
        ok = false;
        continue;
      }
      const std::string iloc = floc + "instance " + std::to_string(*instance_id) + ": ";
      if (!instance_ids.insert(*instance_id).second) {
        report(iloc + "duplicate instance_id");
        ok = false;
        continue;
      }
      GroundedInstance inst;
      inst.instance_id = *instance_id;
      const auto instrument = AsInt(Field(ij, "instrument_id"));
      if (!instrument || *instrument < 0 ||
          *instrument >= schema.counts().instruments) {
        report(iloc + "'instrument_id' is missing or out of range");
        ok = false;
        continue;
      }
      inst.instrument_id = *instrument;
      const Json* tj = Field(ij, "triplet_id");
      if (tj != nullptr && !tj->is_null()) {
        const auto tid = AsInt(tj);
        if (!tid || *tid < 0 || *tid >= schema.num_triplets()) {
          report(iloc + "triplet_id " + tj->dump() + " is out of range");
          ok = false;
          continue;
        }
        const int projected = schema.ProjectIndex(*tid, Component::kI);
        if (projected != inst.instrument_id) {
          report(iloc + "triplet " + std::to_string(*tid) + " has instrument " +
                 std::to_string(projected) + " but instrument_id is " +
                 std::to_string(inst.instrument_id));
          ok = false;
          continue;
        }
        inst.triplet_id = *tid;
      }
      const Json* flags = Field(ij, "flags");
      if (flags != nullptr && !flags->is_null()) {
        if (!flags->is_array()) {
          report(iloc + "'flags' must be an array of strings");
          ok = false;
          continue;
        }
        std::set<std::string> unique;
        for (const auto& f : *flags) {
          if (f.is_string()) unique.insert(f.get<std::string>());
          else {
            report(iloc + "'flags' must be an array of strings");
            ok = false;
          }
        }
        inst.flags.assign(unique.begin(), unique.end());
      }
      const Json* mj = Field(ij, "mask");
      if (mj == nullptr) {
        report(iloc + "missing 'mask'");
        ok = false;
        continue;
      }
      try {
        inst.mask = RleFromJson(*mj);
      } catch (const Error& e) {
        report(iloc + "mask: " + e.what());
        ok = false;
        continue;
      }
      if (inst.mask.height != frame.height || inst.mask.width != frame.width) {
        report(iloc + "mask size [" + std::to_string(inst.mask.height) + "," +
               std::to_string(inst.mask.width) + "] differs from frame size [" +
               std::to_string(frame.height) + "," + std::to_string(frame.width) + "]");
        ok = false;
        continue;
      }
      if (inst.mask.Empty()) {
        report(iloc + "mask is empty");
        ok = false;
        continue;
      }
      frame.instances.push_back(std::move(inst));
    }
    for (const auto& inst : frame.instances) {
      if (inst.triplet_id &&
          !std::binary_search(frame.frame_triplets.begin(),
                              frame.frame_triplets.end(), *inst.triplet_id)) {
        report(floc + "instance " + std::to_string(inst.instance_id) + " triplet " +
               std::to_string(*inst.triplet_id) + " is missing from frame_triplets");
        ok = false;
      }
    }
    if (ok) frames.push_back(std::move(frame));
  }
  std::sort(frames.begin(), frames.end(),
            [](const FrameRecord& a, const FrameRecord& b) {
              return a.frame_id < b.frame_id;
            });
  return frames;
}

std::vector<FileDiagnostics> ValidateGroundTruth(const fs::path& dir,
                                                 const TripletSchema& schema,
                                                 int jobs) {
  std::vector<FileDiagnostics> out;
  for (auto& loaded : LoadDirectory(dir, schema, jobs)) {
    out.push_back(std::move(loaded.diagnostics));
  }
  return out;
}

std::vector<FrameRecord> ReadGroundTruth(const fs::path& dir,
                                         const TripletSchema& schema, int jobs) {
  std::vector<LoadedFile> loaded = LoadDirectory(dir, schema, jobs);
  std::vector<FrameRecord> frames;
  std::set<std::string> videos;
  for (auto& file : loaded) {
    const auto& d = file.diagnostics;
    if (!d.errors.empty()) {
      std::string message = d.errors.front();
      if (d.errors.size() > 1) {
        message += " (and " + std::to_string(d.errors.size() - 1) + " more)";
      }
      Fail(d.io_error ? ErrorKind::kIo : ErrorKind::kValidation, message);
    }
    if (!file.frames.empty() && !videos.insert(file.frames.front().video_id).second) {
      Fail(ErrorKind::kValidation, "video '" + file.frames.front().video_id +
                                       "' appears in more than one file");
    }
    for (auto& f : file.frames) frames.push_back(std::move(f));
  }
  std::sort(frames.begin(), frames.end(),
            [](const FrameRecord& a, const FrameRecord& b) { return a.key() < b.key(); });
  return frames;
}

std::string SerializeGroundTruthVideo(const std::vector<FrameRecord>& frames) {
  if (frames.empty()) {
    Fail(ErrorKind::kInvalidArgument, "cannot serialize a video with no frames");
  }
  const FrameRecord& first = frames.front();
  Json doc;
  doc["video_id"] = first.video_id;
  doc["width"] = first.width;
  doc["height"] = first.height;
  Json frames_json = Json::array();
  for (const auto& frame : frames) {
    if (frame.video_id != first.video_id || frame.width != first.width ||
        frame.height != first.height) {
      Fail(ErrorKind::kInvalidArgument,
           "frames of one video file must share video_id and size");
    }
    Json fj;
    fj["frame_id"] = frame.frame_id;
    std::vector<int> labels = frame.frame_triplets;
    std::sort(labels.begin(), labels.end());
    fj["frame_triplets"] = labels;
    Json insts = Json::array();
    for (const auto& inst : frame.instances) {
      Json ij;
      ij["instance_id"] = inst.instance_id;
      ij["instrument_id"] = inst.instrument_id;
      ij["triplet_id"] = inst.triplet_id ? Json(*inst.triplet_id) : Json(nullptr);
      std::set<std::string> flags(inst.flags.begin(), inst.flags.end());
      ij["flags"] = flags;
      ij["mask"] = RleToJson(inst.mask);
      insts.push_back(std::move(ij));
    }
    fj["instances"] = std::move(insts);
    frames_json.push_back(std::move(fj));
  }
  doc["frames"] = std::move(frames_json);
  return doc.dump() + "\n";
}

void WriteGroundTruth(const std::vector<FrameRecord>& frames, const fs::path& dir) {
  std::map<std::string, std::vector<FrameRecord>> by_video;
  for (const auto& f : frames) {
    if (f.video_id.empty() || f.video_id.find_first_of("/\\") != std::string::npos) {
      Fail(ErrorKind::kInvalidArgument,
           "video id '" + f.video_id + "' cannot be used as a file name");
    }
    by_video[f.video_id].push_back(f);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (auto& [video, video_frames] : by_video) {
    std::sort(video_frames.begin(), video_frames.end(),
              [](const FrameRecord& a, const FrameRecord& b) {
                return a.frame_id < b.frame_id;
              });
    WriteTextFile(dir / (video + ".json"), SerializeGroundTruthVideo(video_frames));
  }
}

std::vector<DetectionRecord> ParseDetections(std::string_view json_text,
                                             EvalMode mode) {
  if (mode == EvalMode::kRec) {
    Fail(ErrorKind::kInvalidArgument, "rec mode predictions are not detections");
  }
  const Json doc = ParseJsonOrThrow(json_text, "predictions");
  if (!doc.is_array()) Fail(ErrorKind::kParse, "predictions: top level must be an array");
  std::vector<DetectionRecord> records;
  records.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& r = doc[i];
    const std::string where = "prediction " + std::to_string(i) + ": ";
    if (!r.is_object()) Fail(ErrorKind::kParse, where + "must be an object");
    if (Field(r, "scores") != nullptr && Field(r, "triplet_id") == nullptr) {
      Fail(ErrorKind::kParse, where + "format mismatch: this is a recognition (rec) "
                                      "record but mode is " +
                                      std::string(EvalModeName(mode)));
    }
    DetectionRecord rec;
    const auto video = AsString(Field(r, "video_id"));
    const auto frame = AsInt(Field(r, "frame_id"));
    const auto triplet = AsInt(Field(r, "triplet_id"));
    const auto score = AsDouble(Field(r, "score"));
    if (!video || !frame || !triplet || !score) {
      Fail(ErrorKind::kParse, where + "requires video_id, frame_id, triplet_id and score");
    }
    if (*triplet < 0) Fail(ErrorKind::kValidation, where + "negative triplet_id");
    if (!std::isfinite(*score) || *score < 0.0 || *score > 1.0) {
      Fail(ErrorKind::kValidation, ScoreRangeMessage(i, *score));
    }
    rec.video_id = *video;
    rec.frame_id = *frame;
    rec.triplet_id = *triplet;
    rec.score = *score;
    const Json* mask = Field(r, "mask");
    if (mask != nullptr && !mask->is_null()) {
      try {
        rec.mask = RleFromJson(*mask);
      } catch (const Error& e) {
        Fail(e.kind(), where + "mask: " + e.what());
      }
    }
    const Json* bbox = Field(r, "bbox");
    if (bbox != nullptr && !bbox->is_null()) {
      if (!bbox->is_array() || bbox->size() != 4) {
        Fail(ErrorKind::kParse, where + "bbox must be [x, y, w, h]");
      }
      BBox box;
      double* slots[4] = {&box.x, &box.y, &box.w, &box.h};
      for (int k = 0; k < 4; ++k) {
        const auto v = AsDouble(&(*bbox)[k]);
        if (!v || !std::isfinite(*v)) {
          Fail(ErrorKind::kParse, where + "bbox entries must be finite numbers");
        }
        *slots[k] = *v;
      }
      if (box.w <= 0 || box.h <= 0) {
        Fail(ErrorKind::kValidation, where + "bbox width and height must be positive");
      }
      rec.bbox = box;
    }
    if (mode == EvalMode::kSeg && !rec.mask) {
      Fail(ErrorKind::kValidation, where + "seg mode requires a mask");
    }
    if (!rec.mask && !rec.bbox) {
      Fail(ErrorKind::kValidation, where + "needs a mask or a bbox");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RecognitionRecord> ParseRecognition(std::string_view json_text,
                                                int num_triplets) {
  const Json doc = ParseJsonOrThrow(json_text, "predictions");
  if (!doc.is_array()) Fail(ErrorKind::kParse, "predictions: top level must be an array");
  std::vector<RecognitionRecord> records;
  std::set<FrameKey> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& r = doc[i];
    const std::string where = "prediction " + std::to_string(i) + ": ";
    if (!r.is_object()) Fail(ErrorKind::kParse, where + "must be an object");
    const Json* scores = Field(r, "scores");
    if (scores == nullptr) {
      Fail(ErrorKind::kParse,
           where + "format mismatch: rec mode expects a 'scores' array" +
               (Field(r, "triplet_id") != nullptr ? " (this looks like a seg/det record)"
                                                  : ""));
    }
    const auto video = AsString(Field(r, "video_id"));
    const auto frame = AsInt(Field(r, "frame_id"));
    if (!video || !frame) Fail(ErrorKind::kParse, where + "requires video_id and frame_id");
    if (!scores->is_array() || static_cast<int>(scores->size()) != num_triplets) {
      Fail(ErrorKind::kValidation, where + "'scores' must hold exactly " +
                                       std::to_string(num_triplets) + " numbers");
    }
    RecognitionRecord rec{*video, *frame, {}};
    rec.scores.reserve(num_triplets);
    for (const auto& s : *scores) {
      const auto v = AsDouble(&s);
      if (!v) Fail(ErrorKind::kParse, where + "'scores' must hold numbers");
      if (!std::isfinite(*v) || *v < 0.0 || *v > 1.0) {
        Fail(ErrorKind::kValidation, ScoreRangeMessage(i, *v));
      }
      rec.scores.push_back(*v);
    }
    if (!seen.insert(rec.key()).second) {
      Fail(ErrorKind::kValidation,
           where + "duplicate recognition record for frame " + rec.key().ToString());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

PredictionSet ReadPredictions(const fs::path& path, EvalMode mode, int num_triplets) {
  const std::string text = ReadTextFile(path);
  try {
    if (mode == EvalMode::kRec) return ParseRecognition(text, num_triplets);
    return ParseDetections(text, mode);
  } catch (const Error& e) {
    Fail(e.kind(), path.filename().string() + ": " + e.what());
  }
}

std::string SerializeDetections(const std::vector<DetectionRecord>& records) {
  Json doc = Json::array();
  for (const auto& r : records) {
    Json j;
    j["video_id"] = r.video_id;
    j["frame_id"] = r.frame_id;
    j["triplet_id"] = r.triplet_id;
    j["score"] = r.score;
    j["mask"] = r.mask ? RleToJson(*r.mask) : Json(nullptr);
    j["bbox"] = r.bbox ? Json({r.bbox->x, r.bbox->y, r.bbox->w, r.bbox->h})
                       : Json(nullptr);
    doc.push_back(std::move(j));
  }
  return doc.dump() + "\n";
}

std::string SerializeRecognition(const std::vector<RecognitionRecord>& records) {
  Json doc = Json::array();
  for (const auto& r : records) {
    Json j;
    j["video_id"] = r.video_id;
    j["frame_id"] = r.frame_id;
    j["scores"] = r.scores;
    doc.push_back(std::move(j));
  }
  return doc.dump() + "\n";
}

StatsSummary ComputeDatasetStats(const std::vector<FrameRecord>& frames,
                                 const TripletSchema& schema) {
  StatsSummary s;
  s.instrument_hist.assign(schema.counts().instruments, 0);
  s.verb_hist.assign(schema.counts().verbs, 0);
  s.target_hist.assign(schema.counts().targets, 0);
  s.triplet_hist.assign(schema.num_triplets(), 0);
  for (const auto& frame : frames) {
    VideoStats& v = s.per_video[frame.video_id];
    ++s.frames;
    ++v.frames;
    s.frame_labels += static_cast<std::int64_t>(frame.frame_triplets.size());
    for (const auto& inst : frame.instances) {
      ++s.instances;
      ++v.instances;
      if (!inst.triplet_id) continue;
      ++s.grounded;
      ++v.grounded;
      const auto& c = schema.Components(*inst.triplet_id);
      ++s.instrument_hist[c.instrument];
      ++s.verb_hist[c.verb];
      ++s.target_hist[c.target];
      ++s.triplet_hist[*inst.triplet_id];
    }
  }
  return s;
}

Json StatsToJson(const StatsSummary& stats, const TripletSchema& schema) {
  auto named = [](const std::vector<std::int64_t>& hist, auto&& name_of) {
    Json out;
    for (std::size_t i = 0; i < hist.size(); ++i) out[name_of(static_cast<int>(i))] = hist[i];
    return out;
  };
  Json out;
  out["frames"] = stats.frames;
  out["instances"] = stats.instances;
  out["grounded_triplets"] = stats.grounded;
  out["frame_level_labels"] = stats.frame_labels;
  out["videos"] = stats.per_video.size();
  out["instrument_histogram"] =
      named(stats.instrument_hist, [&](int i) { return schema.InstrumentName(i); });
  out["verb_histogram"] =
      named(stats.verb_hist, [&](int i) { return schema.VerbName(i); });
  out["target_histogram"] =
      named(stats.target_hist, [&](int i) { return schema.TargetName(i); });
  out["triplet_histogram"] = stats.triplet_hist;
  Json videos = Json::object();
  for (const auto& [id, v] : stats.per_video) {
    videos[id] = {{"frames", v.frames}, {"instances", v.instances}, {"grounded", v.grounded}};
  }
  out["per_video"] = std::move(videos);
  return out;
}

std::string WithThousands(std::int64_t value) {
  std::string digits = std::to_string(value < 0 ? -value : value);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return value < 0 ? "-" + out : out;
}

std::string FormatStats(const StatsSummary& stats, const TripletSchema& schema) {
  std::ostringstream out;
  out << WithThousands(stats.frames) << " annotated frames and "
      << WithThousands(stats.grounded) << " spatially grounded triplets from "
      << stats.per_video.size() << " videos\n";
  out << "instances: " << WithThousands(stats.instances)
      << " (ungrounded: " << WithThousands(stats.instances - stats.grounded) << ")\n";
  out << "frame-level triplet labels: " << WithThousands(stats.frame_labels) << "\n";
  auto hist = [&](const char* title, const std::vector<std::int64_t>& h,
                  auto&& name_of) {
    out << title << ":";
    for (std::size_t i = 0; i < h.size(); ++i) {
      out << " " << name_of(static_cast<int>(i)) << "=" << h[i];
    }
    out << "\n";
  };
  hist("instruments", stats.instrument_hist,
       [&](int i) { return schema.InstrumentName(i); });
  hist("verbs", stats.verb_hist, [&](int i) { return schema.VerbName(i); });
  hist("targets", stats.target_hist, [&](int i) { return schema.TargetName(i); });
  return out.str();
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) Fail(ErrorKind::kIo, "failed reading " + path.string());
  return buffer.str();
}

void WriteTextFile(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace tripseg
