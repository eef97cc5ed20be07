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

#include "tripseg/alignment.h"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "tripseg/error.h"
#include "tripseg/parallel.h"

namespace tripseg {
namespace fs = std::filesystem;

namespace {

template <typename Frame>
void CheckSorted(const std::vector<Frame>& frames, std::string_view stream) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const FrameKey prev = frames[i - 1].key();
    const FrameKey cur = frames[i].key();
    if (cur == prev) {
      Fail(ErrorKind::kValidation, std::string(stream) + " stream has duplicate frame " +
                                       cur.ToString());
    }
    if (cur < prev) {
      Fail(ErrorKind::kValidation, std::string(stream) + " stream is not sorted: " +
                                       cur.ToString() + " follows " + prev.ToString());
    }
  }
}

// Contiguous [begin, end) ranges per video, keyed by video id.
template <typename Frame>
std::map<std::string, std::pair<std::size_t, std::size_t>> VideoRanges(
    const std::vector<Frame>& frames) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto [it, inserted] = ranges.try_emplace(frames[i].video_id, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
  return ranges;
}

std::string JoinIds(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(ids[i]);
  }
  return out;
}

void AddFlag(GroundedInstance& inst, std::string_view flag) {
  if (std::find(inst.flags.begin(), inst.flags.end(), flag) == inst.flags.end()) {
    inst.flags.emplace_back(flag);
    std::sort(inst.flags.begin(), inst.flags.end());
  }
}

FrameRecord AlignOneFrame(const TripletLabelFrame& labels, const InstanceMaskFrame& masks,
                          const TripletSchema& schema,
                          std::vector<AmbiguityEntry>& entries) {
  FrameRecord record;
  record.video_id = masks.video_id;
  record.frame_id = masks.frame_id;
  record.width = masks.width;
  record.height = masks.height;
  record.frame_triplets = labels.triplets;
  std::sort(record.frame_triplets.begin(), record.frame_triplets.end());

  std::map<int, std::vector<std::size_t>> instances_by_class;
  for (std::size_t i = 0; i < masks.instances.size(); ++i) {
    const MaskInstance& m = masks.instances[i];
    record.instances.push_back({m.instance_id, m.instrument_id, std::nullopt, m.mask, {}});
    instances_by_class[m.instrument_id].push_back(i);
  }
  std::map<int, std::vector<int>> labels_by_class;
  for (int t : labels.triplets) {
    labels_by_class[schema.ProjectIndex(t, Component::kI)].push_back(t);
  }
  std::set<int> classes;
  for (const auto& [c, v] : instances_by_class) classes.insert(c);
  for (const auto& [c, v] : labels_by_class) classes.insert(c);

  auto entry = [&](AmbiguityKind kind, std::string detail, std::optional<int> triplet,
                   std::vector<int> instance_ids) {
    entries.push_back({record.video_id, record.frame_id, kind, std::move(detail), triplet,
                       std::move(instance_ids)});
  };

  for (int cls : classes) {
    const std::vector<std::size_t>& insts = instances_by_class[cls];
    const std::vector<int>& trips = labels_by_class[cls];
    std::vector<int> ids;
    for (std::size_t i : insts) ids.push_back(record.instances[i].instance_id);
    const std::string cls_name = schema.InstrumentName(cls);

    if (insts.empty()) {
      for (int t : trips) {
        entry(AmbiguityKind::kTripletWithoutInstance,
              "triplet " + std::to_string(t) + " has no " + cls_name + " instance", t, {});
      }
    } else if (trips.empty()) {
      for (std::size_t i : insts) {
        GroundedInstance& inst = record.instances[i];
        AddFlag(inst, kFlagUnmatched);
        entry(AmbiguityKind::kInstanceWithoutTriplet,
              cls_name + " instance " + std::to_string(inst.instance_id) +
                  " has no triplet label",
              std::nullopt, {inst.instance_id});
      }
    } else if (insts.size() == 1 && trips.size() == 1) {
      record.instances[insts.front()].triplet_id = trips.front();
    } else {
      const bool one_instance = insts.size() == 1;
      for (std::size_t i : insts) AddFlag(record.instances[i], kFlagAmbiguous);
      for (int t : trips) {
        if (one_instance) {
          entry(AmbiguityKind::kMultiTripletOneInstance,
                "triplet " + std::to_string(t) + " competes with " +
                    std::to_string(trips.size() - 1) + " other " + cls_name +
                    " label(s) for instance " + JoinIds(ids),
                t, ids);
        } else {
          entry(AmbiguityKind::kMultiInstanceOneTriplet,
                "triplet " + std::to_string(t) + " matches " +
                    std::to_string(insts.size()) + " " + cls_name +
                    " instances (" + JoinIds(ids) + ")",
                t, ids);
        }
      }
    }
  }
  return record;
}

struct VideoAlignment {
  std::vector<FrameRecord> frames;
  std::vector<AmbiguityEntry> entries;
};

}  // namespace

std::string_view AmbiguityKindName(AmbiguityKind kind) {
  switch (kind) {
    case AmbiguityKind::kMultiInstanceOneTriplet: return "MultiInstanceOneTriplet";
    case AmbiguityKind::kMultiTripletOneInstance: return "MultiTripletOneInstance";
    case AmbiguityKind::kTripletWithoutInstance: return "TripletWithoutInstance";
    case AmbiguityKind::kInstanceWithoutTriplet: return "InstanceWithoutTriplet";
    case AmbiguityKind::kFrameMissingInOneSource: return "FrameMissingInOneSource";
  }
  return "?";
}

AlignmentResult AlignFrames(const std::vector<TripletLabelFrame>& labels,
                            const std::vector<InstanceMaskFrame>& masks,
                            const TripletSchema& schema, int jobs) {
  CheckSorted(labels, "label");
  CheckSorted(masks, "mask");
  for (const auto& l : labels) {
    for (int t : l.triplets) schema.Components(t);
  }
  for (const auto& m : masks) {
    std::set<int> ids;
    for (const auto& inst : m.instances) {
      const std::string where =
          "mask stream " + m.key().ToString() + " instance " + std::to_string(inst.instance_id);
      if (!ids.insert(inst.instance_id).second) {
        Fail(ErrorKind::kValidation, where + ": duplicate instance_id");
      }
      if (inst.instrument_id < 0 || inst.instrument_id >= schema.counts().instruments) {
        Fail(ErrorKind::kValidation, where + ": instrument_id out of range");
      }
      if (inst.mask.Empty()) Fail(ErrorKind::kValidation, where + ": empty mask");
    }
  }

  const auto label_ranges = VideoRanges(labels);
  const auto mask_ranges = VideoRanges(masks);
  std::vector<std::string> videos;
  for (const auto& [v, r] : label_ranges) videos.push_back(v);
  for (const auto& [v, r] : mask_ranges) {
    if (!label_ranges.count(v)) videos.push_back(v);
  }
  std::sort(videos.begin(), videos.end());

  std::vector<VideoAlignment> per_video(videos.size());
  ParallelFor(videos.size(), jobs, [&](std::size_t vi) {
    const std::string& video = videos[vi];
    VideoAlignment& out = per_video[vi];
    std::size_t li = 0, le = 0, mi = 0, me = 0;
    if (auto it = label_ranges.find(video); it != label_ranges.end()) {
      std::tie(li, le) = it->second;
    }
    if (auto it = mask_ranges.find(video); it != mask_ranges.end()) {
      std::tie(mi, me) = it->second;
    }
    while (li < le || mi < me) {
      const bool take_label = li < le && (mi >= me || labels[li].frame_id <= masks[mi].frame_id);
      const bool take_mask = mi < me && (li >= le || masks[mi].frame_id <= labels[li].frame_id);
      if (take_label && take_mask) {
        out.frames.push_back(AlignOneFrame(labels[li], masks[mi], schema, out.entries));
        ++li;
        ++mi;
      } else if (take_label) {
        out.entries.push_back({video, labels[li].frame_id,
                               AmbiguityKind::kFrameMissingInOneSource,
                               "frame has triplet labels but no instance masks",
                               std::nullopt, {}});
        ++li;
      } else {
        out.entries.push_back({video, masks[mi].frame_id,
                               AmbiguityKind::kFrameMissingInOneSource,
                               "frame has instance masks but no triplet labels",
                               std::nullopt, {}});
        ++mi;
      }
    }
  });

  AlignmentResult result;
  for (auto& v : per_video) {
    for (auto& f : v.frames) result.frames.push_back(std::move(f));
    for (auto& e : v.entries) result.report.entries.push_back(std::move(e));
  }
  return result;
}

AlignmentSummary ComputeAlignmentStats(const AmbiguityReport& report,
                                       const std::vector<FrameRecord>& frames) {
  AlignmentSummary s;
  for (const auto& e : report.entries) {
    ++s.by_kind[static_cast<int>(e.kind)];
    ++s.per_video[e.video_id].entries;
  }
  for (const auto& f : frames) {
    AlignmentVideoStats& v = s.per_video[f.video_id];
    const auto labels = static_cast<std::int64_t>(f.frame_triplets.size());
    s.total_triplets += labels;
    v.triplets += labels;
    for (const auto& inst : f.instances) {
      if (inst.triplet_id) {
        ++s.assigned;
        ++v.assigned;
      }
    }
  }
  if (s.total_triplets > 0) {
    s.assignment_rate =
        static_cast<double>(s.assigned) / static_cast<double>(s.total_triplets);
  }
  return s;
}

Json AlignmentReportToJson(const AmbiguityReport& report) {
  Json out = Json::array();
  for (const auto& e : report.entries) {
    Json j;
    j["video_id"] = e.video_id;
    j["frame_id"] = e.frame_id;
    j["kind"] = AmbiguityKindName(e.kind);
    j["detail"] = e.detail;
    j["triplet_id"] = e.triplet_id ? Json(*e.triplet_id) : Json(nullptr);
    j["instance_ids"] = e.instance_ids;
    out.push_back(std::move(j));
  }
  return out;
}

std::string FormatAlignmentSummary(const AlignmentSummary& s) {
  std::ostringstream out;
  out << "aligned triplet labels: " << WithThousands(s.assigned) << " of "
      << WithThousands(s.total_triplets) << " assigned (rate ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", s.assignment_rate);
  out << buf << ")\n";
  for (int k = 0; k < kNumAmbiguityKinds; ++k) {
    out << "  " << AmbiguityKindName(static_cast<AmbiguityKind>(k)) << ": "
        << WithThousands(s.by_kind[k]) << "\n";
  }
  return out.str();
}

std::vector<TripletLabelFrame> ParseLabelCsv(std::string_view text,
                                             const TripletSchema& schema) {
  std::vector<TripletLabelFrame> frames;
  int line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != "video_id,frame_id,triplet_id") {
        Fail(ErrorKind::kParse, "label CSV line 1: expected header "
                                "'video_id,frame_id,triplet_id'");
      }
      header = true;
      continue;
    }
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      Fail(ErrorKind::kParse, "label CSV line " + std::to_string(line_no) +
                                  ": expected 3 fields");
    }
    const std::string_view video = line.substr(0, c1);
    auto parse = [&](std::string_view field) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        Fail(ErrorKind::kParse, "label CSV line " + std::to_string(line_no) +
                                    ": expected integer, got '" + std::string(field) + "'");
      }
      return v;
    };
    const int frame = parse(line.substr(c1 + 1, c2 - c1 - 1));
    const int triplet = parse(line.substr(c2 + 1));
    if (video.empty()) {
      Fail(ErrorKind::kParse, "label CSV line " + std::to_string(line_no) + ": empty video_id");
    }
    if (triplet < 0 || triplet >= schema.num_triplets()) {
      Fail(ErrorKind::kValidation, "label CSV line " + std::to_string(line_no) +
                                       ": triplet_id " + std::to_string(triplet) +
                                       " is out of range");
    }
    if (frames.empty() || frames.back().video_id != video || frames.back().frame_id != frame) {
      frames.push_back({std::string(video), frame, {}});
    }
    frames.back().triplets.push_back(triplet);
  }
  if (!header) Fail(ErrorKind::kParse, "label CSV is empty");
  return frames;
}

std::vector<TripletLabelFrame> ReadLabelStream(const fs::path& path,
                                               const TripletSchema& schema) {
  return ParseLabelCsv(ReadTextFile(path), schema);
}

std::vector<InstanceMaskFrame> ParseMaskStreamVideo(std::string_view json_text,
                                                    const std::string& source,
                                                    const TripletSchema& schema) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    Fail(ErrorKind::kParse, source + ": JSON parse error: " + e.what());
  }
  auto fail = [&](const std::string& msg) { Fail(ErrorKind::kParse, source + ": " + msg); };
  if (!doc.is_object() || !doc.contains("video_id") || !doc["video_id"].is_string() ||
      !doc.contains("width") || !doc["width"].is_number_integer() ||
      !doc.contains("height") || !doc["height"].is_number_integer() ||
      !doc.contains("frames") || !doc["frames"].is_array()) {
    fail("expected {\"video_id\", \"width\", \"height\", \"frames\"}");
  }
  const std::string video = doc["video_id"].get<std::string>();
  const int width = doc["width"].get<int>();
  const int height = doc["height"].get<int>();
  if (width <= 0 || height <= 0) fail("frame size must be positive");
  std::vector<InstanceMaskFrame> frames;
  for (const auto& fj : doc["frames"]) {
    if (!fj.is_object() || !fj.contains("frame_id") || !fj["frame_id"].is_number_integer() ||
        !fj.contains("instances") || !fj["instances"].is_array()) {
      fail("each frame needs an integer frame_id and an instances array");
    }
    InstanceMaskFrame frame{video, fj["frame_id"].get<int>(), width, height, {}};
    const std::string floc = "frame " + std::to_string(frame.frame_id) + ": ";
    for (const auto& ij : fj["instances"]) {
      if (!ij.is_object() || !ij.contains("instance_id") ||
          !ij["instance_id"].is_number_integer() || !ij.contains("instrument_id") ||
          !ij["instrument_id"].is_number_integer() || !ij.contains("mask")) {
        fail(floc + "instances need instance_id, instrument_id and mask");
      }
      MaskInstance inst;
      inst.instance_id = ij["instance_id"].get<int>();
      inst.instrument_id = ij["instrument_id"].get<int>();
      const std::string iloc = floc + "instance " + std::to_string(inst.instance_id) + ": ";
      if (ij.contains("triplet_id") && !ij["triplet_id"].is_null()) {
        Fail(ErrorKind::kValidation, source + ": " + iloc +
                                         "mask stream instances must not carry a triplet_id");
      }
      if (inst.instrument_id < 0 || inst.instrument_id >= schema.counts().instruments) {
        Fail(ErrorKind::kValidation, source + ": " + iloc + "instrument_id out of range");
      }
      try {
        inst.mask = RleFromJson(ij["mask"]);
      } catch (const Error& e) {
        Fail(e.kind(), source + ": " + iloc + "mask: " + e.what());
      }
      if (inst.mask.height != height || inst.mask.width != width) {
        Fail(ErrorKind::kValidation, source + ": " + iloc + "mask size differs from frame size");
      }
      frame.instances.push_back(std::move(inst));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<InstanceMaskFrame> ReadMaskStream(const fs::path& dir,
                                              const TripletSchema& schema) {
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
  std::sort(files.begin(), files.end());
  std::vector<InstanceMaskFrame> frames;
  for (const auto& file : files) {
    for (auto& f : ParseMaskStreamVideo(ReadTextFile(file), file.filename().string(), schema)) {
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

}  // namespace tripseg
