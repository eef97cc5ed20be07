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

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tripseg/eval.h"

namespace tripseg {
namespace {

Json NumberOrNull(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::string Fixed2(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

Json ReportToJson(const EvalReport& report, const TripletSchema& schema) {
  Json out;
  out["mode"] = EvalModeName(report.mode);
  out["iou_threshold"] = report.iou_threshold;
  out["averaging"] = AveragingName(report.averaging);
  out["ap_method"] = ApMethodName(report.ap_method);
  out["matching"] = report.mode == EvalMode::kRec ? "frame_level" : kMatchingRule;
  out["frame_count"] = report.frame_count;
  Json components = Json::object();
  for (const auto& c : report.components) {
    Json cj;
    cj["mAP"] = NumberOrNull(c.map);
    Json per_class = Json::object();
    for (const auto& [cls, ap] : c.per_class_ap) {
      per_class[schema.KeyForIndex(c.component, cls).ToString()] = ap;
    }
    cj["per_class"] = std::move(per_class);
    cj["gt_count"] = c.gt_count;
    cj["pred_count"] = c.pred_count;
    components[std::string(ComponentName(c.component))] = std::move(cj);
  }
  out["components"] = std::move(components);
  out["unknown_frame_predictions"] = report.unknown_frame_predictions;
  out["warnings"] = report.warnings;
  return out;
}

std::string RenderReportTable(const EvalReport& report, std::string_view label) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-24s", "method");
  out << buf;
  for (Component c : kAllComponents) {
    std::snprintf(buf, sizeof(buf), " %9s",
                  ("mAP_" + std::string(ComponentName(c))).c_str());
    out << buf;
  }
  out << "\n";
  std::snprintf(buf, sizeof(buf), "%-24s", std::string(label).c_str());
  out << buf;
  for (Component c : kAllComponents) {
    const ComponentResult* r = report.Find(c);
    std::snprintf(buf, sizeof(buf), " %9s", r ? Fixed2(r->map).c_str() : "-");
    out << buf;
  }
  out << "\n";
  return out.str();
}

}  // namespace tripseg
