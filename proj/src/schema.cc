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

#include "tripseg/schema.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "tripseg/error.h"

namespace tripseg {
namespace {

constexpr std::string_view kSchemaHeader =
    "triplet_id,instrument_id,verb_id,target_id,instrument_name,verb_name,"
    "target_name";

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

int ParseInt(std::string_view field, int line_no) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    Fail(ErrorKind::kParse, "schema line " + std::to_string(line_no) +
                                ": expected integer, got '" +
                                std::string(field) + "'");
  }
  return value;
}

std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

void AssignName(std::vector<std::string>& names, int id,
                const std::string& name, std::string_view what) {
  if (names[id].empty()) {
    names[id] = name;
  } else if (names[id] != name) {
    Fail(ErrorKind::kValidation,
         "schema: " + std::string(what) + " id " + std::to_string(id) +
             " has conflicting names '" + names[id] + "' and '" + name + "'");
  }
}

}  // namespace

std::string_view ComponentName(Component c) {
  switch (c) {
    case Component::kI: return "I";
    case Component::kV: return "V";
    case Component::kT: return "T";
    case Component::kIV: return "IV";
    case Component::kIT: return "IT";
    case Component::kIVT: return "IVT";
  }
  return "?";
}

Component ParseComponent(std::string_view name) {
  for (Component c : kAllComponents) {
    if (ComponentName(c) == name) return c;
  }
  Fail(ErrorKind::kInvalidArgument,
       "unknown component '" + std::string(name) +
           "' (expected one of I, V, T, IV, IT, IVT)");
}

std::string ComponentKey::ToString() const {
  if (component == Component::kIV || component == Component::kIT) {
    return std::to_string(first) + "," + std::to_string(second);
  }
  return std::to_string(first);
}

TripletSchema TripletSchema::FromRows(std::vector<SchemaRow> rows,
                                      const SchemaCounts& counts) {
  if (static_cast<int>(rows.size()) != counts.triplets) {
    Fail(ErrorKind::kValidation,
         "schema: expected " + std::to_string(counts.triplets) +
             " triplet entries, found " + std::to_string(rows.size()));
  }
  TripletSchema schema;
  schema.counts_ = counts;
  schema.rows_.resize(rows.size());
  schema.instrument_names_.resize(counts.instruments);
  schema.verb_names_.resize(counts.verbs);
  schema.target_names_.resize(counts.targets);

  std::vector<bool> seen_id(rows.size(), false);
  std::set<std::tuple<int, int, int>> seen_tuple;
  for (auto& row : rows) {
    const auto& c = row.components;
    const std::string where = "schema: triplet " + std::to_string(row.triplet_id);
    if (row.triplet_id < 0 || row.triplet_id >= counts.triplets) {
      Fail(ErrorKind::kValidation, where + " is out of range [0, " +
                                       std::to_string(counts.triplets) + ")");
    }
    if (seen_id[row.triplet_id]) {
      Fail(ErrorKind::kValidation, where + " is duplicated");
    }
    seen_id[row.triplet_id] = true;
    if (c.instrument < 0 || c.instrument >= counts.instruments ||
        c.verb < 0 || c.verb >= counts.verbs || c.target < 0 ||
        c.target >= counts.targets) {
      Fail(ErrorKind::kValidation, where + " has an out-of-range component id");
    }
    if (!seen_tuple.emplace(c.instrument, c.verb, c.target).second) {
      Fail(ErrorKind::kValidation,
           where + " repeats the (instrument, verb, target) tuple of an "
                   "earlier row");
    }
    AssignName(schema.instrument_names_, c.instrument, row.instrument_name,
               "instrument");
    AssignName(schema.verb_names_, c.verb, row.verb_name, "verb");
    AssignName(schema.target_names_, c.target, row.target_name, "target");
    const int id = row.triplet_id;
    schema.rows_[id] = std::move(row);
  }

  for (Component comp : kAllComponents) {
    std::set<int> realized;
    for (int t = 0; t < counts.triplets; ++t) {
      realized.insert(schema.ProjectIndex(t, comp));
    }
    schema.realized_[static_cast<int>(comp)].assign(realized.begin(),
                                                    realized.end());
  }
  return schema;
}

const TripletComponents& TripletSchema::Components(int triplet_id) const {
  if (triplet_id < 0 || triplet_id >= counts_.triplets) {
    Fail(ErrorKind::kInvalidArgument,
         "triplet id " + std::to_string(triplet_id) + " is out of range [0, " +
             std::to_string(counts_.triplets) + ")");
  }
  return rows_[triplet_id].components;
}

ComponentKey TripletSchema::Project(int triplet_id, Component component) const {
  const TripletComponents& c = Components(triplet_id);
  switch (component) {
    case Component::kI: return {component, c.instrument};
    case Component::kV: return {component, c.verb};
    case Component::kT: return {component, c.target};
    case Component::kIV: return {component, c.instrument, c.verb};
    case Component::kIT: return {component, c.instrument, c.target};
    case Component::kIVT: return {component, triplet_id};
  }
  return {};
}

int TripletSchema::ProjectIndex(int triplet_id, Component component) const {
  const TripletComponents& c = Components(triplet_id);
  switch (component) {
    case Component::kI: return c.instrument;
    case Component::kV: return c.verb;
    case Component::kT: return c.target;
    case Component::kIV: return c.instrument * counts_.verbs + c.verb;
    case Component::kIT: return c.instrument * counts_.targets + c.target;
    case Component::kIVT: return triplet_id;
  }
  return -1;
}

int TripletSchema::ClassCount(Component component) const {
  switch (component) {
    case Component::kI: return counts_.instruments;
    case Component::kV: return counts_.verbs;
    case Component::kT: return counts_.targets;
    case Component::kIV: return counts_.instruments * counts_.verbs;
    case Component::kIT: return counts_.instruments * counts_.targets;
    case Component::kIVT: return counts_.triplets;
  }
  return 0;
}

ComponentKey TripletSchema::KeyForIndex(Component component, int index) const {
  switch (component) {
    case Component::kIV:
      return {component, index / counts_.verbs, index % counts_.verbs};
    case Component::kIT:
      return {component, index / counts_.targets, index % counts_.targets};
    default:
      return {component, index};
  }
}

const std::vector<int>& TripletSchema::RealizedClasses(
    Component component) const {
  return realized_[static_cast<int>(component)];
}

TripletSchema ParseSchemaCsv(std::string_view text, const SchemaCounts& counts) {
  std::vector<SchemaRow> rows;
  int line_no = 0;
  bool saw_header = false;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = StripCr(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
    ++line_no;
    if (!saw_header) {
      if (line != kSchemaHeader) {
        Fail(ErrorKind::kParse, "schema line 1: expected header '" +
                                    std::string(kSchemaHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = SplitCommas(line);
    if (fields.size() != 7) {
      Fail(ErrorKind::kParse, "schema line " + std::to_string(line_no) +
                                  ": expected 7 fields, found " +
                                  std::to_string(fields.size()));
    }
    SchemaRow row;
    row.triplet_id = ParseInt(fields[0], line_no);
    row.components = {ParseInt(fields[1], line_no), ParseInt(fields[2], line_no),
                      ParseInt(fields[3], line_no)};
    row.instrument_name = fields[4];
    row.verb_name = fields[5];
    row.target_name = fields[6];
    rows.push_back(std::move(row));
  }
  if (!saw_header) Fail(ErrorKind::kParse, "schema: empty file");
  return TripletSchema::FromRows(std::move(rows), counts);
}

TripletSchema LoadSchema(const std::filesystem::path& path,
                         const SchemaCounts& counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open schema file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseSchemaCsv(buffer.str(), counts);
}

}  // namespace tripseg
