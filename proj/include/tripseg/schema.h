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

#ifndef TRIPSEG_SCHEMA_H_
#define TRIPSEG_SCHEMA_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tripseg {

// Label spaces a triplet can be projected onto. IV and IT are ordered pairs
// (instrument, verb) and (instrument, target); IVT is the full triplet.
enum class Component { kI, kV, kT, kIV, kIT, kIVT };

inline constexpr std::array<Component, 6> kAllComponents = {
    Component::kI,  Component::kV,  Component::kT,
    Component::kIV, Component::kIT, Component::kIVT};

std::string_view ComponentName(Component c);
// Accepts "I", "V", "T", "IV", "IT", "IVT"; throws Error(kInvalidArgument).
Component ParseComponent(std::string_view name);

struct TripletComponents {
  int instrument = 0;
  int verb = 0;
  int target = 0;

  friend bool operator==(const TripletComponents&,
                         const TripletComponents&) = default;
};

// A class within one component space. `second` is only meaningful for the
// pair components.
struct ComponentKey {
  Component component = Component::kIVT;
  int first = 0;
  int second = -1;

  std::string ToString() const;
  friend bool operator==(const ComponentKey&, const ComponentKey&) = default;
};

// Declared sizes of the label space. The defaults are the production counts;
// smaller values are only useful for fixtures.
struct SchemaCounts {
  int instruments = 6;
  int verbs = 10;
  int targets = 15;
  int triplets = 100;
};

struct SchemaRow {
  int triplet_id = 0;
  TripletComponents components;
  std::string instrument_name;
  std::string verb_name;
  std::string target_name;
};

// The triplet label space with its projection maps. Immutable once built.
class TripletSchema {
 public:
  // Validates the rows against `counts`: ids must be exactly
  // {0, ..., counts.triplets - 1}, component ids in range, tuples unique, and
  // names consistent per component id.
  static TripletSchema FromRows(std::vector<SchemaRow> rows,
                                const SchemaCounts& counts = {});

  const SchemaCounts& counts() const { return counts_; }
  int num_triplets() const { return counts_.triplets; }

  // Throws Error(kInvalidArgument) for ids outside [0, num_triplets()).
  const TripletComponents& Components(int triplet_id) const;
  ComponentKey Project(int triplet_id, Component component) const;

  // Dense integer index of Project(triplet_id, component) within
  // [0, ClassCount(component)): instrument * verbs + verb for IV,
  // instrument * targets + target for IT, the triplet id for IVT.
  int ProjectIndex(int triplet_id, Component component) const;
  int ClassCount(Component component) const;
  ComponentKey KeyForIndex(Component component, int index) const;

  // Dense indices realized by at least one triplet, ascending.
  const std::vector<int>& RealizedClasses(Component component) const;

  const std::string& InstrumentName(int id) const { return instrument_names_.at(id); }
  const std::string& VerbName(int id) const { return verb_names_.at(id); }
  const std::string& TargetName(int id) const { return target_names_.at(id); }
  const std::vector<SchemaRow>& rows() const { return rows_; }

 private:
  TripletSchema() = default;

  SchemaCounts counts_;
  std::vector<SchemaRow> rows_;  // indexed by triplet id
  std::vector<std::string> instrument_names_;
  std::vector<std::string> verb_names_;
  std::vector<std::string> target_names_;
  std::array<std::vector<int>, 6> realized_;
};

// Reads the schema CSV:
//   triplet_id,instrument_id,verb_id,target_id,instrument_name,verb_name,target_name
TripletSchema LoadSchema(const std::filesystem::path& path,
                         const SchemaCounts& counts = {});
TripletSchema ParseSchemaCsv(std::string_view text,
                             const SchemaCounts& counts = {});

}  // namespace tripseg

#endif  // TRIPSEG_SCHEMA_H_
