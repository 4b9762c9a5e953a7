// Copyright 2026 The ackmmea Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/feature_table.hpp"

namespace ackmmea {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using AttributeId = std::uint32_t;  // row of the modality's feature table

enum class Modality { kText, kImage };

inline const char* to_string(Modality m) { return m == Modality::kText ? "text" : "image"; }

struct Triple {
  EntityId head = 0;
  RelationId rel = 0;
  EntityId tail = 0;
  auto operator<=>(const Triple&) const = default;
};

// A multi-modal knowledge graph. Entities and relation types are dense
// indices with a parallel name table; attributes index rows of the
// per-modality feature tables.
struct MultiModalKG {
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  std::vector<Triple> triples;
  std::vector<std::vector<AttributeId>> text_attrs;   // per entity
  std::vector<std::vector<AttributeId>> image_attrs;  // per entity
  FeatureTable text_features;
  FeatureTable image_features;

  std::size_t num_entities() const { return entity_names.size(); }
  std::size_t num_relations() const { return relation_names.size(); }

  const std::vector<std::vector<AttributeId>>& attrs(Modality m) const {
    return m == Modality::kText ? text_attrs : image_attrs;
  }
  std::vector<std::vector<AttributeId>>& attrs(Modality m) {
    return m == Modality::kText ? text_attrs : image_attrs;
  }
  const FeatureTable& features(Modality m) const {
    return m == Modality::kText ? text_features : image_features;
  }
  FeatureTable& features(Modality m) {
    return m == Modality::kText ? text_features : image_features;
  }

  std::size_t num_attribute_links() const {
    std::size_t n = 0;
    for (const auto& a : text_attrs) n += a.size();
    for (const auto& a : image_attrs) n += a.size();
    return n;
  }

  EntityId entity(const std::string& name) const {
    for (std::size_t i = 0; i < entity_names.size(); ++i) {
      if (entity_names[i] == name) return static_cast<EntityId>(i);
    }
    throw LookupError("unknown entity '" + name + "'");
  }

  bool operator==(const MultiModalKG&) const = default;
};

// Undirected first-order neighborhoods, one incidence per (neighbor, triple).
// Built once per KG; immutable afterwards.
struct Adjacency {
  struct Incidence {
    EntityId neighbor;
    std::uint32_t edge;  // triple index
  };
  std::vector<std::vector<Incidence>> incident;  // per entity

  explicit Adjacency(const MultiModalKG& kg) : incident(kg.num_entities()) {
    for (std::size_t e = 0; e < kg.triples.size(); ++e) {
      const Triple& t = kg.triples[e];
      incident.at(t.head).push_back({t.tail, static_cast<std::uint32_t>(e)});
      incident.at(t.tail).push_back({t.head, static_cast<std::uint32_t>(e)});
    }
  }

  // Distinct neighbor entities of v in ascending id order.
  std::vector<EntityId> neighbors(EntityId v) const {
    std::vector<EntityId> out;
    for (const auto& inc : incident.at(v)) out.push_back(inc.neighbor);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::size_t degree(EntityId v) const { return incident.at(v).size(); }
};

// ---- validation ---------------------------------------------------------------

enum class ViolationKind {
  kDanglingEntity,
  kUnknownRelation,
  kMissingFeature,
  kDimMismatch,
  kNonFinite,
  kSelfLoop,
  kDuplicateTriple,
  kDuplicateName,
  kShape,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kDanglingEntity: return "dangling-entity";
    case ViolationKind::kUnknownRelation: return "unknown-relation";
    case ViolationKind::kMissingFeature: return "missing-feature";
    case ViolationKind::kDimMismatch: return "dim-mismatch";
    case ViolationKind::kNonFinite: return "non-finite";
    case ViolationKind::kSelfLoop: return "self-loop";
    case ViolationKind::kDuplicateTriple: return "duplicate-triple";
    case ViolationKind::kDuplicateName: return "duplicate-name";
    case ViolationKind::kShape: return "shape";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
  }
  void add(ViolationKind k, std::string detail) { violations.push_back({k, std::move(detail)}); }
};

inline std::ostream& operator<<(std::ostream& os, const ValidationReport& r) {
  for (const auto& v : r.violations) os << to_string(v.kind) << '\t' << v.detail << '\n';
  return os;
}

inline ValidationReport validate(const MultiModalKG& kg) {
  ValidationReport report;
  const std::size_t n = kg.num_entities();

  {
    std::set<std::string> seen;
    for (const auto& name : kg.entity_names) {
      if (!seen.insert(name).second) report.add(ViolationKind::kDuplicateName, "entity " + name);
    }
  }

  std::set<Triple> seen_triples;
  for (std::size_t i = 0; i < kg.triples.size(); ++i) {
    const Triple& t = kg.triples[i];
    const std::string where = "triple " + std::to_string(i);
    if (t.head >= n) report.add(ViolationKind::kDanglingEntity, where + " head " + std::to_string(t.head));
    if (t.tail >= n) report.add(ViolationKind::kDanglingEntity, where + " tail " + std::to_string(t.tail));
    if (t.rel >= kg.num_relations()) {
      report.add(ViolationKind::kUnknownRelation, where + " relation " + std::to_string(t.rel));
    }
    if (t.head == t.tail) report.add(ViolationKind::kSelfLoop, where);
    if (!seen_triples.insert(t).second) report.add(ViolationKind::kDuplicateTriple, where);
  }

  for (Modality m : {Modality::kText, Modality::kImage}) {
    const auto& attrs = kg.attrs(m);
    const FeatureTable& table = kg.features(m);
    if (attrs.size() != n) {
      report.add(ViolationKind::kShape, std::string(to_string(m)) + " attribute map has " +
                                            std::to_string(attrs.size()) + " entries for " +
                                            std::to_string(n) + " entities");
    }
    for (std::size_t e = 0; e < attrs.size(); ++e) {
      for (AttributeId a : attrs[e]) {
        if (e >= n) {
          report.add(ViolationKind::kDanglingEntity,
                     std::string(to_string(m)) + " attribute owner " + std::to_string(e));
        }
        if (a >= table.size()) {
          report.add(ViolationKind::kMissingFeature, std::string(to_string(m)) + " attribute " +
                                                         std::to_string(a) + " of entity " +
                                                         std::to_string(e));
        }
      }
    }
    for (std::size_t r = 0; r < table.size(); ++r) {
      const Vector& v = table.row(r);
      if (v.size() != table.dim()) {
        report.add(ViolationKind::kDimMismatch, std::string(to_string(m)) + " feature " +
                                                    table.id(r) + " has length " +
                                                    std::to_string(v.size()) + ", expected " +
                                                    std::to_string(table.dim()));
      }
      if (!v.allFinite()) {
        report.add(ViolationKind::kNonFinite, std::string(to_string(m)) + " feature " + table.id(r));
      }
    }
  }
  return report;
}

// |count_left - count_right| of raw attributes in one modality.
inline std::size_t attribute_gap(const MultiModalKG& kg1, const MultiModalKG& kg2,
                                 std::pair<EntityId, EntityId> pair, Modality m) {
  if (pair.first >= kg1.num_entities()) {
    throw LookupError("attribute_gap: unknown left entity " + std::to_string(pair.first));
  }
  if (pair.second >= kg2.num_entities()) {
    throw LookupError("attribute_gap: unknown right entity " + std::to_string(pair.second));
  }
  const std::size_t a = kg1.attrs(m).at(pair.first).size();
  const std::size_t b = kg2.attrs(m).at(pair.second).size();
  return a > b ? a - b : b - a;
}

}  // namespace ackmmea
