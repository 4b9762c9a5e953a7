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

// Text formats for knowledge graphs and seeds.
//
// Import (mmkb-style):
//   relational triples  head<TAB>relation<TAB>tail
//   attribute triples   entity<TAB>attribute<TAB>value[<TAB>feature-id]
//                       each line is one text attribute; its feature id is
//                       the fourth field, or "a<line>" (1-based) when absent
//   feature tables      <id> <v1> <v2> ...   (see feature_table.hpp)
//                       image feature ids are "<entity>" or "<entity>#<tag>";
//                       each record is one image attribute of that entity
//
// Canonical directory (round-trips exactly, ids are stable):
//   entities.txt  relations.txt  triples.tsv
//   text_attrs.tsv  image_attrs.tsv   (entity<TAB>feature-id)
//   text_features.txt  image_features.txt
//
// Seeds: left<TAB>right, one pair per line, entity names.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/feature_table.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/seeds.hpp"

namespace ackmmea {

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

// Calls f(line_no, fields) for every non-empty line, enforcing the arity.
template <typename F>
void for_each_record(const std::string& path, std::size_t min_fields, std::size_t max_fields,
                     F&& f) {
  std::ifstream is = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < min_fields || fields.size() > max_fields) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(min_fields) +
                           (max_fields != min_fields ? "-" + std::to_string(max_fields) : "") +
                           " tab-separated fields, got " + std::to_string(fields.size()));
    }
    for (const auto& fld : fields) {
      if (fld.empty()) throw ParseError(path, line_no, "empty field");
    }
    f(line_no, fields);
  }
}

class NameIndex {
 public:
  explicit NameIndex(std::vector<std::string>& names) : names_(names) {
    for (std::size_t i = 0; i < names.size(); ++i) index_.emplace(names[i], i);
  }
  std::uint32_t intern(const std::string& name) {
    auto [it, inserted] = index_.emplace(name, names_.size());
    if (inserted) names_.push_back(name);
    return static_cast<std::uint32_t>(it->second);
  }
  std::optional<std::uint32_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it->second);
  }

 private:
  std::vector<std::string>& names_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline void read_triples(const std::string& path, MultiModalKG& kg, NameIndex& entities,
                         NameIndex& relations) {
  std::set<Triple> seen;
  for_each_record(path, 3, 3, [&](std::size_t line_no, const std::vector<std::string>& f) {
    Triple t{entities.intern(f[0]), relations.intern(f[1]), entities.intern(f[2])};
    if (t.head == t.tail) throw ParseError(path, line_no, "self-loop on '" + f[0] + "'");
    if (!seen.insert(t).second) throw ParseError(path, line_no, "duplicate triple");
    kg.triples.push_back(t);
  });
}

}  // namespace detail

struct MmkbImport {
  MultiModalKG kg;
  ValidationReport report;  // unresolved references; empty when clean
};

// Reads an mmkb-style source set. Syntax problems throw ParseError with the
// line number; references that do not resolve are collected in the report and
// left out of the returned graph.
inline MmkbImport import_mmkb(const std::string& rel_triples_path,
                              const std::string& attr_triples_path,
                              const std::string& text_feature_path,
                              const std::string& image_feature_path) {
  MmkbImport out;
  MultiModalKG& kg = out.kg;
  detail::NameIndex entities(kg.entity_names);
  detail::NameIndex relations(kg.relation_names);
  detail::read_triples(rel_triples_path, kg, entities, relations);

  const FeatureTable text_raw = load_feature_table(text_feature_path);
  const FeatureTable image_raw = load_feature_table(image_feature_path);
  kg.text_attrs.assign(kg.num_entities(), {});
  kg.image_attrs.assign(kg.num_entities(), {});
  kg.text_features = FeatureTable(text_raw.dim());
  kg.image_features = FeatureTable(image_raw.dim());

  detail::for_each_record(
      attr_triples_path, 3, 4, [&](std::size_t line_no, const std::vector<std::string>& f) {
        const auto owner = entities.find(f[0]);
        if (!owner) {
          out.report.add(ViolationKind::kDanglingEntity,
                         attr_triples_path + ":" + std::to_string(line_no) + " entity " + f[0]);
          return;
        }
        const std::string id = f.size() == 4 ? f[3] : "a" + std::to_string(line_no);
        const auto row = text_raw.find(id);
        if (!row) {
          out.report.add(ViolationKind::kMissingFeature,
                         attr_triples_path + ":" + std::to_string(line_no) + " text feature " + id);
          return;
        }
        if (kg.text_features.contains(id)) {
          throw ParseError(attr_triples_path, line_no, "feature id '" + id + "' used twice");
        }
        kg.text_attrs[*owner].push_back(
            static_cast<AttributeId>(kg.text_features.add(id, text_raw.row(*row))));
      });

  for (std::size_t r = 0; r < image_raw.size(); ++r) {
    const std::string& id = image_raw.id(r);
    auto owner = entities.find(id);
    if (!owner) {
      const auto hash = id.rfind('#');
      if (hash != std::string::npos) owner = entities.find(id.substr(0, hash));
    }
    if (!owner) {
      out.report.add(ViolationKind::kDanglingEntity, image_feature_path + " image " + id);
      continue;
    }
    kg.image_attrs[*owner].push_back(
        static_cast<AttributeId>(kg.image_features.add(id, image_raw.row(r))));
  }

  for (const auto& v : validate(kg).violations) out.report.violations.push_back(v);
  return out;
}

// Strict form: any unresolved reference is a ValidationError listing them.
inline MultiModalKG load_mmkb(const std::string& rel_triples_path,
                              const std::string& attr_triples_path,
                              const std::string& text_feature_path,
                              const std::string& image_feature_path) {
  MmkbImport imp =
      import_mmkb(rel_triples_path, attr_triples_path, text_feature_path, image_feature_path);
  if (!imp.report.ok()) {
    std::ostringstream os;
    os << "knowledge graph failed validation:\n" << imp.report;
    throw ValidationError(os.str());
  }
  return std::move(imp.kg);
}

inline void write_canonical(const MultiModalKG& kg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  {
    auto os = detail::open_out((dir / "entities.txt").string());
    for (const auto& n : kg.entity_names) os << n << '\n';
  }
  {
    auto os = detail::open_out((dir / "relations.txt").string());
    for (const auto& n : kg.relation_names) os << n << '\n';
  }
  {
    auto os = detail::open_out((dir / "triples.tsv").string());
    for (const auto& t : kg.triples) {
      os << kg.entity_names.at(t.head) << '\t' << kg.relation_names.at(t.rel) << '\t'
         << kg.entity_names.at(t.tail) << '\n';
    }
  }
  for (Modality m : {Modality::kText, Modality::kImage}) {
    const std::string stem = to_string(m);
    auto os = detail::open_out((dir / (stem + "_attrs.tsv")).string());
    const auto& attrs = kg.attrs(m);
    for (std::size_t e = 0; e < attrs.size(); ++e) {
      for (AttributeId a : attrs[e]) os << kg.entity_names[e] << '\t' << kg.features(m).id(a) << '\n';
    }
    save_feature_table((dir / (stem + "_features.txt")).string(), kg.features(m));
  }
}

inline MultiModalKG load_canonical(const std::filesystem::path& dir) {
  MultiModalKG kg;
  auto read_names = [](const std::string& path, std::vector<std::string>& names) {
    auto is = detail::open_in(path);
    std::string line;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!seen.insert(line).second) throw ParseError(path, line_no, "duplicate name");
      names.push_back(line);
    }
  };
  read_names((dir / "entities.txt").string(), kg.entity_names);
  read_names((dir / "relations.txt").string(), kg.relation_names);
  detail::NameIndex entities(kg.entity_names);
  detail::NameIndex relations(kg.relation_names);
  const std::size_t n_entities = kg.num_entities();
  const std::size_t n_relations = kg.num_relations();
  const std::string triples_path = (dir / "triples.tsv").string();
  detail::read_triples(triples_path, kg, entities, relations);
  if (kg.num_entities() != n_entities || kg.num_relations() != n_relations) {
    throw ValidationError(triples_path + " references names missing from the name tables");
  }
  for (Modality m : {Modality::kText, Modality::kImage}) {
    const std::string stem = to_string(m);
    kg.features(m) = load_feature_table((dir / (stem + "_features.txt")).string());
    kg.attrs(m).assign(kg.num_entities(), {});
    const std::string path = (dir / (stem + "_attrs.tsv")).string();
    detail::for_each_record(path, 2, 2, [&](std::size_t line_no, const std::vector<std::string>& f) {
      const auto owner = entities.find(f[0]);
      if (!owner) throw ParseError(path, line_no, "unknown entity '" + f[0] + "'");
      const auto row = kg.features(m).find(f[1]);
      if (!row) throw ParseError(path, line_no, "unknown feature id '" + f[1] + "'");
      kg.attrs(m)[*owner].push_back(static_cast<AttributeId>(*row));
    });
  }
  return kg;
}

inline AlignmentSeedSet load_seeds(const std::string& path, const MultiModalKG& kg1,
                                   const MultiModalKG& kg2) {
  std::vector<std::string> n1 = kg1.entity_names, n2 = kg2.entity_names;
  const detail::NameIndex left(n1), right(n2);
  std::vector<SeedPair> pairs;
  std::set<EntityId> used_left, used_right;
  detail::for_each_record(path, 2, 2, [&](std::size_t line_no, const std::vector<std::string>& f) {
    const auto l = left.find(f[0]);
    const auto r = right.find(f[1]);
    if (!l) throw ParseError(path, line_no, "unknown left entity '" + f[0] + "'");
    if (!r) throw ParseError(path, line_no, "unknown right entity '" + f[1] + "'");
    if (!used_left.insert(*l).second || !used_right.insert(*r).second) {
      throw ParseError(path, line_no, "entity already aligned");
    }
    pairs.emplace_back(*l, *r);
  });
  return AlignmentSeedSet::unsplit(std::move(pairs));
}

inline void save_seeds(const std::string& path, const AlignmentSeedSet& seeds,
                       const MultiModalKG& kg1, const MultiModalKG& kg2) {
  auto os = detail::open_out(path);
  for (const auto& [l, r] : seeds.pairs) {
    os << kg1.entity_names.at(l) << '\t' << kg2.entity_names.at(r) << '\n';
  }
}

}  // namespace ackmmea
