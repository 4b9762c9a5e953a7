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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/random.hpp"
#include "ackmmea/tape.hpp"

namespace ackmmea {

// Id-keyed dense vectors of one shared dimension. Row order is insertion
// order and is what every other module indexes by.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_.at(row); }
  const Vector& row(std::size_t r) const { return rows_.at(r); }
  Vector& row(std::size_t r) { return rows_.at(r); }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  const Vector& at(const std::string& id) const {
    auto r = find(id);
    if (!r) throw LookupError("feature table has no id '" + id + "'");
    return rows_[*r];
  }

  // Appends a row. Rows whose length disagrees with dim() are stored as-is so
  // validation can report them; the first row fixes dim() when it is unset.
  std::size_t add(std::string id, Vector v) {
    if (index_.count(id)) throw ValidationError("duplicate feature id '" + id + "'");
    if (dim_ == 0 && rows_.empty()) dim_ = static_cast<int>(v.size());
    index_.emplace(id, rows_.size());
    ids_.push_back(std::move(id));
    rows_.push_back(std::move(v));
    return rows_.size() - 1;
  }

  // Stacked rows; requires every row to have length dim().
  Matrix to_matrix() const {
    Matrix m(static_cast<Eigen::Index>(rows_.size()), dim_);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].size() != dim_) {
        throw ValidationError("feature row '" + ids_[i] + "' has length " +
                              std::to_string(rows_[i].size()) + ", expected " +
                              std::to_string(dim_));
      }
      m.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
    }
    return m;
  }

  static FeatureTable from_matrix(const std::vector<std::string>& ids, const Matrix& m) {
    FeatureTable t(static_cast<int>(m.cols()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      t.add(ids[i], m.row(static_cast<Eigen::Index>(i)).transpose());
    }
    return t;
  }

  bool operator==(const FeatureTable& o) const {
    if (dim_ != o.dim_ || ids_ != o.ids_) return false;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].size() != o.rows_[i].size() || rows_[i] != o.rows_[i]) return false;
    }
    return true;
  }

 private:
  int dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<Vector> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Canonical text format: one record per line, "<id> <v1> <v2> ...".
// Values are written with 17 significant digits so a write/read cycle is exact.
inline void write_feature_table(std::ostream& os, const FeatureTable& table) {
  os << std::setprecision(17);
  for (std::size_t i = 0; i < table.size(); ++i) {
    os << table.id(i);
    const Vector& v = table.row(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) os << ' ' << v[j];
    os << '\n';
  }
}

inline void save_feature_table(const std::string& path, const FeatureTable& table) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write feature table '" + path + "'");
  write_feature_table(os, table);
  if (!os) throw IoError("write failed for '" + path + "'");
}

inline FeatureTable read_feature_table(std::istream& is, const std::string& source,
                                       std::optional<int> expected_dim = std::nullopt) {
  FeatureTable table(expected_dim.value_or(0));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) {
      throw ParseError(source, line_no, "expected '<id> <values...>'");
    }
    std::string id = line.substr(0, sp);
    std::vector<double> values;
    const char* p = line.c_str() + sp + 1;
    char* end = nullptr;
    while (*p != '\0') {
      while (*p == ' ') ++p;
      if (*p == '\0') break;
      const double x = std::strtod(p, &end);
      if (end == p) throw ParseError(source, line_no, "row '" + id + "': not a number");
      if (!std::isfinite(x)) throw ParseError(source, line_no, "row '" + id + "': non-finite value");
      values.push_back(x);
      p = end;
    }
    if (values.empty()) throw ParseError(source, line_no, "row '" + id + "' has no values");
    const int n = static_cast<int>(values.size());
    if (table.dim() != 0 && n != table.dim()) {
      throw ParseError(source, line_no,
                       "row '" + id + "' has " + std::to_string(n) + " values, expected " +
                           std::to_string(table.dim()));
    }
    if (table.contains(id)) throw ParseError(source, line_no, "duplicate id '" + id + "'");
    table.add(std::move(id), Eigen::Map<const Vector>(values.data(), n));
  }
  return table;
}

inline FeatureTable load_feature_table(const std::string& path,
                                       std::optional<int> expected_dim = std::nullopt) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open feature table '" + path + "'");
  return read_feature_table(is, path, expected_dim);
}

// Standard-normal vectors, deterministic in (seed, id position).
inline FeatureTable random_features(const std::vector<std::string>& ids, int dim,
                                    std::uint64_t seed) {
  if (dim <= 0) throw ConfigError("random_features: dim must be positive");
  FeatureTable t(dim);
  Rng rng = make_rng(seed, "random_features");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& id : ids) {
    Vector v(dim);
    for (int j = 0; j < dim; ++j) v[j] = normal(rng);
    t.add(id, std::move(v));
  }
  return t;
}

}  // namespace ackmmea
