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

// Checkpoint container, plain text, version line first:
//
//   ackmmea-checkpoint 1
//   epoch <epochs completed when saved>
//   rng_state <run seed> <optimizer steps>
//   loss_history <n> <v1> ... <vn>
//   config <n>
//   <key> = <value>                       (n lines, see config.hpp)
//   matrix <name> <rows> <cols>
//   <row 0 values>                         (rows lines, space separated)
//   ...
//   end
//
// Matrices are the trainable parameters (names from visit_params) followed by
// the frozen pre-trained tables "frozen.{left,right}.{entity,relation}".
// Numbers use 17 significant digits so a save/load cycle is exact.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ackmmea/config.hpp"
#include "ackmmea/consistgnn.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/pipeline.hpp"

namespace ackmmea {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  int epoch = 0;
  std::vector<double> loss_history;
  std::uint64_t rng_seed = 0;
  std::uint64_t steps = 0;
  FrozenTables left_tables;
  FrozenTables right_tables;
};

namespace detail {

inline void write_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

}  // namespace detail

inline void write_checkpoint(std::ostream& os, const Checkpoint& c) {
  os.precision(17);
  os << "ackmmea-checkpoint " << kCheckpointVersion << '\n';
  os << "epoch " << c.epoch << '\n';
  os << "rng_state " << c.rng_seed << ' ' << c.steps << '\n';
  os << "loss_history " << c.loss_history.size();
  for (double v : c.loss_history) os << ' ' << v;
  os << '\n';
  const auto entries = config_entries(c.config);
  os << "config " << entries.size() << '\n';
  for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
  visit_params([&](const std::string& name, const Matrix& m) { detail::write_matrix(os, name, m); },
               c.params);
  detail::write_matrix(os, "frozen.left.entity", c.left_tables.entity_init);
  detail::write_matrix(os, "frozen.left.relation", c.left_tables.relation_init);
  detail::write_matrix(os, "frozen.right.entity", c.right_tables.entity_init);
  detail::write_matrix(os, "frozen.right.relation", c.right_tables.relation_init);
  os << "end\n";
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write checkpoint '" + path + "'");
  write_checkpoint(os, c);
  if (!os) throw IoError("write failed for '" + path + "'");
}

inline Checkpoint read_checkpoint(std::istream& is, const std::string& source) {
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError("checkpoint '" + source + "': " + what);
  };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "ackmmea-checkpoint") throw fail("not a checkpoint");
  if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

  Checkpoint c;
  std::size_t n = 0;
  if (!(is >> word >> c.epoch) || word != "epoch") throw fail("missing epoch");
  if (!(is >> word >> c.rng_seed >> c.steps) || word != "rng_state") throw fail("missing rng_state");
  if (!(is >> word >> n) || word != "loss_history") throw fail("missing loss_history");
  c.loss_history.resize(n);
  for (double& v : c.loss_history) {
    if (!(is >> v)) throw fail("truncated loss_history");
  }
  if (!(is >> word >> n) || word != "config") throw fail("missing config");
  std::string line;
  std::getline(is, line);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw fail("truncated config");
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw fail("bad config line '" + line + "'");
    set_config_value(c.config, line.substr(0, eq), line.substr(eq + 3));
  }

  std::map<std::string, Matrix> matrices;
  while (is >> word) {
    if (word == "end") break;
    if (word != "matrix") throw fail("unexpected token '" + word + "'");
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols) || rows < 0 || cols < 0) throw fail("bad matrix header");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (!(is >> m.data()[i])) throw fail("truncated matrix " + name);
    }
    matrices.emplace(std::move(name), std::move(m));
  }
  if (word != "end") throw fail("missing end marker");

  auto take = [&](const std::string& name) {
    auto it = matrices.find(name);
    if (it == matrices.end()) throw fail("missing matrix " + name);
    return it->second;
  };
  c.params.layers.resize(static_cast<std::size_t>(c.config.layers));
  c.params.merge_text.leaky_slope = c.params.merge_image.leaky_slope = c.config.leaky_slope;
  visit_params([&](const std::string& name, Matrix& m) { m = take(name); }, c.params);
  c.left_tables = {take("frozen.left.entity"), take("frozen.left.relation")};
  c.right_tables = {take("frozen.right.entity"), take("frozen.right.relation")};
  return c;
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(is, path);
}

// The architecture fields of `requested` must agree with the checkpoint.
inline void check_compatible(const TrainConfig& checkpoint, const TrainConfig& requested) {
  auto same = [](auto a, auto b, const char* what) {
    if (a != b) {
      throw ConfigError(std::string("config/checkpoint mismatch on ") + what + " (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
  };
  same(checkpoint.d, requested.d, "d");
  same(checkpoint.layers, requested.layers, "layers");
  same(checkpoint.transe_dim, requested.transe_dim, "transe_dim");
  same(static_cast<int>(checkpoint.representation), static_cast<int>(requested.representation),
       "representation");
}

}  // namespace ackmmea
