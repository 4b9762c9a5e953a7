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

// Attribute uniformization: every entity ends up with exactly one vector per
// modality. Entities that own attributes merge them with entity-conditioned
// attention; attribute-less entities generate one from the mean of their
// already-resolved neighbors, hop by hop; anything unreachable falls back to
// the mean of all resolved vectors.
//
// Matrices follow the row convention used throughout: a table has one row per
// node and a transform W of shape (in x out) maps it as X * W.

#include <algorithm>
#include <deque>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/feature_table.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/tape.hpp"

namespace ackmmea {

template <typename T>
struct ProjectionParamsT {
  T entity;  // d_E x d
  T text;    // d_T x d
  T image;   // d_I x d
};

template <typename T>
struct MergeParamsT {
  T transform;  // d x d
  T attention;  // 2d x 1, scores [entity | transformed attribute]
  double leaky_slope = 0.2;
};

template <typename T>
struct GenerateParamsT {
  T transform;  // d x d
};

using ProjectionParams = ProjectionParamsT<Matrix>;
using MergeParams = MergeParamsT<Matrix>;
using GenerateParams = GenerateParamsT<Matrix>;

// ---- plan -------------------------------------------------------------------

struct MergeSlot {
  std::vector<AttributeId> attrs;
  bool operator==(const MergeSlot&) const = default;
};
struct GenerateSlot {
  std::vector<EntityId> sources;
  int hop = 1;
  bool operator==(const GenerateSlot&) const = default;
};
struct FallbackSlot {
  bool operator==(const FallbackSlot&) const = default;
};
using Slot = std::variant<MergeSlot, GenerateSlot, FallbackSlot>;

struct ModalityPlan {
  std::vector<Slot> slots;  // one per entity
  int max_hop = 0;

  std::size_t count_merge() const { return count<MergeSlot>(); }
  std::size_t count_generate() const { return count<GenerateSlot>(); }
  std::size_t count_fallback() const { return count<FallbackSlot>(); }

 private:
  template <typename S>
  std::size_t count() const {
    return static_cast<std::size_t>(std::count_if(
        slots.begin(), slots.end(), [](const Slot& s) { return std::holds_alternative<S>(s); }));
  }
};

struct UniformizationPlan {
  ModalityPlan text;
  ModalityPlan image;

  const ModalityPlan& at(Modality m) const { return m == Modality::kText ? text : image; }
};

inline ModalityPlan build_modality_plan(const MultiModalKG& kg, const Adjacency& adj, Modality m) {
  const std::size_t n = kg.num_entities();
  const auto& attrs = kg.attrs(m);
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::vector<int> hop(n, kUnreached);
  std::deque<EntityId> frontier;
  for (std::size_t e = 0; e < n; ++e) {
    if (!attrs[e].empty()) {
      hop[e] = 0;
      frontier.push_back(static_cast<EntityId>(e));
    }
  }
  while (!frontier.empty()) {
    const EntityId v = frontier.front();
    frontier.pop_front();
    for (const auto& inc : adj.incident[v]) {
      if (hop[inc.neighbor] == kUnreached) {
        hop[inc.neighbor] = hop[v] + 1;
        frontier.push_back(inc.neighbor);
      }
    }
  }

  ModalityPlan plan;
  plan.slots.reserve(n);
  for (std::size_t e = 0; e < n; ++e) {
    if (hop[e] == 0) {
      plan.slots.emplace_back(MergeSlot{attrs[e]});
    } else if (hop[e] == kUnreached) {
      plan.slots.emplace_back(FallbackSlot{});
    } else {
      GenerateSlot g;
      g.hop = hop[e];
      for (EntityId u : adj.neighbors(static_cast<EntityId>(e))) {
        if (hop[u] == hop[e] - 1) g.sources.push_back(u);
      }
      plan.max_hop = std::max(plan.max_hop, g.hop);
      plan.slots.emplace_back(std::move(g));
    }
  }
  return plan;
}

inline UniformizationPlan build_plan(const MultiModalKG& kg, const Adjacency& adj) {
  return {build_modality_plan(kg, adj, Modality::kText),
          build_modality_plan(kg, adj, Modality::kImage)};
}

inline UniformizationPlan build_plan(const MultiModalKG& kg) { return build_plan(kg, Adjacency(kg)); }

// Checks the plan invariants against the graph. Empty result when sound.
inline std::vector<std::string> check_plan(const MultiModalKG& kg, const UniformizationPlan& plan) {
  std::vector<std::string> problems;
  for (Modality m : {Modality::kText, Modality::kImage}) {
    const ModalityPlan& p = plan.at(m);
    const std::string tag = to_string(m);
    if (p.slots.size() != kg.num_entities()) {
      problems.push_back(tag + ": slot count differs from entity count");
      continue;
    }
    auto hop_of = [&](EntityId u) -> int {
      const Slot& s = p.slots.at(u);
      if (std::holds_alternative<MergeSlot>(s)) return 0;
      if (const auto* g = std::get_if<GenerateSlot>(&s)) return g->hop;
      return -1;
    };
    for (std::size_t e = 0; e < p.slots.size(); ++e) {
      if (const auto* ms = std::get_if<MergeSlot>(&p.slots[e])) {
        std::vector<AttributeId> a = ms->attrs, owned = kg.attrs(m)[e];
        std::sort(a.begin(), a.end());
        std::sort(owned.begin(), owned.end());
        if (a.empty() || !std::includes(owned.begin(), owned.end(), a.begin(), a.end())) {
          problems.push_back(tag + ": merge slot of entity " + std::to_string(e) + " is invalid");
        }
      } else if (const auto* gs = std::get_if<GenerateSlot>(&p.slots[e])) {
        if (gs->sources.empty()) problems.push_back(tag + ": empty generate slot " + std::to_string(e));
        for (EntityId u : gs->sources) {
          const int h = u < p.slots.size() ? hop_of(u) : -2;
          if (h < 0 || h >= gs->hop) {
            problems.push_back(tag + ": generate slot " + std::to_string(e) +
                               " has unresolved source " + std::to_string(u));
          }
        }
      }
    }
  }
  return problems;
}

// ---- operators on the tape ----------------------------------------------------

struct UniformizeOptions {
  bool attention_merge = true;  // false: plain mean of projected attributes
  bool generate = true;         // false: generate/fallback slots give zeros
  bool bypass = false;          // true: plain mean where owned, zeros elsewhere
  bool zero = false;            // true: the whole modality is zeros
};

// Attention merge of grouped attribute rows. `attr_rows` are projected
// attribute vectors, `query_rows` the matching owner entity vector per
// attribute, `group` the output row of each attribute.
inline Var merge_rows(Tape& tape, Var attr_rows, Var query_rows, const std::vector<int>& group,
                      int n_groups, const MergeParamsT<Var>& p) {
  const Var h = tape.matmul(attr_rows, p.transform);
  const Var scores = tape.leaky_relu(tape.matmul(tape.concat_cols({query_rows, h}), p.attention),
                                     p.leaky_slope);
  const Var alpha = tape.segment_softmax(scores, group, n_groups);
  return tape.relu(tape.segment_sum(tape.row_scale(h, alpha), group, n_groups));
}

inline Var generate_rows(Tape& tape, Var source_rows, const std::vector<int>& group, int n_groups,
                         const GenerateParamsT<Var>& p) {
  return tape.relu(tape.matmul(tape.segment_mean(source_rows, group, n_groups), p.transform));
}

// One modality of the uniformized table (n_E x d), rows in entity order.
// Merge slots are evaluated first, then generate slots by ascending hop, then
// the fallback mean.
inline Var uniformize(Tape& tape, const ModalityPlan& plan, Var projected_attrs,
                      Var projected_entities, const MergeParamsT<Var>& mp,
                      const GenerateParamsT<Var>& gp, const UniformizeOptions& opt) {
  const auto n = static_cast<int>(plan.slots.size());
  const auto d = tape.value(projected_entities).cols();
  if (opt.zero || n == 0) return tape.constant(Matrix::Zero(n, d));

  std::vector<int> position(static_cast<std::size_t>(n), -1);  // row in concatenated blocks
  std::vector<Var> blocks;
  int resolved_rows = 0;

  // Merge.
  {
    std::vector<int> attr_index, owner, group;
    int n_groups = 0;
    for (int e = 0; e < n; ++e) {
      const auto* ms = std::get_if<MergeSlot>(&plan.slots[e]);
      if (!ms) continue;
      for (AttributeId a : ms->attrs) {
        attr_index.push_back(static_cast<int>(a));
        owner.push_back(e);
        group.push_back(n_groups);
      }
      position[e] = n_groups++;
    }
    if (n_groups > 0) {
      const Var attrs = tape.gather_rows(projected_attrs, attr_index);
      if (opt.attention_merge && !opt.bypass) {
        blocks.push_back(merge_rows(tape, attrs, tape.gather_rows(projected_entities, owner), group,
                                    n_groups, mp));
      } else {
        blocks.push_back(tape.segment_mean(attrs, group, n_groups));
      }
      resolved_rows = n_groups;
    }
  }

  const bool generating = opt.generate && !opt.bypass;
  auto resolved = [&]() { return tape.concat_rows(blocks); };

  // Generate, hop by hop.
  for (int hop = 1; hop <= plan.max_hop; ++hop) {
    std::vector<int> members;
    std::vector<int> source_rows, group;
    for (int e = 0; e < n; ++e) {
      const auto* gs = std::get_if<GenerateSlot>(&plan.slots[e]);
      if (!gs || gs->hop != hop) continue;
      for (EntityId u : gs->sources) {
        source_rows.push_back(position.at(u));
        group.push_back(static_cast<int>(members.size()));
      }
      members.push_back(e);
    }
    if (members.empty()) continue;
    const auto m = static_cast<int>(members.size());
    if (generating) {
      blocks.push_back(generate_rows(tape, tape.gather_rows(resolved(), source_rows), group, m, gp));
    } else {
      blocks.push_back(tape.constant(Matrix::Zero(m, d)));
    }
    for (int i = 0; i < m; ++i) position[members[i]] = resolved_rows + i;
    resolved_rows += m;
  }

  // Fallback.
  std::vector<int> fallback;
  for (int e = 0; e < n; ++e) {
    if (std::holds_alternative<FallbackSlot>(plan.slots[e])) fallback.push_back(e);
  }
  if (!fallback.empty()) {
    const auto f = static_cast<int>(fallback.size());
    if (generating && resolved_rows > 0) {
      blocks.push_back(tape.gather_rows(tape.mean_rows(resolved()), std::vector<int>(f, 0)));
    } else {
      blocks.push_back(tape.constant(Matrix::Zero(f, d)));
    }
    for (int i = 0; i < f; ++i) position[fallback[i]] = resolved_rows + i;
    resolved_rows += f;
  }
  return tape.gather_rows(resolved(), position);
}

// ---- value-level wrappers -------------------------------------------------------

inline FeatureTable project_features(const FeatureTable& table, const Matrix& w) {
  if (!table.empty() && table.dim() != w.rows()) {
    throw std::invalid_argument("project_features: table dim " + std::to_string(table.dim()) +
                                " does not match transform rows " + std::to_string(w.rows()));
  }
  if (table.empty()) return FeatureTable(static_cast<int>(w.cols()));
  return FeatureTable::from_matrix(table.ids(), table.to_matrix() * w);
}

namespace detail {

inline Matrix stack_rows(std::span<const Vector> rows) {
  if (rows.empty()) throw std::invalid_argument("empty vector list");
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("vectors differ in length");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

inline MergeParamsT<Var> bind(Tape& t, const MergeParams& p) {
  return {t.constant(p.transform), t.constant(p.attention), p.leaky_slope};
}

}  // namespace detail

// Attention weights of one entity's attributes (sum to 1).
inline Vector merge_attention(const Vector& entity_vec, std::span<const Vector> attr_vecs,
                              const MergeParams& p) {
  if (attr_vecs.empty()) throw std::invalid_argument("merge: attribute list is empty");
  Tape t;
  const Var attrs = t.constant(detail::stack_rows(attr_vecs));
  const Var h = t.matmul(attrs, t.constant(p.transform));
  const Matrix q = entity_vec.transpose().replicate(static_cast<Eigen::Index>(attr_vecs.size()), 1);
  const Var scores = t.leaky_relu(
      t.matmul(t.concat_cols({t.constant(q), h}), t.constant(p.attention)), p.leaky_slope);
  const Var alpha =
      t.segment_softmax(scores, std::vector<int>(attr_vecs.size(), 0), 1);
  return t.value(alpha).col(0);
}

inline Vector merge(const Vector& entity_vec, std::span<const Vector> attr_vecs,
                    const MergeParams& p) {
  if (attr_vecs.empty()) throw std::invalid_argument("merge: attribute list is empty");
  Tape t;
  const Matrix q = entity_vec.transpose().replicate(static_cast<Eigen::Index>(attr_vecs.size()), 1);
  const Var out = merge_rows(t, t.constant(detail::stack_rows(attr_vecs)), t.constant(q),
                             std::vector<int>(attr_vecs.size(), 0), 1, detail::bind(t, p));
  return t.value(out).row(0).transpose();
}

inline Vector generate(std::span<const Vector> neighbor_vecs, const GenerateParams& p) {
  if (neighbor_vecs.empty()) throw std::invalid_argument("generate: neighbor list is empty");
  Tape t;
  const Var out = generate_rows(t, t.constant(detail::stack_rows(neighbor_vecs)),
                                std::vector<int>(neighbor_vecs.size(), 0), 1,
                                {t.constant(p.transform)});
  return t.value(out).row(0).transpose();
}

struct UniformTables {
  FeatureTable text;   // keyed by entity name
  FeatureTable image;  // keyed by entity name
};

// Projects raw tables and runs the plan for both modalities.
inline UniformTables apply_plan(const MultiModalKG& kg, const UniformizationPlan& plan,
                                const ProjectionParams& proj, const MergeParams& merge_text,
                                const MergeParams& merge_image, const GenerateParams& gen_text,
                                const GenerateParams& gen_image, const FeatureTable& entity_table,
                                const UniformizeOptions& opt = {}) {
  if (plan.text.slots.size() != kg.num_entities() || plan.image.slots.size() != kg.num_entities()) {
    throw ValidationError("apply_plan: plan was built for a different graph");
  }
  if (entity_table.size() != kg.num_entities()) {
    throw ValidationError("apply_plan: entity table does not cover the graph");
  }
  Tape t;
  const Var entities = t.matmul(t.constant(entity_table.to_matrix()), t.constant(proj.entity));
  auto modality = [&](Modality m, const Matrix& w, const MergeParams& mp, const GenerateParams& gp) {
    const FeatureTable& f = kg.features(m);
    const Matrix raw = f.empty() ? Matrix::Zero(0, w.rows()) : f.to_matrix();
    const Var attrs = t.matmul(t.constant(raw), t.constant(w));
    const Var out = uniformize(t, plan.at(m), attrs, entities, detail::bind(t, mp),
                               {t.constant(gp.transform)}, opt);
    return FeatureTable::from_matrix(kg.entity_names, t.value(out));
  };
  return {modality(Modality::kText, proj.text, merge_text, gen_text),
          modality(Modality::kImage, proj.image, merge_image, gen_image)};
}

}  // namespace ackmmea
