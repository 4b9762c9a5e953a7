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

// Relation-aware graph encoder over attribute-consistent graphs.
//
//   layer 0   edge  r = type(r) W_0 + |t_T - h_T| W_0T + |t_I - h_I| W_0I
//             node  e = ReLU(e_E W_cE + e_T W_cT + e_I W_cI)
//   layer l   edge  r = ReLU(r W_EE + [u_T | v_T] W_ET + [u_I | v_I] W_EI)
//             node  e = [e | mean over kept neighbors of [e_u | r_uv]] W_hE
//             attr  a = [a | e] W_hA              (per modality)
//
// Neighbor dropout removes whole neighbors (with all their edges to the
// node) independently with probability rho, redrawn for every layer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/feature_table.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/random.hpp"
#include "ackmmea/tape.hpp"
#include "ackmmea/uniformization.hpp"

namespace ackmmea {

template <typename T>
struct LayerParamsT {
  T relation_self;   // d x d     (W_EE)
  T relation_text;   // 2d x d    (W_ET)
  T relation_image;  // 2d x d    (W_EI)
  T entity_update;   // 3d x d    (W_hE)
  T text_update;     // 2d x d    (W_hT)
  T image_update;    // 2d x d    (W_hI)
};

template <typename T>
struct ModelParamsT {
  ProjectionParamsT<T> proj;
  MergeParamsT<T> merge_text, merge_image;
  GenerateParamsT<T> gen_text, gen_image;
  T relation_type;   // d_E x d   (W_0)
  T relation_text;   // d x d     (W_0T)
  T relation_image;  // d x d     (W_0I)
  T init_entity;     // d x d     (W_cE)
  T init_text;       // d x d     (W_cT)
  T init_image;      // d x d     (W_cI)
  std::vector<LayerParamsT<T>> layers;
};

using LayerParams = LayerParamsT<Matrix>;
using ModelParams = ModelParamsT<Matrix>;
using BoundParams = ModelParamsT<Var>;

// Calls f(name, m...) for every trainable slot of one or more parameter sets
// of identical layout, in a fixed order.
template <typename F, typename P, typename... Ps>
void visit_params(F&& f, P& p, Ps&... ps) {
  f("proj.entity", p.proj.entity, ps.proj.entity...);
  f("proj.text", p.proj.text, ps.proj.text...);
  f("proj.image", p.proj.image, ps.proj.image...);
  f("merge_text.transform", p.merge_text.transform, ps.merge_text.transform...);
  f("merge_text.attention", p.merge_text.attention, ps.merge_text.attention...);
  f("merge_image.transform", p.merge_image.transform, ps.merge_image.transform...);
  f("merge_image.attention", p.merge_image.attention, ps.merge_image.attention...);
  f("gen_text.transform", p.gen_text.transform, ps.gen_text.transform...);
  f("gen_image.transform", p.gen_image.transform, ps.gen_image.transform...);
  f("relation_type", p.relation_type, ps.relation_type...);
  f("relation_text", p.relation_text, ps.relation_text...);
  f("relation_image", p.relation_image, ps.relation_image...);
  f("init_entity", p.init_entity, ps.init_entity...);
  f("init_text", p.init_text, ps.init_text...);
  f("init_image", p.init_image, ps.init_image...);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string pre = "layer" + std::to_string(l + 1) + ".";
    f(pre + "relation_self", p.layers[l].relation_self, ps.layers.at(l).relation_self...);
    f(pre + "relation_text", p.layers[l].relation_text, ps.layers.at(l).relation_text...);
    f(pre + "relation_image", p.layers[l].relation_image, ps.layers.at(l).relation_image...);
    f(pre + "entity_update", p.layers[l].entity_update, ps.layers.at(l).entity_update...);
    f(pre + "text_update", p.layers[l].text_update, ps.layers.at(l).text_update...);
    f(pre + "image_update", p.layers[l].image_update, ps.layers.at(l).image_update...);
  }
}

struct ModelDims {
  int entity_in = 128;  // d_E
  int text_in = 0;      // d_T
  int image_in = 0;     // d_I
  int d = 128;
  int layers = 2;
  bool operator==(const ModelDims&) const = default;
};

// Glorot-uniform initialization, +-sqrt(6 / (fan_in + fan_out)).
inline ModelParams init_params(const ModelDims& dims, std::uint64_t seed,
                               double leaky_slope = 0.2) {
  if (dims.d <= 0 || dims.layers < 0 || dims.entity_in <= 0 || dims.text_in < 0 ||
      dims.image_in < 0) {
    throw ConfigError("invalid model dimensions");
  }
  const int d = dims.d;
  ModelParams p;
  p.proj = {Matrix(dims.entity_in, d), Matrix(dims.text_in, d), Matrix(dims.image_in, d)};
  p.merge_text = {Matrix(d, d), Matrix(2 * d, 1), leaky_slope};
  p.merge_image = {Matrix(d, d), Matrix(2 * d, 1), leaky_slope};
  p.gen_text = {Matrix(d, d)};
  p.gen_image = {Matrix(d, d)};
  p.relation_type = Matrix(dims.entity_in, d);
  p.relation_text = p.relation_image = Matrix(d, d);
  p.init_entity = p.init_text = p.init_image = Matrix(d, d);
  p.layers.resize(static_cast<std::size_t>(dims.layers));
  for (auto& l : p.layers) {
    l.relation_self = Matrix(d, d);
    l.relation_text = l.relation_image = Matrix(2 * d, d);
    l.entity_update = Matrix(3 * d, d);
    l.text_update = l.image_update = Matrix(2 * d, d);
  }
  Rng rng = make_rng(seed, "init");
  visit_params(
      [&](const std::string&, Matrix& m) {
        const double fan = static_cast<double>(m.rows() + m.cols());
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double bound = fan > 0 ? std::sqrt(6.0 / fan) : 0.0;
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = bound * u(rng);
      },
      p);
  return p;
}

inline ModelDims dims_of(const ModelParams& p) {
  return {static_cast<int>(p.proj.entity.rows()), static_cast<int>(p.proj.text.rows()),
          static_cast<int>(p.proj.image.rows()), static_cast<int>(p.proj.entity.cols()),
          static_cast<int>(p.layers.size())};
}

// Puts every matrix on the tape; trainable ones accumulate gradients.
inline BoundParams bind_params(Tape& tape, const ModelParams& p, bool trainable = true) {
  BoundParams b;
  b.merge_text.leaky_slope = p.merge_text.leaky_slope;
  b.merge_image.leaky_slope = p.merge_image.leaky_slope;
  b.layers.resize(p.layers.size());
  visit_params(
      [&](const std::string&, const Matrix& m, Var& v) {
        v = trainable ? tape.parameter(m) : tape.constant(m);
      },
      p, b);
  return b;
}

// ---- neighbor dropout -------------------------------------------------------

enum class DropoutMode { kNone, kDrop, kReplace };

struct DropoutConfig {
  double rho = 0.35;
  DropoutMode mode = DropoutMode::kDrop;
  std::uint64_t rng_seed = 0;

  void check() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("dropout rate must lie in [0,1]");
  }
};

// Identifies one draw: which graph, which step of training, which layer.
struct DropoutKey {
  std::uint64_t side = 0;
  std::uint64_t step = 0;
  std::uint64_t layer = 0;
};

// Result for one neighbor: kept as-is, dropped, or swapped for another entity.
struct NeighborDraw {
  bool kept = true;
  EntityId entity = 0;  // the neighbor to use when kept
};

inline std::vector<NeighborDraw> draw_neighbors(const std::vector<EntityId>& neighbors,
                                                const DropoutConfig& cfg,
                                                std::size_t n_entities, EntityId owner,
                                                const DropoutKey& key) {
  std::vector<NeighborDraw> out;
  out.reserve(neighbors.size());
  if (cfg.mode == DropoutMode::kNone || cfg.rho == 0.0) {
    for (EntityId u : neighbors) out.push_back({true, u});
    return out;
  }
  Rng rng = make_rng(cfg.rng_seed, "dropout", {key.side, key.step, key.layer, owner});
  std::bernoulli_distribution keep(1.0 - cfg.rho);
  std::uniform_int_distribution<EntityId> any(0, static_cast<EntityId>(n_entities - 1));
  for (EntityId u : neighbors) {
    if (keep(rng)) {
      out.push_back({true, u});
    } else if (cfg.mode == DropoutMode::kReplace) {
      out.push_back({true, any(rng)});
    } else {
      out.push_back({false, u});
    }
  }
  return out;
}

// The surviving neighbor list (replacements included, in input order).
inline std::vector<EntityId> dropout_neighbors(const std::vector<EntityId>& neighbors,
                                               const DropoutConfig& cfg, std::size_t n_entities,
                                               EntityId owner = 0, const DropoutKey& key = {}) {
  cfg.check();
  std::vector<EntityId> out;
  for (const auto& d : draw_neighbors(neighbors, cfg, n_entities, owner, key)) {
    if (d.kept) out.push_back(d.entity);
  }
  return out;
}

// ---- encoder inputs -------------------------------------------------------------

// Everything the encoder reads from one graph; frozen during training.
struct EncoderInputs {
  std::size_t n_entities = 0;
  std::vector<int> heads, tails, rel_types;  // per triple
  std::vector<std::vector<EntityId>> neighbors;
  std::vector<std::vector<Adjacency::Incidence>> incident;
  UniformizationPlan plan;
  Matrix entity_init;    // n_E x d_E, pre-trained
  Matrix relation_init;  // n_R x d_E, pre-trained
  Matrix text_raw;       // n_T x d_T
  Matrix image_raw;      // n_I x d_I
};

inline EncoderInputs make_encoder_inputs(const MultiModalKG& kg, const Matrix& entity_init,
                                         const Matrix& relation_init, int text_dim = -1,
                                         int image_dim = -1) {
  if (entity_init.rows() != static_cast<Eigen::Index>(kg.num_entities())) {
    throw ValidationError("entity table rows do not match the graph");
  }
  if (relation_init.rows() != static_cast<Eigen::Index>(kg.num_relations())) {
    throw ValidationError("relation table rows do not match the graph");
  }
  EncoderInputs in;
  in.n_entities = kg.num_entities();
  const Adjacency adj(kg);
  for (const Triple& t : kg.triples) {
    in.heads.push_back(static_cast<int>(t.head));
    in.tails.push_back(static_cast<int>(t.tail));
    in.rel_types.push_back(static_cast<int>(t.rel));
  }
  in.incident = adj.incident;
  in.neighbors.resize(kg.num_entities());
  for (std::size_t v = 0; v < kg.num_entities(); ++v) {
    in.neighbors[v] = adj.neighbors(static_cast<EntityId>(v));
  }
  in.plan = build_plan(kg, adj);
  in.entity_init = entity_init;
  in.relation_init = relation_init;
  auto raw = [](const FeatureTable& f, int want) {
    const int dim = want >= 0 ? want : f.dim();
    if (f.empty()) return Matrix(Matrix::Zero(0, dim));
    if (f.dim() != dim) throw ConfigError("feature dimension mismatch between graphs");
    return f.to_matrix();
  };
  in.text_raw = raw(kg.text_features, text_dim);
  in.image_raw = raw(kg.image_features, image_dim);
  return in;
}

// ---- component operators on the tape ----------------------------------------------

// Per-edge layer-0 relation rows.
inline Var relation_init_rows(Tape& t, Var type_rows, Var text_head, Var text_tail, Var image_head,
                              Var image_tail, const BoundParams& p) {
  const Var by_type = t.matmul(type_rows, p.relation_type);
  const Var by_text = t.matmul(t.abs(t.sub(text_tail, text_head)), p.relation_text);
  const Var by_image = t.matmul(t.abs(t.sub(image_tail, image_head)), p.relation_image);
  return t.add(t.add(by_type, by_text), by_image);
}

inline Var entity_init_rows(Tape& t, Var entities, Var text, Var image, const BoundParams& p) {
  return t.relu(t.add(t.add(t.matmul(entities, p.init_entity), t.matmul(text, p.init_text)),
                      t.matmul(image, p.init_image)));
}

inline Var relation_update_rows(Tape& t, Var r_prev, Var text_u, Var text_v, Var image_u,
                                Var image_v, const LayerParamsT<Var>& lp) {
  const Var self = t.matmul(r_prev, lp.relation_self);
  const Var text = t.matmul(t.concat_cols({text_u, text_v}), lp.relation_text);
  const Var image = t.matmul(t.concat_cols({image_u, image_v}), lp.relation_image);
  return t.relu(t.add(t.add(self, text), image));
}

// Message rows (neighbor entity, edge relation) are averaged per target node.
// Nodes without messages average to zero.
inline Var entity_update_rows(Tape& t, Var e_prev, Var msg_entities, Var msg_relations,
                              const std::vector<int>& target, Var weight) {
  const auto n = static_cast<int>(t.value(e_prev).rows());
  const Var mean =
      t.segment_mean(t.concat_cols({msg_entities, msg_relations}), target, n);
  return t.matmul(t.concat_cols({e_prev, mean}), weight);
}

inline Var attribute_update_rows(Tape& t, Var attr_prev, Var entity_prev, Var weight) {
  return t.matmul(t.concat_cols({attr_prev, entity_prev}), weight);
}

// ---- full encoder ----------------------------------------------------------------------

struct EncoderOptions {
  DropoutConfig dropout{0.0, DropoutMode::kNone, 0};
  DropoutKey key;
  UniformizeOptions text;
  UniformizeOptions image;
  bool concat_layers = false;  // alignment vector = [E^0 | ... | E^L]
};

struct EncoderVars {
  Var entity;     // layer L
  Var text;       // layer L
  Var image;      // layer L
  Var relations;  // layer L, per triple
  Var output;     // alignment representation
  std::vector<Var> entity_layers;
};

inline EncoderVars encode(Tape& t, const EncoderInputs& in, const BoundParams& p,
                          const EncoderOptions& opt) {
  const Var entities = t.matmul(t.constant(in.entity_init), p.proj.entity);
  const Var text_attrs = t.matmul(t.constant(in.text_raw), p.proj.text);
  const Var image_attrs = t.matmul(t.constant(in.image_raw), p.proj.image);

  Var text = uniformize(t, in.plan.text, text_attrs, entities, p.merge_text, p.gen_text, opt.text);
  Var image =
      uniformize(t, in.plan.image, image_attrs, entities, p.merge_image, p.gen_image, opt.image);

  Var relations;
  const bool has_edges = !in.heads.empty();
  if (has_edges) {
    const Var types = t.gather_rows(t.constant(in.relation_init), in.rel_types);
    relations = relation_init_rows(t, types, t.gather_rows(text, in.heads),
                                   t.gather_rows(text, in.tails), t.gather_rows(image, in.heads),
                                   t.gather_rows(image, in.tails), p);
  }
  Var entity = entity_init_rows(t, entities, text, image, p);

  EncoderVars out;
  out.entity_layers.push_back(entity);
  const auto d = t.value(entity).cols();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const LayerParamsT<Var>& lp = p.layers[l];
    if (has_edges) {
      relations = relation_update_rows(t, relations, t.gather_rows(text, in.heads),
                                       t.gather_rows(text, in.tails), t.gather_rows(image, in.heads),
                                       t.gather_rows(image, in.tails), lp);
    }
    std::vector<int> msg_entity, msg_edge, target;
    DropoutKey key = opt.key;
    key.layer = l + 1;
    for (std::size_t v = 0; v < in.n_entities; ++v) {
      const auto draws = draw_neighbors(in.neighbors[v], opt.dropout, in.n_entities,
                                        static_cast<EntityId>(v), key);
      const auto& nbrs = in.neighbors[v];
      for (const auto& inc : in.incident[v]) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(nbrs.begin(), nbrs.end(), inc.neighbor) - nbrs.begin());
        if (!draws[k].kept) continue;
        msg_entity.push_back(static_cast<int>(draws[k].entity));
        msg_edge.push_back(static_cast<int>(inc.edge));
        target.push_back(static_cast<int>(v));
      }
    }
    Var msg_e, msg_r;
    if (msg_entity.empty()) {
      msg_e = t.constant(Matrix::Zero(0, d));
      msg_r = t.constant(Matrix::Zero(0, d));
    } else {
      msg_e = t.gather_rows(entity, msg_entity);
      msg_r = t.gather_rows(relations, msg_edge);
    }
    const Var next_entity = entity_update_rows(t, entity, msg_e, msg_r, target, lp.entity_update);
    const Var next_text = attribute_update_rows(t, text, entity, lp.text_update);
    const Var next_image = attribute_update_rows(t, image, entity, lp.image_update);
    entity = next_entity;
    text = next_text;
    image = next_image;
    out.entity_layers.push_back(entity);
  }
  out.entity = entity;
  out.text = text;
  out.image = image;
  out.relations = has_edges ? relations : t.constant(Matrix::Zero(0, d));
  out.output = opt.concat_layers ? t.concat_cols(out.entity_layers) : entity;
  return out;
}

// ---- value-level API -----------------------------------------------------------------

struct GraphState {
  Matrix entity_reps;    // n_E x d
  Matrix text_reps;      // n_E x d
  Matrix image_reps;     // n_E x d
  Matrix relation_reps;  // n_triples x d
  int layer = 0;
  bool operator==(const GraphState&) const = default;
};

// Runs the first `layers` layers of the encoder (0 = initial state only).
inline GraphState forward(const EncoderInputs& in, const ModelParams& params, int layers,
                          const DropoutConfig& dropout, const DropoutKey& key = {}) {
  if (layers < 0 || layers > static_cast<int>(params.layers.size())) {
    throw ConfigError("forward: layer count exceeds the parameter set");
  }
  dropout.check();
  ModelParams truncated = params;
  truncated.layers.resize(static_cast<std::size_t>(layers));
  Tape t;
  const BoundParams b = bind_params(t, truncated, false);
  EncoderOptions opt;
  opt.dropout = dropout;
  opt.key = key;
  const EncoderVars v = encode(t, in, b, opt);
  return {t.value(v.entity), t.value(v.text), t.value(v.image), t.value(v.relations), layers};
}

inline Vector relation_init(const Vector& type_embedding, const Vector& text_head,
                            const Vector& text_tail, const Vector& image_head,
                            const Vector& image_tail, const Matrix& w_type, const Matrix& w_text,
                            const Matrix& w_image) {
  Tape t;
  auto row = [&](const Vector& v) { return t.constant(v.transpose()); };
  BoundParams p;
  p.relation_type = t.constant(w_type);
  p.relation_text = t.constant(w_text);
  p.relation_image = t.constant(w_image);
  const Var r = relation_init_rows(t, row(type_embedding), row(text_head), row(text_tail),
                                   row(image_head), row(image_tail), p);
  return t.value(r).row(0).transpose();
}

inline Vector entity_init(const Vector& entity, const Vector& text, const Vector& image,
                          const Matrix& w_entity, const Matrix& w_text, const Matrix& w_image) {
  Tape t;
  BoundParams p;
  p.init_entity = t.constant(w_entity);
  p.init_text = t.constant(w_text);
  p.init_image = t.constant(w_image);
  const Var e = entity_init_rows(t, t.constant(entity.transpose()), t.constant(text.transpose()),
                                 t.constant(image.transpose()), p);
  return t.value(e).row(0).transpose();
}

inline Vector relation_update(const Vector& r_prev, const Vector& text_u, const Vector& text_v,
                              const Vector& image_u, const Vector& image_v,
                              const LayerParams& lp) {
  Tape t;
  auto row = [&](const Vector& v) { return t.constant(v.transpose()); };
  LayerParamsT<Var> b{t.constant(lp.relation_self), t.constant(lp.relation_text),
                      t.constant(lp.relation_image), Var{}, Var{}, Var{}};
  const Var r = relation_update_rows(t, row(r_prev), row(text_u), row(text_v), row(image_u),
                                     row(image_v), b);
  return t.value(r).row(0).transpose();
}

// neighbor_reps[i] and relation_reps[i] describe the i-th surviving neighbor.
inline Vector entity_update(const Vector& e_prev, const std::vector<Vector>& neighbor_reps,
                            const std::vector<Vector>& relation_reps, const Matrix& w_update) {
  if (neighbor_reps.size() != relation_reps.size()) {
    throw std::invalid_argument("entity_update: neighbor/relation count mismatch");
  }
  Tape t;
  const auto d = e_prev.size();
  Var msg_e, msg_r;
  if (neighbor_reps.empty()) {
    msg_e = t.constant(Matrix::Zero(0, d));
    msg_r = t.constant(Matrix::Zero(0, d));
  } else {
    msg_e = t.constant(detail::stack_rows(neighbor_reps));
    msg_r = t.constant(detail::stack_rows(relation_reps));
  }
  const Var out = entity_update_rows(t, t.constant(e_prev.transpose()), msg_e, msg_r,
                                     std::vector<int>(neighbor_reps.size(), 0), t.constant(w_update));
  return t.value(out).row(0).transpose();
}

inline Vector attribute_update(const Vector& attr_prev, const Vector& entity_prev,
                               const Matrix& w_update) {
  Tape t;
  const Var out = attribute_update_rows(t, t.constant(attr_prev.transpose()),
                                        t.constant(entity_prev.transpose()), t.constant(w_update));
  return t.value(out).row(0).transpose();
}

}  // namespace ackmmea
