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

// A pair of graphs prepared for alignment: pre-trained entity/relation
// tables, uniformization plans and neighborhoods, plus the seed split.

#include <cstdint>
#include <vector>

#include "ackmmea/config.hpp"
#include "ackmmea/consistgnn.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/seeds.hpp"
#include "ackmmea/transe.hpp"

namespace ackmmea {

// Frozen pre-trained tables of one graph.
struct FrozenTables {
  Matrix entity_init;    // n_E x d_E
  Matrix relation_init;  // n_R x d_E
  bool operator==(const FrozenTables&) const = default;
};

struct PreparedPair {
  EncoderInputs left;
  EncoderInputs right;
  FrozenTables left_tables;
  FrozenTables right_tables;
  AlignmentSeedSet seeds;
  std::vector<std::size_t> left_text_count, left_image_count;    // raw attribute counts
  std::vector<std::size_t> right_text_count, right_image_count;  // raw attribute counts
  ModelDims dims;
};

inline TransEConfig transe_config(const TrainConfig& cfg, std::uint64_t side) {
  TransEConfig t;
  t.dim = cfg.transe_dim;
  t.margin = cfg.transe_margin;
  t.learning_rate = cfg.transe_lr;
  t.epochs = cfg.transe_epochs;
  t.negatives_per_triple = cfg.transe_negatives;
  t.rng_seed = stream_seed(cfg.seed, "transe", {side});
  return t;
}

// Pre-trains TransE tables for one graph. A graph without triples gets
// random unit vectors so isolated toy graphs still run.
inline FrozenTables pretrain_tables(const MultiModalKG& kg, const TrainConfig& cfg,
                                    std::uint64_t side) {
  const TransEConfig tc = transe_config(cfg, side);
  if (kg.triples.empty()) {
    FrozenTables f;
    f.entity_init = random_features(kg.entity_names, tc.dim, tc.rng_seed).to_matrix();
    f.entity_init.rowwise().normalize();
    f.relation_init = kg.relation_names.empty()
                          ? Matrix(Matrix::Zero(0, tc.dim))
                          : random_features(kg.relation_names, tc.dim, tc.rng_seed + 1).to_matrix();
    return f;
  }
  TransEResult r = train_transe(kg, tc);
  return {r.entities.to_matrix(), r.relations.to_matrix()};
}

inline PreparedPair prepare_pair(const MultiModalKG& kg1, const MultiModalKG& kg2,
                                 const AlignmentSeedSet& seeds, const TrainConfig& cfg,
                                 const FrozenTables& left_tables, const FrozenTables& right_tables) {
  cfg.check();
  auto shared_dim = [](const FeatureTable& a, const FeatureTable& b, const char* what) {
    const int da = a.empty() ? 0 : a.dim();
    const int db = b.empty() ? 0 : b.dim();
    if (da != 0 && db != 0 && da != db) {
      throw ConfigError(std::string(what) + " feature dimensions differ between graphs (" +
                        std::to_string(da) + " vs " + std::to_string(db) + ")");
    }
    return std::max(da, db);
  };
  const int text_dim = shared_dim(kg1.text_features, kg2.text_features, "text");
  const int image_dim = shared_dim(kg1.image_features, kg2.image_features, "image");
  for (const auto& problem : check_seeds(seeds)) throw ValidationError("seed set: " + problem);
  for (const auto& [l, r] : seeds.pairs) {
    if (l >= kg1.num_entities() || r >= kg2.num_entities()) {
      throw ValidationError("seed pair references an unknown entity");
    }
  }

  PreparedPair p;
  p.left_tables = left_tables;
  p.right_tables = right_tables;
  if (left_tables.entity_init.cols() != right_tables.entity_init.cols() ||
      left_tables.entity_init.cols() != cfg.transe_dim) {
    throw ConfigError("pre-trained table dimension does not match transe_dim");
  }
  p.left = make_encoder_inputs(kg1, left_tables.entity_init, left_tables.relation_init, text_dim,
                               image_dim);
  p.right = make_encoder_inputs(kg2, right_tables.entity_init, right_tables.relation_init, text_dim,
                                image_dim);
  p.seeds = seeds;
  for (std::size_t e = 0; e < kg1.num_entities(); ++e) {
    p.left_text_count.push_back(kg1.text_attrs[e].size());
    p.left_image_count.push_back(kg1.image_attrs[e].size());
  }
  for (std::size_t e = 0; e < kg2.num_entities(); ++e) {
    p.right_text_count.push_back(kg2.text_attrs[e].size());
    p.right_image_count.push_back(kg2.image_attrs[e].size());
  }
  p.dims = {cfg.transe_dim, text_dim, image_dim, cfg.d, cfg.layers};
  return p;
}

inline PreparedPair prepare_pair(const MultiModalKG& kg1, const MultiModalKG& kg2,
                                 const AlignmentSeedSet& seeds, const TrainConfig& cfg) {
  return prepare_pair(kg1, kg2, seeds, cfg, pretrain_tables(kg1, cfg, 0), pretrain_tables(kg2, cfg, 1));
}

inline EncoderOptions encoder_options(const TrainConfig& cfg, bool training) {
  EncoderOptions o;
  o.dropout = training ? cfg.dropout() : DropoutConfig{0.0, DropoutMode::kNone, cfg.seed};
  for (UniformizeOptions* u : {&o.text, &o.image}) {
    u->attention_merge = !cfg.no_merge;
    u->generate = !cfg.no_generate;
    u->bypass = cfg.no_uniformization;
  }
  o.text.zero = cfg.no_text;
  o.image.zero = cfg.no_image;
  o.concat_layers = cfg.representation == RepresentationMode::kConcatLayers;
  return o;
}

inline LossSettings loss_settings(const TrainConfig& cfg) {
  LossSettings s;
  s.weights = cfg.loss_weights();
  if (cfg.margin_mode) s.margin = cfg.margin;
  s.text = !cfg.no_text;
  s.image = !cfg.no_image;
  return s;
}

}  // namespace ackmmea
