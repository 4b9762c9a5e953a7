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

// Translational (TransE) pre-training of entity and relation-type vectors.
// L2 scoring, 50/50 head-or-tail corruption, margin ranking loss, plain SGD,
// entity vectors renormalized to unit length after every update.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/feature_table.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/random.hpp"

namespace ackmmea {

struct TransEConfig {
  int dim = 128;
  double margin = 1.0;
  double learning_rate = 0.01;
  int epochs = 100;
  int negatives_per_triple = 1;
  std::uint64_t rng_seed = 0;

  void check() const {
    if (dim <= 0 || !(margin > 0.0) || !(learning_rate > 0.0) || epochs < 0 ||
        negatives_per_triple <= 0) {
      throw ConfigError("TransE config values must be positive");
    }
  }
};

inline double transe_score(const Vector& h, const Vector& r, const Vector& t) {
  if (h.size() != r.size() || r.size() != t.size()) {
    throw std::invalid_argument("transe_score: dimension mismatch");
  }
  return (h + r - t).norm();
}

inline double margin_ranking_loss(double pos_score, double neg_score, double margin) {
  return std::max(0.0, margin + pos_score - neg_score);
}

struct TransEResult {
  FeatureTable entities;
  FeatureTable relations;
  std::vector<double> loss_history;  // summed margin loss per epoch
};

inline TransEResult train_transe(const MultiModalKG& kg, const TransEConfig& cfg) {
  cfg.check();
  if (kg.triples.empty()) throw ValidationError("train_transe: knowledge graph has no triples");
  const int d = cfg.dim;
  const auto n_ent = static_cast<Eigen::Index>(kg.num_entities());
  const auto n_rel = static_cast<Eigen::Index>(kg.num_relations());

  Rng rng = make_rng(cfg.rng_seed, "transe");
  const double bound = 6.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> init(-bound, bound);
  Matrix ent(n_ent, d), rel(n_rel, d);
  for (Eigen::Index i = 0; i < ent.size(); ++i) ent.data()[i] = init(rng);
  for (Eigen::Index i = 0; i < rel.size(); ++i) rel.data()[i] = init(rng);
  rel.rowwise().normalize();
  ent.rowwise().normalize();

  std::vector<std::size_t> order(kg.triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(n_ent - 1));
  std::bernoulli_distribution corrupt_head(0.5);

  TransEResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  Vector diff_pos(d), diff_neg(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const Triple& tr = kg.triples[idx];
      for (int k = 0; k < cfg.negatives_per_triple; ++k) {
        EntityId nh = tr.head, nt = tr.tail;
        if (n_ent > 1) {
          EntityId& slot = corrupt_head(rng) ? nh : nt;
          const EntityId orig = slot;
          do {
            slot = pick(rng);
          } while (slot == orig);
        }
        diff_pos = ent.row(tr.head).transpose() + rel.row(tr.rel).transpose() - ent.row(tr.tail).transpose();
        diff_neg = ent.row(nh).transpose() + rel.row(tr.rel).transpose() - ent.row(nt).transpose();
        const double sp = diff_pos.norm();
        const double sn = diff_neg.norm();
        const double loss = margin_ranking_loss(sp, sn, cfg.margin);
        if (loss <= 0.0) continue;
        epoch_loss += loss;
        const Vector gp = sp > 0.0 ? Vector(diff_pos / sp) : Vector::Zero(d);
        const Vector gn = sn > 0.0 ? Vector(diff_neg / sn) : Vector::Zero(d);
        const double lr = cfg.learning_rate;
        ent.row(tr.head) -= lr * gp.transpose();
        ent.row(tr.tail) += lr * gp.transpose();
        rel.row(tr.rel) -= lr * (gp - gn).transpose();
        ent.row(nh) += lr * gn.transpose();
        ent.row(nt) -= lr * gn.transpose();
        for (EntityId e : {tr.head, tr.tail, nh, nt}) ent.row(e).normalize();
      }
    }
    result.loss_history.push_back(epoch_loss);
  }
  result.entities = FeatureTable::from_matrix(kg.entity_names, ent);
  result.relations = FeatureTable::from_matrix(kg.relation_names, rel);
  return result;
}

}  // namespace ackmmea
