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

// Joint alignment loss: entity similarity against sampled negatives, aligned
// attribute similarity, and a temperature-scaled contrastive term pushing a
// seed's counterpart above the counterpart's own neighbors.
//
// The first two terms use cosine distance (1 - cos). The contrastive term uses
// cosine similarity as its logits, with the positive pair included in the
// normalizer, so an empty neighborhood costs exactly zero.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/random.hpp"
#include "ackmmea/seeds.hpp"
#include "ackmmea/tape.hpp"

namespace ackmmea {

struct LossWeights {
  double lambda1 = 5.0;  // entity
  double lambda2 = 3.0;  // attribute
  double lambda3 = 2.0;  // neighbor
  double tau = 0.5;

  void check() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) throw ConfigError("loss weights must be >= 0");
  }
};

namespace detail {
inline std::atomic<bool>& zero_norm_logged() {
  static std::atomic<bool> flag{false};
  return flag;
}
}  // namespace detail

// 1 - cos(u, v). A zero vector on either side counts as orthogonal (1).
inline double cosine_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    if (!detail::zero_norm_logged().exchange(true)) {
      std::cerr << "warning: cosine distance of a zero vector, using 1\n";
    }
    return 1.0;
  }
  return 1.0 - u.dot(v) / (nu * nv);
}

inline double cosine_similarity(const Vector& u, const Vector& v) { return 1.0 - cosine_distance(u, v); }

// ---- negative sampling ------------------------------------------------------------

struct NegativeSample {
  std::vector<EntityId> left;   // stand-ins for the KG1 entity
  std::vector<EntityId> right;  // stand-ins for the KG2 entity
};

namespace detail {

// k distinct draws from [0, n) \ {excluded}, uniform (Floyd's algorithm).
inline std::vector<EntityId> sample_excluding(std::size_t n, EntityId excluded, std::size_t k,
                                              Rng& rng) {
  const std::size_t pool = n - 1;
  std::unordered_set<std::size_t> chosen;
  std::vector<EntityId> out;
  out.reserve(k);
  for (std::size_t j = pool - k; j < pool; ++j) {
    std::size_t x = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (!chosen.insert(x).second) {
      x = j;
      chosen.insert(x);
    }
    out.push_back(static_cast<EntityId>(x >= excluded ? x + 1 : x));
  }
  return out;
}

}  // namespace detail

inline std::vector<NegativeSample> sample_negatives(std::span<const SeedPair> seeds, std::size_t k,
                                                    std::size_t n_left, std::size_t n_right,
                                                    std::uint64_t rng_seed, std::uint64_t epoch) {
  if (k + 1 > n_left || k + 1 > n_right) {
    throw ConfigError("negative sample count " + std::to_string(k) +
                      " needs more than that many entities on each side");
  }
  Rng rng = make_rng(rng_seed, "negatives", {epoch});
  std::vector<NegativeSample> out;
  out.reserve(seeds.size());
  for (const auto& [l, r] : seeds) {
    NegativeSample s;
    s.left = detail::sample_excluding(n_left, l, k, rng);
    s.right = detail::sample_excluding(n_right, r, k, rng);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- batched terms on the tape ---------------------------------------------------------

// Representations of one graph as seen by the loss.
struct SideVars {
  Var entity;  // alignment representation, n_E x d'
  Var text;    // n_E x d
  Var image;   // n_E x d
};

struct LossBatch {
  std::vector<SeedPair> pairs;
  std::vector<NegativeSample> negatives;               // per pair
  std::vector<std::vector<EntityId>> right_neighbors;  // first-order, per pair
};

struct LossSettings {
  LossWeights weights;
  std::optional<double> margin;  // hinge form of the entity term when set
  bool text = true;              // include the text attribute term
  bool image = true;             // include the image attribute term
};

struct LossTerms {
  Var entity;
  Var attribute;
  Var neighbor;
  Var total;
};

namespace detail {

inline std::vector<int> as_int(const std::vector<EntityId>& v) {
  return {v.begin(), v.end()};
}

inline Var cosine_distance_rows(Tape& t, Var a, Var b) {
  return t.add_scalar(t.scale(t.rowwise_cosine(a, b), -1.0), 1.0);
}

}  // namespace detail

inline Var entity_alignment_term(Tape& t, Var left, Var right, const LossBatch& batch,
                                 std::optional<double> margin) {
  std::vector<int> l, r, nl, nl_anchor, nr, nr_anchor, nl_seg, nr_seg;
  const auto b = static_cast<int>(batch.pairs.size());
  for (int i = 0; i < b; ++i) {
    const auto& [li, ri] = batch.pairs[i];
    l.push_back(static_cast<int>(li));
    r.push_back(static_cast<int>(ri));
    for (EntityId n : batch.negatives.at(i).left) {
      nl.push_back(static_cast<int>(n));
      nl_anchor.push_back(static_cast<int>(ri));
      nl_seg.push_back(i);
    }
    for (EntityId n : batch.negatives.at(i).right) {
      nr.push_back(static_cast<int>(n));
      nr_anchor.push_back(static_cast<int>(li));
      nr_seg.push_back(i);
    }
  }
  const Var pos = detail::cosine_distance_rows(t, t.gather_rows(left, l), t.gather_rows(right, r));
  // sim(e_i, e'_neg) averaged over the right-side negatives, and
  // sim(e_neg, e'_i) averaged over the left-side negatives.
  const Var neg_right = t.segment_mean(
      detail::cosine_distance_rows(t, t.gather_rows(left, nr_anchor), t.gather_rows(right, nr)),
      nr_seg, b);
  const Var neg_left = t.segment_mean(
      detail::cosine_distance_rows(t, t.gather_rows(left, nl), t.gather_rows(right, nl_anchor)),
      nl_seg, b);
  if (margin) {
    const Var a = t.relu(t.add_scalar(t.sub(pos, neg_right), *margin));
    const Var c = t.relu(t.add_scalar(t.sub(pos, neg_left), *margin));
    return t.mean(t.add(a, c));
  }
  return t.mean(t.sub(t.sub(pos, neg_right), neg_left));
}

inline Var attribute_similarity_term(Tape& t, const SideVars& left, const SideVars& right,
                                     const LossBatch& batch, bool text, bool image) {
  std::vector<int> l, r;
  for (const auto& [li, ri] : batch.pairs) {
    l.push_back(static_cast<int>(li));
    r.push_back(static_cast<int>(ri));
  }
  Var total = t.constant(Matrix::Zero(1, 1));
  if (text) {
    total = t.add(total, t.mean(detail::cosine_distance_rows(t, t.gather_rows(left.text, l),
                                                             t.gather_rows(right.text, r))));
  }
  if (image) {
    total = t.add(total, t.mean(detail::cosine_distance_rows(t, t.gather_rows(left.image, l),
                                                             t.gather_rows(right.image, r))));
  }
  return total;
}

inline Var neighbor_contrastive_term(Tape& t, Var left, Var right, const LossBatch& batch,
                                     double tau) {
  std::vector<int> l, r, nb_anchor, nb, nb_seg;
  const auto b = static_cast<int>(batch.pairs.size());
  for (int i = 0; i < b; ++i) {
    const auto& [li, ri] = batch.pairs[i];
    l.push_back(static_cast<int>(li));
    r.push_back(static_cast<int>(ri));
    for (EntityId n : batch.right_neighbors.at(i)) {
      nb_anchor.push_back(static_cast<int>(li));
      nb.push_back(static_cast<int>(n));
      nb_seg.push_back(i);
    }
  }
  const Var pos = t.scale(t.rowwise_cosine(t.gather_rows(left, l), t.gather_rows(right, r)), 1.0 / tau);
  std::vector<int> seg(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) seg[i] = i;
  Var logits = pos;
  if (!nb.empty()) {
    const Var others =
        t.scale(t.rowwise_cosine(t.gather_rows(left, nb_anchor), t.gather_rows(right, nb)), 1.0 / tau);
    const Var parts[] = {pos, others};
    logits = t.concat_rows(parts);
    seg.insert(seg.end(), nb_seg.begin(), nb_seg.end());
  }
  const Var lse = t.log(t.segment_sum(t.exp(logits), seg, b));
  return t.mean(t.sub(lse, pos));
}

inline Var weighted_total(Tape& t, Var entity, Var attribute, Var neighbor, const LossWeights& w) {
  return t.add(t.add(t.scale(entity, w.lambda1), t.scale(attribute, w.lambda2)),
               t.scale(neighbor, w.lambda3));
}

inline LossTerms joint_loss(Tape& t, const SideVars& left, const SideVars& right,
                            const LossBatch& batch, const LossSettings& s) {
  s.weights.check();
  if (batch.pairs.empty()) throw ConfigError("loss batch is empty");
  LossTerms out;
  out.entity = entity_alignment_term(t, left.entity, right.entity, batch, s.margin);
  out.attribute = attribute_similarity_term(t, left, right, batch, s.text, s.image);
  out.neighbor = neighbor_contrastive_term(t, left.entity, right.entity, batch, s.weights.tau);
  out.total = weighted_total(t, out.entity, out.attribute, out.neighbor, s.weights);
  return out;
}

// ---- value-level, single seed -------------------------------------------------------------

inline double entity_alignment_loss(const Vector& e, const Vector& e_prime,
                                    std::span<const Vector> neg_left,
                                    std::span<const Vector> neg_right,
                                    std::optional<double> margin = std::nullopt) {
  if (e.size() != e_prime.size()) throw std::invalid_argument("entity_alignment_loss: dimension mismatch");
  const double pos = cosine_distance(e, e_prime);
  auto avg = [&](std::span<const Vector> negs, bool left_side) {
    if (negs.empty()) return 0.0;
    double s = 0.0;
    for (const Vector& n : negs) s += left_side ? cosine_distance(n, e_prime) : cosine_distance(e, n);
    return s / static_cast<double>(negs.size());
  };
  const double nl = avg(neg_left, true);
  const double nr = avg(neg_right, false);
  if (margin) return std::max(0.0, *margin + pos - nr) + std::max(0.0, *margin + pos - nl);
  return pos - nr - nl;
}

inline double attribute_similarity_loss(const Vector& text, const Vector& text_prime,
                                        const Vector& image, const Vector& image_prime) {
  return cosine_distance(text, text_prime) + cosine_distance(image, image_prime);
}

inline double neighbor_contrastive_loss(const Vector& e, const Vector& e_prime,
                                        std::span<const Vector> neighbor_reps, double tau) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double pos = cosine_similarity(e, e_prime) / tau;
  double z = std::exp(pos);
  for (const Vector& n : neighbor_reps) z += std::exp(cosine_similarity(e, n) / tau);
  return std::log(z) - pos;
}

inline double total_loss(double entity, double attribute, double neighbor, const LossWeights& w) {
  return w.lambda1 * entity + w.lambda2 * attribute + w.lambda3 * neighbor;
}

}  // namespace ackmmea
