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
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ackmmea/error.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/random.hpp"
#include "ackmmea/seeds.hpp"

namespace ackmmea {

struct CountRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const CountRange&) const = default;
};

// Twin-KG generator settings. KG2 is a relabelled copy of KG1 whose
// attribute lists are perturbed to create controlled contextual gaps.
struct SyntheticConfig {
  std::size_t n_entities = 200;
  std::size_t n_relation_types = 8;
  double avg_degree = 4.0;
  CountRange text_attr_count{1, 4};
  CountRange image_attr_count{1, 2};
  int gap_level = 0;         // max |#text(KG1) - #text(KG2)| per pair
  int image_gap_level = -1;  // same for images; negative means "use gap_level"
  double missing_modality_rate = 0.0;
  double feature_noise_sigma = 0.0;
  int text_dim = 32;
  int image_dim = 32;
  std::uint64_t rng_seed = 0;

  int effective_image_gap() const { return image_gap_level < 0 ? gap_level : image_gap_level; }

  void check() const {
    if (n_entities < 2) throw ConfigError("synthetic: need at least 2 entities");
    if (n_relation_types < 1) throw ConfigError("synthetic: need at least 1 relation type");
    if (!(avg_degree >= 0.0) || !std::isfinite(avg_degree)) {
      throw ConfigError("synthetic: avg_degree must be >= 0");
    }
    for (const CountRange* r : {&text_attr_count, &image_attr_count}) {
      if (r->lo < 0 || r->hi < r->lo) throw ConfigError("synthetic: attribute count range is degenerate");
    }
    if (gap_level < 0) throw ConfigError("synthetic: gap_level must be >= 0");
    if (!(missing_modality_rate >= 0.0 && missing_modality_rate <= 1.0)) {
      throw ConfigError("synthetic: missing_modality_rate must lie in [0,1]");
    }
    if (!(feature_noise_sigma >= 0.0) || !std::isfinite(feature_noise_sigma)) {
      throw ConfigError("synthetic: feature_noise_sigma must be >= 0");
    }
    if (text_dim <= 0 || image_dim <= 0) throw ConfigError("synthetic: feature dims must be positive");
  }
};

struct SyntheticPair {
  MultiModalKG kg1;
  MultiModalKG kg2;
  AlignmentSeedSet seeds;  // unsplit, pair i = (i, twin of i)
};

namespace detail {

inline Vector gaussian(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = normal(rng);
  return v;
}

inline Vector jitter(const Vector& v, double sigma, Rng& rng) {
  if (sigma == 0.0) return v;
  return v + sigma * gaussian(static_cast<int>(v.size()), rng);
}

// Rebuilds KG2's list for one entity/modality: noisy copies of KG1's vectors,
// then a gap of g attributes either removed or added as near-duplicates.
inline std::vector<Vector> perturb_attributes(const std::vector<Vector>& source, int gap_level,
                                              double sigma, Rng& rng) {
  std::vector<Vector> out;
  out.reserve(source.size());
  for (const Vector& v : source) out.push_back(jitter(v, sigma, rng));
  if (gap_level == 0 || source.empty()) return out;

  const int g = std::uniform_int_distribution<int>(0, gap_level)(rng);
  const bool drop = std::bernoulli_distribution(0.5)(rng);
  if (drop && static_cast<int>(out.size()) - g >= 1) {
    std::shuffle(out.begin(), out.end(), rng);
    out.resize(out.size() - static_cast<std::size_t>(g));
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, source.size() - 1);
    for (int i = 0; i < g; ++i) out.push_back(jitter(source[pick(rng)], sigma, rng));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace detail

inline SyntheticPair generate_synthetic(const SyntheticConfig& cfg) {
  cfg.check();
  const std::size_t n = cfg.n_entities;
  SyntheticPair out;
  MultiModalKG& kg1 = out.kg1;
  MultiModalKG& kg2 = out.kg2;

  for (std::size_t r = 0; r < cfg.n_relation_types; ++r) {
    kg1.relation_names.push_back("r" + std::to_string(r));
  }
  kg2.relation_names = kg1.relation_names;
  for (std::size_t i = 0; i < n; ++i) kg1.entity_names.push_back("kg1/e" + std::to_string(i));

  // Structure: unique undirected pairs with a random orientation and type.
  {
    Rng rng = make_rng(cfg.rng_seed, "synthetic/structure");
    const std::size_t max_edges = n * (n - 1) / 2;
    const auto want = std::min<std::size_t>(
        max_edges, static_cast<std::size_t>(std::llround(cfg.avg_degree * static_cast<double>(n) / 2.0)));
    std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(n - 1));
    std::uniform_int_distribution<RelationId> pick_rel(0, static_cast<RelationId>(cfg.n_relation_types - 1));
    std::set<std::pair<EntityId, EntityId>> used;
    while (used.size() < want) {
      EntityId a = pick(rng), b = pick(rng);
      if (a == b) continue;
      if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
      if (std::bernoulli_distribution(0.5)(rng)) std::swap(a, b);
      kg1.triples.push_back({a, pick_rel(rng), b});
    }
  }

  // KG1 attributes: fresh standard-normal vectors.
  {
    Rng rng = make_rng(cfg.rng_seed, "synthetic/attributes");
    for (Modality m : {Modality::kText, Modality::kImage}) {
      const CountRange range = m == Modality::kText ? cfg.text_attr_count : cfg.image_attr_count;
      const int dim = m == Modality::kText ? cfg.text_dim : cfg.image_dim;
      const std::string prefix = m == Modality::kText ? "kg1/t" : "kg1/i";
      kg1.features(m) = FeatureTable(dim);
      kg1.attrs(m).assign(n, {});
      std::uniform_int_distribution<int> count(range.lo, range.hi);
      for (std::size_t e = 0; e < n; ++e) {
        const int c = count(rng);
        for (int k = 0; k < c; ++k) {
          const std::size_t row = kg1.features(m).add(prefix + std::to_string(kg1.features(m).size()),
                                                       detail::gaussian(dim, rng));
          kg1.attrs(m)[e].push_back(static_cast<AttributeId>(row));
        }
      }
    }
  }

  // KG2: permuted ids, shuffled triple order, perturbed attributes.
  Rng rng = make_rng(cfg.rng_seed, "synthetic/twin");
  std::vector<EntityId> twin(n);
  std::iota(twin.begin(), twin.end(), EntityId{0});
  std::shuffle(twin.begin(), twin.end(), rng);
  kg2.entity_names.resize(n);
  for (std::size_t i = 0; i < n; ++i) kg2.entity_names[twin[i]] = "kg2/e" + std::to_string(twin[i]);
  for (const Triple& t : kg1.triples) kg2.triples.push_back({twin[t.head], t.rel, twin[t.tail]});
  std::shuffle(kg2.triples.begin(), kg2.triples.end(), rng);

  for (Modality m : {Modality::kText, Modality::kImage}) {
    kg2.features(m) = FeatureTable(kg1.features(m).dim());
    kg2.attrs(m).assign(n, {});
  }
  std::vector<std::vector<Vector>> lists[2];
  for (std::size_t i = 0; i < n; ++i) {
    for (Modality m : {Modality::kText, Modality::kImage}) {
      std::vector<Vector> src;
      for (AttributeId a : kg1.attrs(m)[i]) src.push_back(kg1.features(m).row(a));
      const int gap = m == Modality::kText ? cfg.gap_level : cfg.effective_image_gap();
      lists[m == Modality::kText ? 0 : 1].push_back(
          detail::perturb_attributes(src, gap, cfg.feature_noise_sigma, rng));
    }
    if (cfg.missing_modality_rate > 0.0 &&
        std::bernoulli_distribution(cfg.missing_modality_rate)(rng)) {
      const int lost = std::bernoulli_distribution(0.5)(rng) ? 0 : 1;
      lists[lost].back().clear();
    }
  }
  // Emit KG2 features in KG2 entity order so table order carries no hint.
  std::vector<std::size_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[twin[i]] = i;
  for (std::size_t e2 = 0; e2 < n; ++e2) {
    for (Modality m : {Modality::kText, Modality::kImage}) {
      const std::string prefix = m == Modality::kText ? "kg2/t" : "kg2/i";
      for (const Vector& v : lists[m == Modality::kText ? 0 : 1][owner[e2]]) {
        const std::size_t row = kg2.features(m).add(prefix + std::to_string(kg2.features(m).size()), v);
        kg2.attrs(m)[e2].push_back(static_cast<AttributeId>(row));
      }
    }
  }

  std::vector<SeedPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(static_cast<EntityId>(i), twin[i]);
  out.seeds = AlignmentSeedSet::unsplit(std::move(pairs));
  return out;
}

}  // namespace ackmmea
