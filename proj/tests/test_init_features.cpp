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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "ackmmea/synthetic.hpp"
#include "ackmmea/transe.hpp"
#include "test_util.hpp"

namespace ackmmea {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TEST(TransEScore, HandExamples) {
  EXPECT_DOUBLE_EQ(transe_score(vec({1, 0}), vec({0, 1}), vec({1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(transe_score(vec({0.3, -2}), vec({0, 0}), vec({0.3, -2})), 0.0);
  EXPECT_DOUBLE_EQ(transe_score(vec({1, 0}), vec({0, 0}), vec({0, 1})), std::sqrt(2.0));
  EXPECT_THROW(transe_score(vec({1, 0}), vec({0}), vec({0, 1})), std::invalid_argument);
}

TEST(TransEScore, RotationInvariant) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                  Eigen::MatrixXd(testing::random_matrix(6, 6, rng)))
                                  .householderQ();
    const Vector h = testing::random_vector(6, rng), r = testing::random_vector(6, rng),
                 t = testing::random_vector(6, rng);
    EXPECT_NEAR(transe_score(q * h, q * r, q * t), transe_score(h, r, t), 1e-12);
  }
}

TEST(MarginRankingLoss, Examples) {
  EXPECT_EQ(margin_ranking_loss(0.0, 2.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(margin_ranking_loss(1.0, 1.5, 1.0), 0.5);
}

MultiModalKG chain(std::size_t n) {
  std::mt19937_64 rng(0);
  std::vector<std::pair<EntityId, EntityId>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(static_cast<EntityId>(i), static_cast<EntityId>(i + 1));
  return testing::tiny_kg(n, edges, {}, {}, 2, rng);
}

TEST(TrainTransE, SingleTripleScoreDecreases) {
  const MultiModalKG kg = chain(2);
  TransEConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 0;
  const TransEResult before = train_transe(kg, cfg);
  cfg.epochs = 200;
  const TransEResult after = train_transe(kg, cfg);
  auto score = [&](const TransEResult& r) {
    return transe_score(r.entities.row(0), r.relations.row(0), r.entities.row(1));
  };
  EXPECT_LT(score(after), score(before));
}

TEST(TrainTransE, UnitNormEntitiesAndDeterminism) {
  SyntheticConfig sc;
  sc.n_entities = 40;
  const SyntheticPair p = generate_synthetic(sc);
  TransEConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 20;
  cfg.rng_seed = 3;
  const TransEResult a = train_transe(p.kg1, cfg);
  for (std::size_t i = 0; i < a.entities.size(); ++i) {
    EXPECT_NEAR(a.entities.row(i).norm(), 1.0, 1e-6);
  }
  const TransEResult b = train_transe(p.kg1, cfg);
  EXPECT_EQ(a.entities, b.entities);
  EXPECT_EQ(a.relations, b.relations);
  EXPECT_EQ(a.entities.size(), p.kg1.num_entities());
  EXPECT_EQ(a.relations.size(), p.kg1.num_relations());
}

TEST(TrainTransE, LossTrendsDown) {
  SyntheticConfig sc;
  sc.n_entities = 60;
  const SyntheticPair p = generate_synthetic(sc);
  TransEConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 60;
  const TransEResult r = train_transe(p.kg1, cfg);
  const auto mean = [](auto b, auto e) { return std::accumulate(b, e, 0.0) / static_cast<double>(e - b); };
  const auto& h = r.loss_history;
  EXPECT_LT(mean(h.end() - 10, h.end()), mean(h.begin(), h.begin() + 10));
}

TEST(TrainTransE, ChainSeparatesTrueFromCorrupted) {
  const MultiModalKG kg = chain(20);
  TransEConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 300;
  cfg.rng_seed = 1;
  const TransEResult r = train_transe(kg, cfg);
  double pos = 0.0;
  for (const Triple& t : kg.triples) {
    pos += transe_score(r.entities.row(t.head), r.relations.row(t.rel), r.entities.row(t.tail));
  }
  pos /= static_cast<double>(kg.triples.size());
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<EntityId> pick(0, 19);
  double neg = 0.0;
  for (int i = 0; i < 100; ++i) {
    EntityId h = pick(rng), t = pick(rng);
    while (t == h + 1) t = pick(rng);
    neg += transe_score(r.entities.row(h), r.relations.row(0), r.entities.row(t));
  }
  neg /= 100.0;
  EXPECT_LT(pos, neg);
}

TEST(TrainTransE, RejectsEmptyGraphAndBadConfig) {
  MultiModalKG kg = chain(3);
  kg.triples.clear();
  EXPECT_THROW(train_transe(kg, {}), ValidationError);
  TransEConfig bad;
  bad.margin = 0.0;
  EXPECT_THROW(train_transe(chain(3), bad), ConfigError);
}

}  // namespace
}  // namespace ackmmea
