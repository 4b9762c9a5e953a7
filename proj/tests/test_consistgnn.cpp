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

#include <algorithm>
#include <cmath>
#include <random>

#include "ackmmea/consistgnn.hpp"
#include "ackmmea/synthetic.hpp"
#include "test_util.hpp"

namespace ackmmea {
namespace {

using testing::random_matrix;
using testing::random_vector;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix stack(std::initializer_list<Matrix> blocks) {
  Eigen::Index rows = 0, cols = blocks.begin()->cols();
  for (const Matrix& b : blocks) rows += b.rows();
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Matrix& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

// x (as a row) times w, written out as loops.
Vector row_times(const Vector& x, const Matrix& w) {
  Vector out = Vector::Zero(w.cols());
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index k = 0; k < w.rows(); ++k) out[j] += x[k] * w(k, j);
  }
  return out;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// ---- relation initialization ----------------------------------------------------------------

TEST(RelationInit, EqualAttributesAndZeroTypeGiveZero) {
  std::mt19937_64 rng(1);
  const Vector t = random_vector(3, rng), i = random_vector(3, rng);
  const Vector r = relation_init(Vector::Zero(4), t, t, i, i, random_matrix(4, 3, rng),
                                 random_matrix(3, 3, rng), random_matrix(3, 3, rng));
  EXPECT_EQ(r, Vector::Zero(3));
}

TEST(RelationInit, AbsoluteDifference) {
  const Matrix I = Matrix::Identity(2, 2);
  const Vector r = relation_init(Vector::Zero(2), vec({0, 0}), vec({1, -1}), vec({0, 0}),
                                 vec({0.5, 0}), I, I, I);
  EXPECT_EQ(r, vec({1.5, 1}));
}

TEST(RelationInit, MatchesScalarOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector type = random_vector(5, rng), th = random_vector(3, rng), tt = random_vector(3, rng),
                 ih = random_vector(3, rng), it = random_vector(3, rng);
    const Matrix w0 = random_matrix(5, 3, rng), wt = random_matrix(3, 3, rng), wi = random_matrix(3, 3, rng);
    const Vector expected = row_times(type, w0) + row_times((tt - th).cwiseAbs(), wt) +
                            row_times((it - ih).cwiseAbs(), wi);
    EXPECT_TRUE(relation_init(type, th, tt, ih, it, w0, wt, wi).isApprox(expected, 1e-13));
  }
}

// ---- entity initialization --------------------------------------------------------------------

TEST(EntityInit, Examples) {
  std::mt19937_64 rng(3);
  const Matrix w1 = random_matrix(3, 3, rng), w2 = random_matrix(3, 3, rng), w3 = random_matrix(3, 3, rng);
  EXPECT_EQ(entity_init(Vector::Zero(3), Vector::Zero(3), Vector::Zero(3), w1, w2, w3), Vector::Zero(3));
  const Vector e = vec({0.2, 0.0, 3.0});
  EXPECT_EQ(entity_init(e, random_vector(3, rng), random_vector(3, rng), Matrix::Identity(3, 3),
                        Matrix::Zero(3, 3), Matrix::Zero(3, 3)),
            e);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = random_vector(3, rng), b = random_vector(3, rng), c = random_vector(3, rng);
    const Vector expected = (row_times(a, w1) + row_times(b, w2) + row_times(c, w3)).cwiseMax(0.0);
    EXPECT_TRUE(entity_init(a, b, c, w1, w2, w3).isApprox(expected, 1e-13));
  }
}

// ---- relation update -------------------------------------------------------------------------------

LayerParams random_layer(int d, std::mt19937_64& rng) {
  return {random_matrix(d, d, rng),     random_matrix(2 * d, d, rng), random_matrix(2 * d, d, rng),
          random_matrix(3 * d, d, rng), random_matrix(2 * d, d, rng), random_matrix(2 * d, d, rng)};
}

TEST(RelationUpdate, ZeroWeightsGiveZero) {
  std::mt19937_64 rng(4);
  LayerParams lp{Matrix::Zero(2, 2), Matrix::Zero(4, 2), Matrix::Zero(4, 2), {}, {}, {}};
  const Vector r = relation_update(random_vector(2, rng), random_vector(2, rng), random_vector(2, rng),
                                   random_vector(2, rng), random_vector(2, rng), lp);
  EXPECT_EQ(r, Vector::Zero(2));
}

TEST(RelationUpdate, TextTermCancelsForEqualEndpoints) {
  std::mt19937_64 rng(5);
  const Matrix I = Matrix::Identity(2, 2);
  LayerParams lp{random_matrix(2, 2, rng), stack({I, Matrix(-I)}), Matrix::Zero(4, 2), {}, {}, {}};
  const Vector prev = random_vector(2, rng), t = random_vector(2, rng);
  const Vector r = relation_update(prev, t, t, random_vector(2, rng), random_vector(2, rng), lp);
  EXPECT_TRUE(r.isApprox(row_times(prev, lp.relation_self).cwiseMax(0.0), 1e-14));
}

TEST(RelationUpdate, MatchesScalarOracleAndIsNonnegative) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const LayerParams lp = random_layer(2, rng);
    const Vector prev = random_vector(2, rng), tu = random_vector(2, rng), tv = random_vector(2, rng),
                 iu = random_vector(2, rng), iv = random_vector(2, rng);
    const Vector expected = (row_times(prev, lp.relation_self) + row_times(concat(tu, tv), lp.relation_text) +
                             row_times(concat(iu, iv), lp.relation_image))
                                .cwiseMax(0.0);
    const Vector got = relation_update(prev, tu, tv, iu, iv, lp);
    EXPECT_TRUE(got.isApprox(expected, 1e-13) || (got - expected).norm() < 1e-13);
    EXPECT_GE(got.minCoeff(), 0.0);
  }
}

// ---- entity update ---------------------------------------------------------------------------------

TEST(EntityUpdate, NoNeighborsSelfProjection) {
  const Matrix w = stack({Matrix::Identity(2, 2), Matrix::Zero(4, 2)});
  const Vector e = vec({1.5, -2});
  EXPECT_EQ(entity_update(e, {}, {}, w), e);
}

TEST(EntityUpdate, OneNeighborHandSum) {
  const Matrix I = Matrix::Identity(2, 2);
  const Matrix w = stack({I, I, Matrix::Zero(2, 2)});
  const Vector e = vec({0.5, -1});
  EXPECT_EQ(entity_update(e, {e}, {Vector::Zero(2)}, w), 2 * e);
}

TEST(EntityUpdate, MatchesScalarOracleAndPermutationInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix w = random_matrix(6, 2, rng);
    const Vector e = random_vector(2, rng);
    std::vector<Vector> nb, rel;
    for (int i = 0; i < 3; ++i) {
      nb.push_back(random_vector(2, rng));
      rel.push_back(random_vector(2, rng));
    }
    Vector mean = Vector::Zero(4);
    for (int i = 0; i < 3; ++i) mean += concat(nb[i], rel[i]) / 3.0;
    const Vector expected = row_times(concat(e, mean), w);
    EXPECT_TRUE(entity_update(e, nb, rel, w).isApprox(expected, 1e-13));
    std::swap(nb[0], nb[2]);
    std::swap(rel[0], rel[2]);
    EXPECT_TRUE(entity_update(e, nb, rel, w).isApprox(expected, 1e-13));
  }
}

TEST(AttributeUpdate, Examples) {
  std::mt19937_64 rng(8);
  const Vector a = random_vector(3, rng), e = random_vector(3, rng);
  EXPECT_EQ(attribute_update(a, e, stack({Matrix::Identity(3, 3), Matrix::Zero(3, 3)})), a);
  EXPECT_EQ(attribute_update(Vector::Zero(3), Vector::Zero(3), random_matrix(6, 3, rng)), Vector::Zero(3));
  const Matrix w = random_matrix(6, 3, rng);
  EXPECT_TRUE(attribute_update(a, e, w).isApprox(row_times(concat(a, e), w), 1e-13));
}

// ---- neighbor dropout ------------------------------------------------------------------------------

std::vector<EntityId> iota_ids(std::size_t n) {
  std::vector<EntityId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<EntityId>(i);
  return v;
}

TEST(Dropout, ZeroRateIsIdentityFullRateIsEmpty) {
  const auto nb = iota_ids(50);
  EXPECT_EQ(dropout_neighbors(nb, {0.0, DropoutMode::kDrop, 1}, 50), nb);
  EXPECT_TRUE(dropout_neighbors(nb, {1.0, DropoutMode::kDrop, 1}, 50).empty());
  EXPECT_EQ(dropout_neighbors(nb, {0.7, DropoutMode::kNone, 1}, 50), nb);
  EXPECT_THROW(dropout_neighbors(nb, {1.2, DropoutMode::kDrop, 1}, 50), ConfigError);
}

TEST(Dropout, RetainedFractionWithinBinomialBound) {
  const auto nb = iota_ids(1000);
  std::size_t kept = 0, total = 0;
  for (std::uint64_t owner = 0; owner < 100; ++owner) {
    kept += dropout_neighbors(nb, {0.35, DropoutMode::kDrop, 42}, 1000, static_cast<EntityId>(owner)).size();
    total += nb.size();
  }
  ASSERT_EQ(total, 100000u);
  const double frac = static_cast<double>(kept) / static_cast<double>(total);
  EXPECT_NEAR(frac, 0.65, 3 * std::sqrt(0.35 * 0.65 / 100000.0));
}

TEST(Dropout, ReplaceKeepsCountAndSwapsDropped) {
  const auto nb = iota_ids(200);
  const DropoutConfig cfg{0.5, DropoutMode::kReplace, 3};
  const auto out = dropout_neighbors(nb, cfg, 1000, 0, {0, 5, 1});
  EXPECT_EQ(out.size(), nb.size());
  EXPECT_GT(std::count_if(out.begin(), out.end(), [](EntityId e) { return e >= 200; }), 0);
}

TEST(Dropout, DeterministicPerKey) {
  const auto nb = iota_ids(100);
  const DropoutConfig cfg{0.35, DropoutMode::kDrop, 9};
  const auto a = dropout_neighbors(nb, cfg, 100, 4, {1, 2, 1});
  EXPECT_EQ(dropout_neighbors(nb, cfg, 100, 4, {1, 2, 1}), a);
  EXPECT_NE(dropout_neighbors(nb, cfg, 100, 4, {1, 3, 1}), a);
  EXPECT_NE(dropout_neighbors(nb, cfg, 100, 5, {1, 2, 1}), a);
  EXPECT_NE(dropout_neighbors(nb, cfg, 100, 4, {0, 2, 1}), a);
}

// ---- forward ------------------------------------------------------------------------------------------

struct Instance {
  MultiModalKG kg;
  EncoderInputs in;
  ModelParams params;
};

Instance small_instance(std::uint64_t seed, int d, int layers) {
  std::mt19937_64 rng(seed);
  Instance s;
  // 4 entities: 0-1-2 chain plus a 0-2 edge; 3 isolated. Entity 1 lacks
  // text, entity 3 lacks images.
  s.kg = testing::tiny_kg(4, {{0, 1}, {1, 2}, {2, 0}}, {0, 0, 2, 3}, {0, 1, 2}, 3, rng);
  s.kg.relation_names.push_back("r2");
  s.kg.triples[1].rel = 1;
  const Matrix ent = random_matrix(4, 5, rng), rel = random_matrix(2, 5, rng);
  s.in = make_encoder_inputs(s.kg, ent, rel);
  s.params = init_params({5, 3, 3, d, layers}, seed);
  return s;
}

TEST(Forward, LayerZeroIsInitialState) {
  const Instance s = small_instance(1, 4, 2);
  const GraphState g = forward(s.in, s.params, 0, {});
  EXPECT_EQ(g.layer, 0);
  const ModelParams& p = s.params;
  const UniformTables u = apply_plan(s.kg, s.in.plan, p.proj, p.merge_text, p.merge_image, p.gen_text,
                                     p.gen_image, FeatureTable::from_matrix(s.kg.entity_names, s.in.entity_init));
  for (std::size_t v = 0; v < 4; ++v) {
    const Vector e = entity_init(row_times(s.in.entity_init.row(v).transpose(), p.proj.entity),
                                 u.text.row(v), u.image.row(v), p.init_entity, p.init_text, p.init_image);
    EXPECT_TRUE(g.entity_reps.row(v).transpose().isApprox(e, 1e-12) ||
                (g.entity_reps.row(v).transpose() - e).norm() < 1e-12);
    EXPECT_TRUE(g.text_reps.row(v).transpose().isApprox(u.text.row(v), 1e-12) ||
                (g.text_reps.row(v).transpose() - u.text.row(v)).norm() < 1e-12);
  }
}

// Every intermediate equals the composition of the single-node operators.
TEST(Forward, TwoLayersComposeComponentOracles) {
  const Instance s = small_instance(2, 4, 2);
  const ModelParams& p = s.params;
  const UniformTables u = apply_plan(s.kg, s.in.plan, p.proj, p.merge_text, p.merge_image, p.gen_text,
                                     p.gen_image, FeatureTable::from_matrix(s.kg.entity_names, s.in.entity_init));
  const std::size_t n = 4;
  std::vector<Vector> E(n), T(n), I(n), R(s.kg.triples.size());
  for (std::size_t v = 0; v < n; ++v) {
    T[v] = u.text.row(v);
    I[v] = u.image.row(v);
    E[v] = entity_init(row_times(s.in.entity_init.row(v).transpose(), p.proj.entity), T[v], I[v],
                       p.init_entity, p.init_text, p.init_image);
  }
  for (std::size_t k = 0; k < R.size(); ++k) {
    const Triple& t = s.kg.triples[k];
    R[k] = relation_init(s.in.relation_init.row(t.rel).transpose(), T[t.head], T[t.tail], I[t.head],
                         I[t.tail], p.relation_type, p.relation_text, p.relation_image);
  }
  for (int l = 0; l < 2; ++l) {
    const LayerParams& lp = p.layers[l];
    for (std::size_t k = 0; k < R.size(); ++k) {
      const Triple& t = s.kg.triples[k];
      R[k] = relation_update(R[k], T[t.head], T[t.tail], I[t.head], I[t.tail], lp);
    }
    std::vector<Vector> E2(n), T2(n), I2(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<Vector> nb, rel;
      for (std::size_t k = 0; k < R.size(); ++k) {
        const Triple& t = s.kg.triples[k];
        if (t.head == v) nb.push_back(E[t.tail]), rel.push_back(R[k]);
        if (t.tail == v) nb.push_back(E[t.head]), rel.push_back(R[k]);
      }
      E2[v] = entity_update(E[v], nb, rel, lp.entity_update);
      T2[v] = attribute_update(T[v], E[v], lp.text_update);
      I2[v] = attribute_update(I[v], E[v], lp.image_update);
    }
    E = E2;
    T = T2;
    I = I2;
  }
  const GraphState g = forward(s.in, p, 2, DropoutConfig{0.0, DropoutMode::kNone, 0});
  for (std::size_t v = 0; v < n; ++v) {
    EXPECT_LT((g.entity_reps.row(v).transpose() - E[v]).norm(), 1e-11);
    EXPECT_LT((g.text_reps.row(v).transpose() - T[v]).norm(), 1e-11);
    EXPECT_LT((g.image_reps.row(v).transpose() - I[v]).norm(), 1e-11);
  }
  for (std::size_t k = 0; k < R.size(); ++k) {
    EXPECT_LT((g.relation_reps.row(static_cast<Eigen::Index>(k)).transpose() - R[k]).norm(), 1e-11);
  }
}

TEST(Forward, DeterministicWithoutDropout) {
  const Instance s = small_instance(3, 4, 2);
  EXPECT_EQ(forward(s.in, s.params, 2, {0.0, DropoutMode::kNone, 0}),
            forward(s.in, s.params, 2, {0.0, DropoutMode::kNone, 0}));
}

TEST(Forward, IsolatedEntityUnaffectedByDropout) {
  const Instance s = small_instance(4, 4, 2);
  const GraphState a = forward(s.in, s.params, 2, {0.0, DropoutMode::kDrop, 1});
  const GraphState b = forward(s.in, s.params, 2, {0.9, DropoutMode::kDrop, 1}, {0, 3, 0});
  EXPECT_EQ(a.entity_reps.row(3), b.entity_reps.row(3));
  EXPECT_NE(a.entity_reps.row(0), b.entity_reps.row(0));
}

TEST(Forward, RejectsTooManyLayers) {
  const Instance s = small_instance(5, 4, 1);
  EXPECT_THROW(forward(s.in, s.params, 2, {}), ConfigError);
}

TEST(InitParams, ShapesAndNames) {
  const ModelParams p = init_params({5, 3, 7, 4, 2}, 1);
  EXPECT_EQ(dims_of(p), (ModelDims{5, 3, 7, 4, 2}));
  std::vector<std::string> names;
  visit_params([&](const std::string& n, const Matrix& m) {
    names.push_back(n);
    EXPECT_TRUE(m.allFinite());
  }, p);
  EXPECT_EQ(names.size(), 15u + 2 * 6u);
  EXPECT_EQ(names.front(), "proj.entity");
  EXPECT_EQ(names.back(), "layer2.image_update");
  EXPECT_EQ(p.layers[0].entity_update.rows(), 12);
  EXPECT_EQ(p.merge_text.attention.rows(), 8);
}

}  // namespace
}  // namespace ackmmea
