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

#include <random>

#include "ackmmea/tape.hpp"
#include "test_util.hpp"

namespace ackmmea {
namespace {

using testing::grad_check;
using testing::random_matrix;

TEST(Tape, MatmulValueAndGradient) {
  Tape t;
  Matrix a(1, 2), b(2, 1);
  a << 1, 2;
  b << 3, 4;
  const Var va = t.parameter(a), vb = t.parameter(b);
  const Var y = t.matmul(va, vb);
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0), 11.0);
  t.backward(y);
  EXPECT_EQ(t.grad(va), b.transpose());
  EXPECT_EQ(t.grad(vb), a.transpose());
}

TEST(Tape, ConstantsCarryNoGradient) {
  Tape t;
  const Var c = t.constant(Matrix::Ones(2, 2));
  const Var p = t.parameter(Matrix::Ones(2, 2));
  const Var y = t.sum(t.matmul(c, p));
  t.backward(y);
  EXPECT_FALSE(t.requires_grad(c));
  EXPECT_TRUE(t.requires_grad(y));
  EXPECT_EQ(t.grad(c), Matrix::Zero(2, 2));
}

TEST(Tape, BackwardNeedsScalarRoot) {
  Tape t;
  const Var p = t.parameter(Matrix::Ones(2, 1));
  EXPECT_THROW(t.backward(p), std::invalid_argument);
}

TEST(Tape, SegmentOpsValues) {
  Tape t;
  Matrix a(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  const Var v = t.constant(a);
  Matrix sum_expected(3, 2);
  sum_expected << 4, 6, 5, 6, 0, 0;
  EXPECT_EQ(t.value(t.segment_sum(v, {0, 0, 1}, 3)), sum_expected);
  Matrix mean_expected(3, 2);
  mean_expected << 2, 3, 5, 6, 0, 0;
  EXPECT_EQ(t.value(t.segment_mean(v, {0, 0, 1}, 3)), mean_expected);

  Matrix s(3, 1);
  s << 0.0, std::log(3.0), 7.0;
  const Matrix soft = t.value(t.segment_softmax(t.constant(s), {0, 0, 1}, 2));
  EXPECT_NEAR(soft(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(soft(1, 0), 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(soft(2, 0), 1.0);
}

TEST(Tape, GatherAndConcat) {
  Tape t;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Var v = t.constant(a);
  Matrix g(3, 2);
  g << 3, 4, 1, 2, 3, 4;
  EXPECT_EQ(t.value(t.gather_rows(v, {1, 0, 1})), g);
  EXPECT_EQ(t.value(t.concat_cols({v, v})).cols(), 4);
  const Var parts[] = {v, v};
  EXPECT_EQ(t.value(t.concat_rows(parts)).rows(), 4);
}

TEST(Tape, RowwiseCosineOfZeroRowIsZero) {
  Tape t;
  Matrix a(2, 2), b(2, 2);
  a << 0, 0, 1, 0;
  b << 1, 1, 2, 0;
  const Matrix c = t.value(t.rowwise_cosine(t.constant(a), t.constant(b)));
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 1.0);
}

TEST(Tape, KinkMarginTracksSmallestReluInput) {
  Tape t;
  Matrix a(1, 3);
  a << 0.5, -0.01, 2.0;
  t.relu(t.constant(a));
  EXPECT_DOUBLE_EQ(t.min_kink_margin(), 0.01);
}

// ---- finite-difference checks per op ----------------------------------------------

class TapeGradient : public ::testing::Test {
 protected:
  std::mt19937_64 rng{17};
  void expect_ok(const testing::ScalarFn& f, std::vector<Matrix> inputs) {
    const auto r = grad_check(f, std::move(inputs));
    ASSERT_GT(r.entries, 0u);
    EXPECT_LT(r.max_rel_error, 1e-6);
  }
};

TEST_F(TapeGradient, MatmulAddSubScale) {
  expect_ok(
      [](Tape& t, const std::vector<Var>& v) {
        const Var m = t.matmul(v[0], v[1]);
        return t.sum(t.add_scalar(t.scale(t.sub(t.add(m, v[2]), v[2]), 1.5), 0.3));
      },
      {random_matrix(3, 4, rng), random_matrix(4, 2, rng), random_matrix(3, 2, rng)});
}

TEST_F(TapeGradient, PiecewiseLinearAwayFromKinks) {
  Matrix a = random_matrix(4, 3, rng);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a.data()[i]) < 0.1) a.data()[i] = 0.5;
  }
  expect_ok([](Tape& t, const std::vector<Var>& v) { return t.sum(t.relu(v[0])); }, {a});
  expect_ok([](Tape& t, const std::vector<Var>& v) { return t.sum(t.leaky_relu(v[0], 0.2)); }, {a});
  expect_ok([](Tape& t, const std::vector<Var>& v) { return t.sum(t.abs(v[0])); }, {a});
}

TEST_F(TapeGradient, ExpLogMean) {
  Matrix a = random_matrix(3, 3, rng, 0.5);
  expect_ok([](Tape& t, const std::vector<Var>& v) { return t.mean(t.log(t.add_scalar(t.exp(v[0]), 1.0))); },
            {a});
}

TEST_F(TapeGradient, StructuralOps) {
  expect_ok(
      [](Tape& t, const std::vector<Var>& v) {
        const Var g = t.gather_rows(v[0], {2, 0, 2, 1});
        const Var c = t.concat_cols({g, v[1]});
        const Var parts[] = {c, c};
        const Var r = t.concat_rows(parts);
        return t.sum(t.matmul(r, t.constant(Matrix::Ones(5, 1))));
      },
      {random_matrix(3, 2, rng), random_matrix(4, 3, rng)});
}

TEST_F(TapeGradient, SegmentOps) {
  const std::vector<int> seg = {0, 2, 2, 0, 2};
  expect_ok(
      [&](Tape& t, const std::vector<Var>& v) {
        const Var s = t.segment_sum(v[0], seg, 4);
        const Var m = t.segment_mean(v[0], seg, 4);
        const Var w = t.mean_rows(v[0]);
        return t.add(t.sum(t.exp(t.scale(s, 0.3))),
                     t.add(t.sum(t.exp(t.scale(m, 0.7))), t.sum(t.exp(w))));
      },
      {random_matrix(5, 2, rng)});
}

TEST_F(TapeGradient, SegmentSoftmaxAndRowScale) {
  const std::vector<int> seg = {1, 0, 1, 1, 0};
  expect_ok(
      [&](Tape& t, const std::vector<Var>& v) {
        const Var alpha = t.segment_softmax(v[0], seg, 2);
        return t.sum(t.exp(t.segment_sum(t.row_scale(v[1], alpha), seg, 2)));
      },
      {random_matrix(5, 1, rng), random_matrix(5, 3, rng)});
}

TEST_F(TapeGradient, RowwiseCosine) {
  expect_ok(
      [](Tape& t, const std::vector<Var>& v) {
        return t.sum(t.exp(t.rowwise_cosine(v[0], v[1])));
      },
      {random_matrix(4, 3, rng), random_matrix(4, 3, rng)});
}

TEST_F(TapeGradient, ReusedNodesAccumulate) {
  expect_ok(
      [](Tape& t, const std::vector<Var>& v) {
        const Var x = t.matmul(v[0], v[0]);
        return t.sum(t.add(x, t.matmul(x, v[0])));
      },
      {random_matrix(3, 3, rng, 0.5)});
}

}  // namespace
}  // namespace ackmmea
