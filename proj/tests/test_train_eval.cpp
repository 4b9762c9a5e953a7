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
#include <numeric>
#include <random>
#include <sstream>

#include "ackmmea/experiments.hpp"
#include "ackmmea/synthetic.hpp"
#include "test_util.hpp"

namespace ackmmea {
namespace {

using testing::random_matrix;

// ---- ranking ------------------------------------------------------------------------------------

TEST(Rank, UniqueMaximumAndTies) {
  const std::vector<double> s = {0.9, 0.1, 0.3};
  EXPECT_EQ(rank_from_scores(s, 0), 1u);
  EXPECT_EQ(rank_from_scores(s, 1), 3u);
  const std::vector<double> tie = {0.5, 0.5, 0.1};
  EXPECT_EQ(rank_from_scores(tie, 0), 2u);
  EXPECT_EQ(rank_from_scores(tie, 1), 2u);
  EXPECT_THROW(rank_from_scores(s, 3), std::out_of_range);
}

TEST(Rank, VectorCandidates) {
  const Vector q = Vector::Unit(2, 0);
  const std::vector<Vector> c = {Vector::Unit(2, 1), 3.0 * Vector::Unit(2, 0)};
  EXPECT_EQ(rank(q, c, 1), 1u);
  EXPECT_EQ(rank(q, c, 0), 2u);
}

TEST(Metrics, Examples) {
  const std::vector<std::size_t> first = {1, 1, 1};
  const Metrics a = metrics_from_ranks(first);
  EXPECT_EQ(a.mrr, 1.0);
  EXPECT_EQ(a.hits1, 1.0);
  EXPECT_EQ(a.hits10, 1.0);
  const std::vector<std::size_t> second = {2, 2};
  const Metrics b = metrics_from_ranks(second);
  EXPECT_EQ(b.mrr, 0.5);
  EXPECT_EQ(b.hits1, 0.0);
  EXPECT_EQ(b.hits10, 1.0);
  const std::vector<std::size_t> mixed = {1, 11};
  EXPECT_NEAR(metrics_from_ranks(mixed).mrr, (1.0 + 1.0 / 11) / 2, 1e-15);
  EXPECT_EQ(metrics_from_ranks(mixed).hits10, 0.5);
}

// Rank by sorting candidates by descending score and placing the true one
// after every tied competitor.
std::size_t sorted_rank(const std::vector<double>& s, std::size_t t) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return a != t && b == t;
  });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), t) - order.begin()) + 1;
}

TEST(Rank, AgreesWithSortingOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix scores = random_matrix(12, 12, rng);
    if (trial % 2) scores = scores.unaryExpr([&](double) { return double(coarse(rng)); });
    std::vector<std::size_t> truth(12);
    for (auto& t : truth) t = std::uniform_int_distribution<std::size_t>(0, 11)(rng);
    const auto ranks = ranks_from_matrix(scores, truth);
    for (Eigen::Index i = 0; i < 12; ++i) {
      std::vector<double> row(scores.row(i).begin(), scores.row(i).end());
      EXPECT_EQ(ranks[i], sorted_rank(row, truth[i]));
    }
  }
}

TEST(Rank, InvariantToCandidatePermutationAndPositiveRescaling) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix q = random_matrix(8, 5, rng);
    const Matrix c = random_matrix(8, 5, rng);
    std::vector<std::size_t> truth(8);
    std::iota(truth.begin(), truth.end(), std::size_t{0});
    const auto base = ranks_from_matrix(cosine_similarity_matrix(q, c), truth);

    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix cp(8, 5);
    std::vector<std::size_t> truth_p(8);
    for (std::size_t j = 0; j < 8; ++j) cp.row(static_cast<Eigen::Index>(perm[j])) = c.row(j);
    for (std::size_t i = 0; i < 8; ++i) truth_p[i] = perm[truth[i]];
    EXPECT_EQ(ranks_from_matrix(cosine_similarity_matrix(q, cp), truth_p), base);

    Matrix scaled = c;
    for (Eigen::Index j = 0; j < 8; ++j) scaled.row(j) *= 0.1 + 3.0 * std::abs(q(j % 8, 0));
    EXPECT_EQ(ranks_from_matrix(cosine_similarity_matrix(2.5 * q, scaled), truth), base);
  }
}

TEST(PairRanks, CandidateSets) {
  Matrix left(3, 2), right(4, 2);
  left << 1, 0, 0, 1, 1, 1;
  right << 1, 1, 1, 0, 0, 2, -1, 0;
  const std::vector<SeedPair> pairs = {{0, 1}, {1, 0}};
  EXPECT_EQ(pair_ranks(left, right, pairs, true, CandidateSet::kTestCounterparts),
            (std::vector<std::size_t>{1, 1}));
  // Right row 2 is not a test counterpart but beats row 0 for query (0,1).
  EXPECT_EQ(pair_ranks(left, right, pairs, true, CandidateSet::kAllEntities),
            (std::vector<std::size_t>{1, 2}));
  // Query (1,1) ties its counterpart (0,1) with left row 0 and loses to row 2.
  EXPECT_EQ(pair_ranks(right, left, pairs, false, CandidateSet::kAllEntities),
            (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(pair_ranks(right, left, pairs, false, CandidateSet::kTestCounterparts),
            (std::vector<std::size_t>{1, 2}));
}

// ---- small training fixtures -------------------------------------------------------------------

TrainConfig small_config() {
  TrainConfig c;
  c.d = 6;
  c.transe_dim = 6;
  c.transe_epochs = 5;
  c.epochs = 4;
  c.batch_size = 8;
  c.negatives = 3;
  c.learning_rate = 0.01;
  c.train_fraction = 0.5;
  c.seed = 3;
  return c;
}

PreparedPair small_pair(const TrainConfig& cfg, std::uint64_t seed = 1) {
  SyntheticConfig sc;
  sc.n_entities = 24;
  sc.text_dim = 5;
  sc.image_dim = 4;
  sc.gap_level = 2;
  sc.rng_seed = seed;
  const SyntheticPair p = generate_synthetic(sc);
  return prepare_pair(p.kg1, p.kg2, split_seeds(p.seeds, cfg.train_fraction, cfg.seed), cfg);
}

std::string checkpoint_text(const Checkpoint& c) {
  std::ostringstream os;
  write_checkpoint(os, c);
  return os.str();
}

TEST(Train, TwinGraphLossDecreases) {
  std::mt19937_64 rng(13);
  const MultiModalKG kg = testing::tiny_kg(2, {{0, 1}}, {0, 1}, {0}, 3, rng);
  AlignmentSeedSet seeds;
  seeds.pairs = {{0, 0}, {1, 1}};
  seeds.train = {0};
  seeds.test = {1};
  TrainConfig cfg = small_config();
  cfg.negatives = 1;
  cfg.epochs = 50;
  cfg.rho = 0.0;
  const PreparedPair data = prepare_pair(kg, kg, seeds, cfg);
  std::vector<double> losses;
  const TrainResult r = train(data, cfg, [&](const EpochStats& s) { losses.push_back(s.loss); });
  ASSERT_EQ(losses.size(), 50u);
  EXPECT_LT(losses.back(), losses.front());
  EXPECT_EQ(r.final.loss_history, losses);
  EXPECT_EQ(r.final.epoch, 50);
}

TEST(Train, DeterministicForFixedSeed) {
  const TrainConfig cfg = small_config();
  const PreparedPair data = small_pair(cfg);
  const TrainResult a = train(data, cfg), b = train(data, cfg);
  EXPECT_EQ(a.final.loss_history, b.final.loss_history);
  EXPECT_EQ(checkpoint_text(a.final), checkpoint_text(b.final));
  EXPECT_EQ(checkpoint_text(a.best), checkpoint_text(b.best));
  TrainConfig other = cfg;
  other.seed = 4;
  EXPECT_NE(train(data, other).final.loss_history, a.final.loss_history);
}

TEST(Train, ZeroLossWeightsLeaveParametersUnchanged) {
  TrainConfig cfg = small_config();
  cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = 0.0;
  cfg.weight_decay = 0.0;
  const PreparedPair data = small_pair(cfg);
  const TrainResult r = train(data, cfg);
  const ModelParams init = init_params(data.dims, cfg.seed, cfg.leaky_slope);
  visit_params([](const std::string& name, const Matrix& a, const Matrix& b) { EXPECT_EQ(a, b) << name; },
               init, r.final.params);
  for (double l : r.final.loss_history) EXPECT_EQ(l, 0.0);
}

TEST(Train, EarlyStoppingAndBestCheckpoint) {
  TrainConfig cfg = small_config();
  cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = 0.0;
  cfg.epochs = 20;
  cfg.early_stop_patience = 3;
  const PreparedPair data = small_pair(cfg);
  const TrainResult r = train(data, cfg);
  // Constant zero loss: the first epoch stays best and three more end the run.
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.final.epoch, 4);
  EXPECT_EQ(r.best.epoch, 1);
}

TEST(Train, HoldoutMonitoringRuns) {
  TrainConfig cfg = small_config();
  cfg.holdout = true;
  const PreparedPair data = small_pair(cfg);
  std::vector<EpochStats> stats;
  const TrainResult r = train(data, cfg, [&](const EpochStats& s) { stats.push_back(s); });
  ASSERT_FALSE(stats.empty());
  const auto best = std::min_element(stats.begin(), stats.end(), [](const auto& a, const auto& b) {
    return a.monitored < b.monitored;
  });
  EXPECT_EQ(r.best.epoch, best->epoch);
}

TEST(Train, NegativesMustFit) {
  TrainConfig cfg = small_config();
  cfg.negatives = 24;
  const PreparedPair data = small_pair(small_config());
  EXPECT_THROW(train(data, cfg), ConfigError);
}

// ---- checkpoints ----------------------------------------------------------------------------------

TEST(Checkpoint, RoundTripIsExact) {
  const TrainConfig cfg = small_config();
  const PreparedPair data = small_pair(cfg);
  const Checkpoint c = train(data, cfg).final;
  const std::string text = checkpoint_text(c);
  std::istringstream is(text);
  const Checkpoint back = read_checkpoint(is, "memory");
  EXPECT_EQ(checkpoint_text(back), text);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.loss_history, c.loss_history);
  EXPECT_EQ(back.left_tables, c.left_tables);
  visit_params([](const std::string& name, const Matrix& a, const Matrix& b) { EXPECT_EQ(a, b) << name; },
               c.params, back.params);
  const Representations x = represent(data, c.params, cfg), y = represent(data, back.params, cfg);
  EXPECT_EQ(x.left, y.left);
  EXPECT_EQ(x.right, y.right);
  EXPECT_EQ(evaluate(back, data, cfg).overall, evaluate(c, data, cfg).overall);
}

TEST(Checkpoint, FileRoundTripAndErrors) {
  const TrainConfig cfg = small_config();
  const Checkpoint c = train(small_pair(cfg), cfg).final;
  testing::TempDir dir("ckpt");
  save_checkpoint(dir.file("model.ckpt"), c);
  EXPECT_EQ(checkpoint_text(load_checkpoint(dir.file("model.ckpt"))), checkpoint_text(c));
  EXPECT_THROW(load_checkpoint(dir.file("missing.ckpt")), IoError);
  std::istringstream junk("not a checkpoint");
  EXPECT_THROW(read_checkpoint(junk, "junk"), ConfigError);
  std::string cut = checkpoint_text(c);
  cut.resize(cut.size() / 2);
  std::istringstream truncated(cut);
  EXPECT_THROW(read_checkpoint(truncated, "cut"), ConfigError);
}

TEST(Checkpoint, CompatibilityCheck) {
  TrainConfig a = small_config(), b = small_config();
  EXPECT_NO_THROW(check_compatible(a, b));
  b.epochs = 99;
  b.rho = 0.1;
  EXPECT_NO_THROW(check_compatible(a, b));
  b.d = 7;
  try {
    check_compatible(a, b);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("d (6 vs 7)"), std::string::npos) << e.what();
  }
  b = a;
  b.layers = 3;
  EXPECT_THROW(check_compatible(a, b), ConfigError);
}

// ---- evaluation --------------------------------------------------------------------------------------

TEST(Evaluate, BidirectionalAveragesDirections) {
  TrainConfig cfg = small_config();
  const PreparedPair data = small_pair(cfg);
  const Checkpoint c = train(data, cfg).final;
  const Representations reps = represent(data, c.params, cfg);
  const auto pairs = data.seeds.test_pairs();
  const Metrics lr = metrics_from_ranks(pair_ranks(reps.left, reps.right, pairs, true, cfg.eval_candidates));
  const Metrics rl = metrics_from_ranks(pair_ranks(reps.right, reps.left, pairs, false, cfg.eval_candidates));
  EXPECT_EQ(evaluate(c, data, cfg).overall, lr);
  cfg.direction = Direction::kBidirectional;
  const Metrics both = evaluate(c, data, cfg).overall;
  EXPECT_DOUBLE_EQ(both.mrr, (lr.mrr + rl.mrr) / 2);
  EXPECT_DOUBLE_EQ(both.hits1, (lr.hits1 + rl.hits1) / 2);
  EXPECT_EQ(both.count, pairs.size());
}

TEST(Evaluate, EmptyTestSetRejected) {
  TrainConfig cfg = small_config();
  PreparedPair data = small_pair(cfg);
  data.seeds.test.clear();
  EXPECT_THROW(evaluate(init_params(data.dims, 0, cfg.leaky_slope), data, cfg), ConfigError);
}

TEST(GapBuckets, CountsMatchRawAttributeGaps) {
  const TrainConfig cfg = small_config();
  SyntheticConfig sc;
  sc.n_entities = 40;
  sc.text_dim = 5;
  sc.image_dim = 4;
  sc.gap_level = 3;
  sc.image_gap_level = 0;
  sc.rng_seed = 9;
  const SyntheticPair p = generate_synthetic(sc);
  const PreparedPair data = prepare_pair(p.kg1, p.kg2, split_seeds(p.seeds, 0.5, 2), cfg);
  const Checkpoint c = train(data, cfg).final;

  const std::vector<std::pair<std::size_t, std::size_t>> edges = {{0, 0}, {1, 2}, {3, 10}};
  const EvalReport rep = gap_bucket_eval(c, data, cfg, Modality::kText, edges);
  ASSERT_EQ(rep.per_gap_bucket.size(), 3u);
  std::vector<std::size_t> expected(3, 0);
  for (const SeedPair& pr : data.seeds.test_pairs()) {
    if (attribute_gap(p.kg1, p.kg2, pr, Modality::kImage) != 0) continue;
    const std::size_t g = attribute_gap(p.kg1, p.kg2, pr, Modality::kText);
    for (std::size_t b = 0; b < 3; ++b) {
      if (g >= edges[b].first && g <= edges[b].second) ++expected[b];
    }
  }
  std::size_t total = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_EQ(rep.per_gap_bucket[b].count, expected[b]) << b;
    EXPECT_EQ(rep.per_gap_bucket[b].metrics.has_value(), expected[b] > 0);
    total += expected[b];
  }
  EXPECT_GT(total, 0u);

  std::ostringstream csv;
  write_gap_csv(csv, rep);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "bucket_lo,bucket_hi,count,mrr,hits1,hits10");
  EXPECT_THROW(gap_bucket_eval(c, data, cfg, Modality::kText, {{2, 1}}), ConfigError);
}

// ---- experiments -------------------------------------------------------------------------------------

TEST(Sweep, SingleRateMatchesPlainRun) {
  TrainConfig cfg = small_config();
  const PreparedPair data = small_pair(cfg);
  const auto rows = sweep_dropout(data, cfg, {0.0});
  ASSERT_EQ(rows.size(), 1u);
  cfg.rho = 0.0;
  EXPECT_EQ(rows[0].report.overall, evaluate(train(data, cfg).final, data, cfg).overall);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "rho,mrr,hits1,hits10");
}

TEST(Ablation, VariantsMapToConfig) {
  const TrainConfig base = small_config();
  EXPECT_EQ(apply_variant(base, "full"), base);
  EXPECT_TRUE(apply_variant(base, "no_image").no_image);
  EXPECT_EQ(apply_variant(base, "no_neighbor_loss").loss_weights().lambda3, 0.0);
  EXPECT_EQ(apply_variant(base, "no_attr_loss").loss_weights().lambda2, 0.0);
  EXPECT_EQ(apply_variant(base, "no_dropout").dropout_mode, DropoutMode::kNone);
  EXPECT_EQ(apply_variant(base, "random_replacement").dropout_mode, DropoutMode::kReplace);
  EXPECT_TRUE(apply_variant(base, "margin_mode").margin_mode);
  for (const auto& v : ablation_variants()) EXPECT_NO_THROW(apply_variant(base, v)) << v;
  EXPECT_THROW(apply_variant(base, "no_everything"), ConfigError);
  const PreparedPair data = small_pair(base);
  EXPECT_THROW(ablate(data, base, {"full", "bogus"}), ConfigError);
}

TEST(Ablation, NoImageZeroesUniformImageFeatures) {
  const TrainConfig cfg = apply_variant(small_config(), "no_image");
  const PreparedPair data = small_pair(cfg);
  Tape t;
  ModelParams params = init_params(data.dims, 1, cfg.leaky_slope);
  params.layers.clear();
  const EncoderVars v = encode(t, data.left, bind_params(t, params, false), encoder_options(cfg, false));
  EXPECT_EQ(t.value(v.image).norm(), 0.0);
  EXPECT_GT(t.value(v.text).norm(), 0.0);
  EXPECT_FALSE(loss_settings(cfg).image);
}

TEST(Ablation, RowsCarryDeltas) {
  TrainConfig cfg = small_config();
  cfg.epochs = 2;
  const PreparedPair data = small_pair(cfg);
  const auto rows = ablate(data, cfg, {"full", "no_text"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].delta.mrr, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].delta.mrr, rows[1].report.overall.mrr - rows[0].report.overall.mrr);
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

}  // namespace
}  // namespace ackmmea
