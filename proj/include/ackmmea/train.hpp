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

// Training loop: full-graph forward on both sides per mini-batch of train
// seeds, joint loss, AdamW update, early stopping on the monitored loss.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ackmmea/checkpoint.hpp"
#include "ackmmea/config.hpp"
#include "ackmmea/consistgnn.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/loss.hpp"
#include "ackmmea/optimizer.hpp"
#include "ackmmea/pipeline.hpp"
#include "ackmmea/random.hpp"

namespace ackmmea {

struct EpochStats {
  int epoch = 0;         // 1-based
  double loss = 0.0;     // sample-weighted mean train loss
  double monitored = 0;  // value driving early stopping
};

struct TrainResult {
  Checkpoint best;   // lowest monitored loss
  Checkpoint final;  // last epoch run
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochStats&)>;

namespace detail {

inline LossBatch make_batch(std::span<const SeedPair> pairs, std::span<const NegativeSample> negs,
                            const EncoderInputs& right) {
  LossBatch b;
  b.pairs.assign(pairs.begin(), pairs.end());
  b.negatives.assign(negs.begin(), negs.end());
  for (const auto& [l, r] : pairs) b.right_neighbors.push_back(right.neighbors.at(r));
  return b;
}

struct StepOutput {
  double loss = 0.0;
  ModelParams grads;
};

// One forward (and optionally backward) pass over a batch.
inline StepOutput batch_step(const PreparedPair& data, const ModelParams& params,
                             const EncoderOptions& base, const LossSettings& settings,
                             const LossBatch& batch, std::uint64_t step, bool want_grads) {
  Tape t;
  const BoundParams bound = bind_params(t, params, want_grads);
  EncoderOptions opt = base;
  opt.key = {0, step, 0};
  const EncoderVars left = encode(t, data.left, bound, opt);
  opt.key = {1, step, 0};
  const EncoderVars right = encode(t, data.right, bound, opt);
  const LossTerms terms = joint_loss(t, {left.output, left.text, left.image},
                                     {right.output, right.text, right.image}, batch, settings);
  StepOutput out;
  out.loss = t.value(terms.total)(0, 0);
  if (!want_grads || !std::isfinite(out.loss)) return out;
  t.backward(terms.total);
  out.grads = params;
  visit_params([&](const std::string&, Matrix& g, const Var& v) { g = t.grad(v); }, out.grads,
               bound);
  return out;
}

}  // namespace detail

inline TrainResult train(const PreparedPair& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.check();
  std::vector<SeedPair> train_pairs = data.seeds.train_pairs();
  std::vector<SeedPair> holdout_pairs;
  if (cfg.holdout && train_pairs.size() >= 2) {
    Rng rng = make_rng(cfg.seed, "holdout");
    std::shuffle(train_pairs.begin(), train_pairs.end(), rng);
    const auto n_hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(train_pairs.size()))));
    holdout_pairs.assign(train_pairs.end() - static_cast<std::ptrdiff_t>(n_hold), train_pairs.end());
    train_pairs.resize(train_pairs.size() - n_hold);
  }
  if (train_pairs.empty()) throw ConfigError("no training seeds");

  const auto k = static_cast<std::size_t>(cfg.negatives);
  const std::size_t n_left = data.left.n_entities, n_right = data.right.n_entities;
  ModelParams params = init_params(data.dims, cfg.seed, cfg.leaky_slope);
  AdamW opt(params, {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                     cfg.weight_decay});
  const EncoderOptions train_opt = encoder_options(cfg, true);
  const LossSettings settings = loss_settings(cfg);

  std::optional<LossBatch> holdout_batch;
  if (!holdout_pairs.empty()) {
    const auto negs = sample_negatives(holdout_pairs, k, n_left, n_right,
                                       stream_seed(cfg.seed, "holdout"), 0);
    holdout_batch = detail::make_batch(holdout_pairs, negs, data.right);
  }

  auto snapshot = [&](int epoch, const std::vector<double>& history) {
    Checkpoint c;
    c.params = params;
    c.config = cfg;
    c.epoch = epoch;
    c.loss_history = history;
    c.rng_seed = cfg.seed;
    c.steps = static_cast<std::uint64_t>(opt.steps());
    c.left_tables = data.left_tables;
    c.right_tables = data.right_tables;
    return c;
  };

  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t n_batches = (train_pairs.size() + batch_size - 1) / batch_size;
  std::vector<double> history;
  TrainResult result;
  result.best = snapshot(0, history);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<SeedPair> order = train_pairs;
    Rng rng = make_rng(cfg.seed, "batches", {static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), rng);
    const auto negs = sample_negatives(order, k, n_left, n_right, cfg.seed,
                                       static_cast<std::uint64_t>(epoch));
    double total = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * batch_size;
      const std::size_t len = std::min(batch_size, order.size() - lo);
      const LossBatch batch = detail::make_batch(std::span(order).subspan(lo, len),
                                                 std::span(negs).subspan(lo, len), data.right);
      const auto step = static_cast<std::uint64_t>(epoch) * n_batches + b;
      detail::StepOutput out = detail::batch_step(data, params, train_opt, settings, batch, step, true);
      if (!std::isfinite(out.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      opt.step(params, out.grads);
      total += out.loss * static_cast<double>(len);
    }
    const double epoch_loss = total / static_cast<double>(order.size());
    history.push_back(epoch_loss);

    double monitored = epoch_loss;
    if (holdout_batch) {
      monitored = detail::batch_step(data, params, encoder_options(cfg, false), settings,
                                     *holdout_batch, 0, false)
                      .loss;
      if (!std::isfinite(monitored)) {
        throw NumericError("non-finite holdout loss at epoch " + std::to_string(epoch + 1));
      }
    }
    if (on_epoch) on_epoch({epoch + 1, epoch_loss, monitored});
    if (monitored < best) {
      best = monitored;
      since_best = 0;
      result.best = snapshot(epoch + 1, history);
    } else if (++since_best >= cfg.early_stop_patience) {
      result.stopped_early = true;
      break;
    }
  }
  result.final = snapshot(static_cast<int>(history.size()), history);
  return result;
}

}  // namespace ackmmea
