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

// Ranking evaluation by cosine similarity.
//
// rank = 1 + #{candidates j != t : s_j >= s_t}, so ties count against the
// query and reported metrics are conservative.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ackmmea/checkpoint.hpp"
#include "ackmmea/config.hpp"
#include "ackmmea/consistgnn.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/pipeline.hpp"

namespace ackmmea {

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;
  bool operator==(const Metrics&) const = default;
};

struct GapBucket {
  std::size_t lo = 0;  // inclusive
  std::size_t hi = 0;  // inclusive
  std::size_t count = 0;
  std::optional<Metrics> metrics;  // empty when count == 0
};

struct EvalReport {
  Metrics overall;
  Direction direction = Direction::kLeftToRight;
  std::vector<GapBucket> per_gap_bucket;
};

inline std::size_t rank_from_scores(std::span<const double> scores, std::size_t true_index) {
  if (true_index >= scores.size()) throw std::out_of_range("rank: true index out of range");
  const double s = scores[true_index];
  std::size_t above = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j != true_index && scores[j] >= s) ++above;
  }
  return above + 1;
}

namespace detail {
inline Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}
}  // namespace detail

// Cosine similarities, queries x candidates. Zero rows score 0 against all.
inline Matrix cosine_similarity_matrix(const Matrix& queries, const Matrix& candidates) {
  if (queries.cols() != candidates.cols()) throw std::invalid_argument("similarity: dimension mismatch");
  return detail::normalized_rows(queries) * detail::normalized_rows(candidates).transpose();
}

inline std::size_t rank(const Vector& query, std::span<const Vector> candidates,
                        std::size_t true_index) {
  if (candidates.empty()) throw std::invalid_argument("rank: no candidates");
  std::vector<double> s;
  s.reserve(candidates.size());
  const double nq = query.norm();
  for (const Vector& c : candidates) {
    if (c.size() != query.size()) throw std::invalid_argument("rank: dimension mismatch");
    const double nc = c.norm();
    s.push_back(nq == 0.0 || nc == 0.0 ? 0.0 : query.dot(c) / (nq * nc));
  }
  return rank_from_scores(s, true_index);
}

// Rank of truth[i] in row i of a score matrix.
inline std::vector<std::size_t> ranks_from_matrix(const Matrix& scores,
                                                  std::span<const std::size_t> truth) {
  if (static_cast<std::size_t>(scores.rows()) != truth.size()) {
    throw std::invalid_argument("ranks: one true index per row expected");
  }
  std::vector<std::size_t> out;
  out.reserve(truth.size());
  std::vector<double> row(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) row[j] = scores(i, j);
    out.push_back(rank_from_scores(row, truth[i]));
  }
  return out;
}

inline Metrics metrics_from_ranks(std::span<const std::size_t> ranks) {
  Metrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (std::size_t r : ranks) {
    m.mrr += 1.0 / static_cast<double>(r);
    m.hits1 += r <= 1 ? 1.0 : 0.0;
    m.hits10 += r <= 10 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits10 /= n;
  return m;
}

inline Metrics ranking_metrics(const Matrix& scores, std::span<const std::size_t> truth) {
  return metrics_from_ranks(ranks_from_matrix(scores, truth));
}

// Dropout-free alignment representations of both graphs.
struct Representations {
  Matrix left;
  Matrix right;
};

inline Representations represent(const PreparedPair& data, const ModelParams& params,
                                 const TrainConfig& cfg) {
  Tape t;
  const BoundParams b = bind_params(t, params, false);
  const EncoderOptions opt = encoder_options(cfg, false);
  const EncoderVars l = encode(t, data.left, b, opt);
  const EncoderVars r = encode(t, data.right, b, opt);
  return {t.value(l.output), t.value(r.output)};
}

// Per-pair ranks of the true counterpart for one direction. Queries are the
// `from` entities of `pairs`; candidates are either the `to` entities of all
// pairs (in pair order) or every row of `to_reps`.
inline std::vector<std::size_t> pair_ranks(const Matrix& from_reps, const Matrix& to_reps,
                                           std::span<const SeedPair> pairs, bool from_left,
                                           CandidateSet candidates) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Matrix queries(n, from_reps.cols());
  std::vector<std::size_t> truth(pairs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [l, r] = pairs[i];
    queries.row(i) = from_reps.row(from_left ? l : r);
    truth[i] = candidates == CandidateSet::kAllEntities ? (from_left ? r : l) : static_cast<std::size_t>(i);
  }
  if (candidates == CandidateSet::kAllEntities) {
    return ranks_from_matrix(cosine_similarity_matrix(queries, to_reps), truth);
  }
  Matrix cands(n, to_reps.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [l, r] = pairs[i];
    cands.row(i) = to_reps.row(from_left ? r : l);
  }
  return ranks_from_matrix(cosine_similarity_matrix(queries, cands), truth);
}

namespace detail {
inline Metrics average(const Metrics& a, const Metrics& b) {
  return {(a.mrr + b.mrr) / 2, (a.hits1 + b.hits1) / 2, (a.hits10 + b.hits10) / 2, a.count};
}

// Metrics of a subset of pairs (by index) under the configured direction.
inline Metrics subset_metrics(const std::vector<std::size_t>& lr, const std::vector<std::size_t>& rl,
                              const std::vector<std::size_t>& subset, Direction dir) {
  std::vector<std::size_t> a, b;
  for (std::size_t i : subset) {
    a.push_back(lr[i]);
    if (!rl.empty()) b.push_back(rl[i]);
  }
  const Metrics m = metrics_from_ranks(a);
  return dir == Direction::kBidirectional ? average(m, metrics_from_ranks(b)) : m;
}
}  // namespace detail

// Unit-width buckets [g, g] for g in [0, 24].
inline std::vector<std::pair<std::size_t, std::size_t>> default_gap_buckets() {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t g = 0; g <= 24; ++g) edges.emplace_back(g, g);
  return edges;
}

struct EvalOptions {
  bool gap_buckets = false;
  Modality gap_modality = Modality::kText;
  std::vector<std::pair<std::size_t, std::size_t>> bucket_edges = default_gap_buckets();
};

// Evaluates on the test seeds of `data`. Ranks are computed once over the
// full candidate set; gap buckets regroup those ranks.
inline EvalReport evaluate(const ModelParams& params, const PreparedPair& data,
                           const TrainConfig& cfg, const EvalOptions& eo = {}) {
  const std::vector<SeedPair> pairs = data.seeds.test_pairs();
  if (pairs.empty()) throw ConfigError("evaluation needs at least one test pair");
  const Representations reps = represent(data, params, cfg);
  const auto lr = pair_ranks(reps.left, reps.right, pairs, true, cfg.eval_candidates);
  std::vector<std::size_t> rl;
  if (cfg.direction == Direction::kBidirectional) {
    rl = pair_ranks(reps.right, reps.left, pairs, false, cfg.eval_candidates);
  }
  EvalReport report;
  report.direction = cfg.direction;
  std::vector<std::size_t> all(pairs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  report.overall = detail::subset_metrics(lr, rl, all, cfg.direction);

  if (eo.gap_buckets) {
    const bool text = eo.gap_modality == Modality::kText;
    const auto& lg = text ? data.left_text_count : data.left_image_count;
    const auto& rg = text ? data.right_text_count : data.right_image_count;
    const auto& lo = text ? data.left_image_count : data.left_text_count;
    const auto& ro = text ? data.right_image_count : data.right_text_count;
    for (const auto& [blo, bhi] : eo.bucket_edges) {
      if (blo > bhi) throw ConfigError("gap bucket with lo > hi");
      GapBucket bucket{blo, bhi, 0, std::nullopt};
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [l, r] = pairs[i];
        if (lo.at(l) != ro.at(r)) continue;
        const std::size_t gap = lg.at(l) > rg.at(r) ? lg.at(l) - rg.at(r) : rg.at(r) - lg.at(l);
        if (gap >= blo && gap <= bhi) members.push_back(i);
      }
      bucket.count = members.size();
      if (!members.empty()) bucket.metrics = detail::subset_metrics(lr, rl, members, cfg.direction);
      report.per_gap_bucket.push_back(bucket);
    }
  }
  return report;
}

inline EvalReport evaluate(const Checkpoint& ckpt, const PreparedPair& data, const TrainConfig& cfg,
                           const EvalOptions& eo = {}) {
  check_compatible(ckpt.config, cfg);
  return evaluate(ckpt.params, data, cfg, eo);
}

inline EvalReport gap_bucket_eval(const Checkpoint& ckpt, const PreparedPair& data,
                                  const TrainConfig& cfg, Modality m = Modality::kText,
                                  std::vector<std::pair<std::size_t, std::size_t>> edges =
                                      default_gap_buckets()) {
  EvalOptions eo;
  eo.gap_buckets = true;
  eo.gap_modality = m;
  eo.bucket_edges = std::move(edges);
  return evaluate(ckpt, data, cfg, eo);
}

}  // namespace ackmmea
