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

// Dropout-rate sweep and ablation harness over one prepared pair. Each run
// trains from scratch with the same seed; only the varied setting differs.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ackmmea/config.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/evaluate.hpp"
#include "ackmmea/pipeline.hpp"
#include "ackmmea/train.hpp"

namespace ackmmea {

struct SweepRow {
  double rho = 0.0;
  EvalReport report;
};

// Evaluates the final checkpoint of each run.
inline std::vector<SweepRow> sweep_dropout(const PreparedPair& data, const TrainConfig& cfg,
                                           const std::vector<double>& rho_values) {
  std::vector<SweepRow> rows;
  for (double rho : rho_values) {
    TrainConfig c = cfg;
    c.rho = rho;
    const TrainResult r = train(data, c);
    rows.push_back({rho, evaluate(r.final, data, c)});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os.precision(6);
  os << "rho,mrr,hits1,hits10\n";
  for (const auto& r : rows) {
    os << r.rho << ',' << r.report.overall.mrr << ',' << r.report.overall.hits1 << ','
       << r.report.overall.hits10 << '\n';
  }
}

inline const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names = {
      "full",          "no_uniformization", "no_merge",     "no_generate",
      "no_text",       "no_image",          "no_dropout",   "random_replacement",
      "no_attr_loss",  "no_neighbor_loss",  "margin_mode",
  };
  return names;
}

// cfg with the named variant switched on.
inline TrainConfig apply_variant(TrainConfig cfg, std::string_view name) {
  if (name == "full") return cfg;
  if (name == "no_dropout") {
    cfg.dropout_mode = DropoutMode::kNone;
    return cfg;
  }
  if (name == "random_replacement") {
    cfg.dropout_mode = DropoutMode::kReplace;
    return cfg;
  }
  for (const auto& v : ablation_variants()) {
    if (v == name) {
      set_config_value(cfg, v, "true");
      return cfg;
    }
  }
  throw ConfigError("unknown ablation variant '" + std::string(name) + "'");
}

struct AblationRow {
  std::string variant;
  EvalReport report;
  Metrics delta;  // variant minus full
};

inline std::vector<AblationRow> ablate(const PreparedPair& data, const TrainConfig& cfg,
                                       const std::vector<std::string>& variants) {
  std::vector<TrainConfig> configs;
  for (const auto& v : variants) configs.push_back(apply_variant(cfg, v));  // validate names first
  auto run = [&](const TrainConfig& c) { return evaluate(train(data, c).final, data, c); };
  const EvalReport full = run(cfg);
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    AblationRow row;
    row.variant = variants[i];
    row.report = variants[i] == "full" ? full : run(configs[i]);
    const Metrics& m = row.report.overall;
    row.delta = {m.mrr - full.overall.mrr, m.hits1 - full.overall.hits1,
                 m.hits10 - full.overall.hits10, m.count};
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os.precision(6);
  os << "variant,mrr,hits1,hits10,delta_mrr,delta_hits1,delta_hits10\n";
  for (const auto& r : rows) {
    const Metrics& m = r.report.overall;
    os << r.variant << ',' << m.mrr << ',' << m.hits1 << ',' << m.hits10 << ',' << r.delta.mrr << ','
       << r.delta.hits1 << ',' << r.delta.hits10 << '\n';
  }
}

inline void write_gap_csv(std::ostream& os, const EvalReport& report) {
  os.precision(6);
  os << "bucket_lo,bucket_hi,count,mrr,hits1,hits10\n";
  for (const auto& b : report.per_gap_bucket) {
    os << b.lo << ',' << b.hi << ',' << b.count;
    if (b.metrics) {
      os << ',' << b.metrics->mrr << ',' << b.metrics->hits1 << ',' << b.metrics->hits10 << '\n';
    } else {
      os << ",,,\n";
    }
  }
}

}  // namespace ackmmea
