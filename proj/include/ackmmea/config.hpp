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

// Training configuration and its flat key=value text form.
//
//   # comment
//   epochs = 200
//   no_image = true
//
// Every field is addressable by its key; unknown keys are errors. Precedence
// when layering sources: defaults < file < explicit overrides.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ackmmea/consistgnn.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/loss.hpp"

namespace ackmmea {

enum class CandidateSet { kTestCounterparts, kAllEntities };
enum class Direction { kLeftToRight, kBidirectional };
enum class RepresentationMode { kLastLayer, kConcatLayers };

struct TrainConfig {
  int d = 128;
  int layers = 2;
  int epochs = 200;
  int batch_size = 512;
  double learning_rate = 0.001;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double rho = 0.35;
  double tau = 0.5;
  double lambda1 = 5.0;
  double lambda2 = 3.0;
  double lambda3 = 2.0;
  int negatives = 15;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  int early_stop_patience = 100;
  bool holdout = false;  // monitor 5% of train seeds instead of train loss
  double leaky_slope = 0.2;

  // ablations
  bool no_uniformization = false;
  bool no_merge = false;
  bool no_generate = false;
  bool no_text = false;
  bool no_image = false;
  DropoutMode dropout_mode = DropoutMode::kDrop;
  bool no_attr_loss = false;
  bool no_neighbor_loss = false;
  bool margin_mode = false;
  double margin = 1.0;

  CandidateSet eval_candidates = CandidateSet::kTestCounterparts;
  Direction direction = Direction::kLeftToRight;
  RepresentationMode representation = RepresentationMode::kLastLayer;

  // entity/relation pre-training
  int transe_dim = 128;
  int transe_epochs = 100;
  double transe_lr = 0.01;
  double transe_margin = 1.0;
  int transe_negatives = 1;

  bool operator==(const TrainConfig&) const = default;

  LossWeights loss_weights() const {
    return {lambda1, no_attr_loss ? 0.0 : lambda2, no_neighbor_loss ? 0.0 : lambda3, tau};
  }

  DropoutConfig dropout() const { return {rho, dropout_mode, seed}; }

  void check() const {
    auto positive = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string(what) + " must be positive");
    };
    positive(d > 0, "d");
    positive(layers >= 0, "layers (non-negative)");
    positive(epochs >= 0, "epochs (non-negative)");
    positive(batch_size > 0, "batch_size");
    positive(learning_rate > 0, "learning_rate");
    positive(weight_decay >= 0, "weight_decay (non-negative)");
    positive(tau > 0, "tau");
    positive(negatives > 0, "negatives");
    positive(early_stop_patience > 0, "early_stop_patience");
    positive(transe_dim > 0 && transe_epochs >= 0 && transe_lr > 0 && transe_margin > 0 &&
                 transe_negatives > 0,
             "transe settings");
    if (!(rho >= 0 && rho <= 1)) throw ConfigError("rho must lie in [0,1]");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train_fraction must lie in (0,1)");
    if (!(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_eps > 0)) {
      throw ConfigError("adam settings out of range");
    }
    if (!(leaky_slope > 0 && leaky_slope < 1)) throw ConfigError("leaky_slope must lie in (0,1)");
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) throw ConfigError("lambdas must be >= 0");
  }
};

namespace detail {

template <typename E>
struct EnumField {
  E TrainConfig::*member;
  std::vector<std::pair<std::string_view, E>> names;
};

using FieldRef =
    std::variant<int TrainConfig::*, double TrainConfig::*, bool TrainConfig::*,
                 std::uint64_t TrainConfig::*, EnumField<DropoutMode>, EnumField<CandidateSet>,
                 EnumField<Direction>, EnumField<RepresentationMode>>;

struct Field {
  std::string_view key;
  FieldRef ref;
};

inline const std::vector<Field>& config_fields() {
  static const std::vector<Field> fields = {
      {"d", &TrainConfig::d},
      {"layers", &TrainConfig::layers},
      {"epochs", &TrainConfig::epochs},
      {"batch_size", &TrainConfig::batch_size},
      {"learning_rate", &TrainConfig::learning_rate},
      {"weight_decay", &TrainConfig::weight_decay},
      {"adam_beta1", &TrainConfig::adam_beta1},
      {"adam_beta2", &TrainConfig::adam_beta2},
      {"adam_eps", &TrainConfig::adam_eps},
      {"rho", &TrainConfig::rho},
      {"tau", &TrainConfig::tau},
      {"lambda1", &TrainConfig::lambda1},
      {"lambda2", &TrainConfig::lambda2},
      {"lambda3", &TrainConfig::lambda3},
      {"negatives", &TrainConfig::negatives},
      {"train_fraction", &TrainConfig::train_fraction},
      {"seed", &TrainConfig::seed},
      {"early_stop_patience", &TrainConfig::early_stop_patience},
      {"holdout", &TrainConfig::holdout},
      {"leaky_slope", &TrainConfig::leaky_slope},
      {"no_uniformization", &TrainConfig::no_uniformization},
      {"no_merge", &TrainConfig::no_merge},
      {"no_generate", &TrainConfig::no_generate},
      {"no_text", &TrainConfig::no_text},
      {"no_image", &TrainConfig::no_image},
      {"dropout_mode", EnumField<DropoutMode>{&TrainConfig::dropout_mode,
                                              {{"drop", DropoutMode::kDrop},
                                               {"replace", DropoutMode::kReplace},
                                               {"none", DropoutMode::kNone}}}},
      {"no_attr_loss", &TrainConfig::no_attr_loss},
      {"no_neighbor_loss", &TrainConfig::no_neighbor_loss},
      {"margin_mode", &TrainConfig::margin_mode},
      {"margin", &TrainConfig::margin},
      {"eval_candidates", EnumField<CandidateSet>{&TrainConfig::eval_candidates,
                                                  {{"test_counterparts", CandidateSet::kTestCounterparts},
                                                   {"all_entities", CandidateSet::kAllEntities}}}},
      {"direction", EnumField<Direction>{&TrainConfig::direction,
                                         {{"left_to_right", Direction::kLeftToRight},
                                          {"bidirectional", Direction::kBidirectional}}}},
      {"representation", EnumField<RepresentationMode>{&TrainConfig::representation,
                                                       {{"last_layer", RepresentationMode::kLastLayer},
                                                        {"concat_layers", RepresentationMode::kConcatLayers}}}},
      {"transe_dim", &TrainConfig::transe_dim},
      {"transe_epochs", &TrainConfig::transe_epochs},
      {"transe_lr", &TrainConfig::transe_lr},
      {"transe_margin", &TrainConfig::transe_margin},
      {"transe_negatives", &TrainConfig::transe_negatives},
  };
  return fields;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || !std::isfinite(value)) {
      throw ConfigError("config key '" + key + "': '" + text + "' is not a finite number");
    }
  } else {
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || p != text.data() + text.size()) {
      throw ConfigError("config key '" + key + "': '" + text + "' is not an integer");
    }
  }
  return value;
}

}  // namespace detail

inline void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = detail::trim(raw);
  for (const auto& f : detail::config_fields()) {
    if (f.key != key) continue;
    std::visit(
        [&](const auto& ref) {
          using R = std::decay_t<decltype(ref)>;
          if constexpr (std::is_same_v<R, bool TrainConfig::*>) {
            if (value == "true" || value == "1") {
              cfg.*ref = true;
            } else if (value == "false" || value == "0") {
              cfg.*ref = false;
            } else {
              throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
            }
          } else if constexpr (std::is_same_v<R, int TrainConfig::*>) {
            cfg.*ref = detail::parse_number<int>(key, value);
          } else if constexpr (std::is_same_v<R, double TrainConfig::*>) {
            cfg.*ref = detail::parse_number<double>(key, value);
          } else if constexpr (std::is_same_v<R, std::uint64_t TrainConfig::*>) {
            cfg.*ref = detail::parse_number<std::uint64_t>(key, value);
          } else {
            for (const auto& [name, e] : ref.names) {
              if (name == value) {
                cfg.*(ref.member) = e;
                return;
              }
            }
            throw ConfigError("config key '" + key + "': unknown value '" + value + "'");
          }
        },
        f.ref);
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

// (key, value) for every field, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : detail::config_fields()) {
    std::string v = std::visit(
        [&](const auto& ref) -> std::string {
          using R = std::decay_t<decltype(ref)>;
          if constexpr (std::is_same_v<R, bool TrainConfig::*>) {
            return cfg.*ref ? "true" : "false";
          } else if constexpr (std::is_same_v<R, double TrainConfig::*>) {
            return detail::format_double(cfg.*ref);
          } else if constexpr (std::is_same_v<R, int TrainConfig::*> ||
                               std::is_same_v<R, std::uint64_t TrainConfig::*>) {
            return std::to_string(cfg.*ref);
          } else {
            for (const auto& [name, e] : ref.names) {
              if (cfg.*(ref.member) == e) return std::string(name);
            }
            return "?";
          }
        },
        f.ref);
    out.emplace_back(std::string(f.key), std::move(v));
  }
  return out;
}

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : detail::config_fields()) keys.emplace_back(f.key);
  return keys;
}

// Applies "key = value" lines on top of cfg.
inline void read_config(std::istream& is, const std::string& source, TrainConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    set_config_value(cfg, detail::trim(std::string_view(text).substr(0, eq)),
                     std::string(text.substr(eq + 1)));
  }
}

inline TrainConfig load_config(const std::string& path, TrainConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  read_config(is, path, base);
  return base;
}

inline void write_config(std::ostream& os, const TrainConfig& cfg) {
  for (const auto& [k, v] : config_entries(cfg)) os << k << " = " << v << '\n';
}

}  // namespace ackmmea
