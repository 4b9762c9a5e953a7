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

// Subcommands of the ackmmea tool. run_cli() is the whole program minus
// process plumbing so tests can drive it in-process.

#pragma once

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ackmmea.hpp"

namespace ackmmea::cli {

namespace fs = std::filesystem;

constexpr int kOk = static_cast<int>(ExitCode::kOk);
constexpr int kConfig = static_cast<int>(ExitCode::kConfig);

// ---- manifest ----------------------------------------------------------------------------

inline std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot hash '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  explicit RunManifest(std::string cmd, std::string config = {})
      : command(std::move(cmd)), config_path(std::move(config)) {}

  std::string command;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> settings;  // resolved config and paths
  fs::path output_dir;
  std::string started_at = utc_now();
  std::string finished_at;
  std::vector<fs::path> artifacts;

  // Appends one record to <output_dir>/manifest.log.
  void append() {
    finished_at = utc_now();
    std::ofstream os(output_dir / "manifest.log", std::ios::app);
    if (!os) throw IoError("cannot append to '" + (output_dir / "manifest.log").string() + "'");
    os << "command " << command << '\n'
       << "config_path " << (config_path.empty() ? "-" : config_path) << '\n'
       << "output_dir " << output_dir.string() << '\n'
       << "started_at " << started_at << '\n'
       << "finished_at " << finished_at << '\n';
    for (const auto& [k, v] : settings) os << "set " << k << " = " << v << '\n';
    for (const auto& a : artifacts) os << "sha256 " << sha256_file(a) << ' ' << a.filename().string() << '\n';
    os << "end\n";
  }
};

// ---- shared helpers ------------------------------------------------------------------------

inline fs::path default_out(const std::string& command) {
  const char* root = std::getenv("ACKMMEA_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / command;
}

inline fs::path prepare_out(std::string& flag, const std::string& command) {
  const fs::path dir = flag.empty() ? default_out(command) : fs::path(flag);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  flag = dir.string();
  return dir;
}

inline std::ofstream open_artifact(RunManifest& m, const std::string& name) {
  const fs::path p = m.output_dir / name;
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  m.artifacts.push_back(p);
  return os;
}

struct DataFlags {
  std::string kg1, kg2, seeds;
};

struct ConfigFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

inline void add_data_flags(CLI::App* app, DataFlags& f) {
  app->add_option("--kg1", f.kg1, "left graph, canonical directory")->required();
  app->add_option("--kg2", f.kg2, "right graph, canonical directory")->required();
  app->add_option("--seeds", f.seeds, "aligned pairs, TSV of entity names")->required();
}

inline void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.config, "key = value config file");
  app->add_option("--set", f.sets, "override one config key, key=value (repeatable)");
  app->add_option("--seed", f.seed, "master random seed (overrides config)");
}

// defaults (or `base`) < config file < --set flags < --seed.
inline TrainConfig resolve_config(const ConfigFlags& f, TrainConfig base = {}) {
  TrainConfig cfg = f.config.empty() ? std::move(base) : load_config(f.config, std::move(base));
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, detail::trim(std::string_view(kv).substr(0, eq)), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  cfg.check();
  return cfg;
}

struct LoadedData {
  MultiModalKG kg1, kg2;
  AlignmentSeedSet seeds;  // split by the config
};

inline LoadedData load_data(const DataFlags& f, const TrainConfig& cfg) {
  LoadedData d{load_canonical(f.kg1), load_canonical(f.kg2), {}};
  d.seeds = split_seeds(load_seeds(f.seeds, d.kg1, d.kg2), cfg.train_fraction, cfg.seed);
  return d;
}

inline void record_config(RunManifest& m, const TrainConfig& cfg, const DataFlags& f) {
  m.settings = {{"kg1", f.kg1}, {"kg2", f.kg2}, {"seeds", f.seeds}};
  for (auto& kv : config_entries(cfg)) m.settings.push_back(std::move(kv));
}

inline void write_metrics_csv(std::ostream& os, const EvalReport& r) {
  os.precision(6);
  os << "direction,count,mrr,hits1,hits10\n"
     << (r.direction == Direction::kBidirectional ? "bidirectional" : "left_to_right") << ','
     << r.overall.count << ',' << r.overall.mrr << ',' << r.overall.hits1 << ',' << r.overall.hits10 << '\n';
}

inline void print_metrics(std::ostream& out, const std::string& label, const Metrics& m) {
  out << label << " mrr " << m.mrr << " hits@1 " << m.hits1 << " hits@10 " << m.hits10 << " (n=" << m.count
      << ")\n";
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad " + what + " '" + s + "'");
}

inline std::size_t parse_count(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (v < 0 || v != std::floor(v)) throw ConfigError("bad " + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

// "0-0,1-2,3-10" -> bucket edges.
inline std::vector<std::pair<std::size_t, std::size_t>> parse_buckets(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& item : split_list(s)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      const std::size_t g = parse_count(item, "bucket");
      out.emplace_back(g, g);
    } else {
      out.emplace_back(parse_count(item.substr(0, dash), "bucket"), parse_count(item.substr(dash + 1), "bucket"));
    }
  }
  if (out.empty()) throw ConfigError("no gap buckets given");
  return out;
}

inline void check_dir(const std::string& path) {
  if (!fs::is_directory(path)) throw IoError("not a directory: '" + path + "'");
}

// ---- synthetic config --------------------------------------------------------------------------

inline void set_synthetic_value(SyntheticConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = detail::trim(raw);
  auto range = [&](CountRange& r) {
    const auto dash = v.find('-');
    if (dash == std::string::npos) throw ConfigError("expected lo-hi for '" + key + "'");
    r.lo = static_cast<int>(parse_count(v.substr(0, dash), key));
    r.hi = static_cast<int>(parse_count(v.substr(dash + 1), key));
  };
  if (key == "n_entities") c.n_entities = parse_count(v, key);
  else if (key == "n_relation_types") c.n_relation_types = parse_count(v, key);
  else if (key == "avg_degree") c.avg_degree = parse_double(v, key);
  else if (key == "text_attr_count") range(c.text_attr_count);
  else if (key == "image_attr_count") range(c.image_attr_count);
  else if (key == "gap_level") c.gap_level = static_cast<int>(parse_count(v, key));
  else if (key == "image_gap_level") c.image_gap_level = static_cast<int>(parse_double(v, key));
  else if (key == "missing_modality_rate") c.missing_modality_rate = parse_double(v, key);
  else if (key == "feature_noise_sigma") c.feature_noise_sigma = parse_double(v, key);
  else if (key == "text_dim") c.text_dim = static_cast<int>(parse_count(v, key));
  else if (key == "image_dim") c.image_dim = static_cast<int>(parse_count(v, key));
  else if (key == "rng_seed") c.rng_seed = parse_count(v, key);
  else throw ConfigError("unknown synthetic config key '" + key + "'");
}

inline std::vector<std::pair<std::string, std::string>> synthetic_entries(const SyntheticConfig& c) {
  auto s = [](auto x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  auto r = [](const CountRange& x) { return std::to_string(x.lo) + "-" + std::to_string(x.hi); };
  return {{"n_entities", s(c.n_entities)},
          {"n_relation_types", s(c.n_relation_types)},
          {"avg_degree", s(c.avg_degree)},
          {"text_attr_count", r(c.text_attr_count)},
          {"image_attr_count", r(c.image_attr_count)},
          {"gap_level", s(c.gap_level)},
          {"image_gap_level", s(c.image_gap_level)},
          {"missing_modality_rate", s(c.missing_modality_rate)},
          {"feature_noise_sigma", s(c.feature_noise_sigma)},
          {"text_dim", s(c.text_dim)},
          {"image_dim", s(c.image_dim)},
          {"rng_seed", s(c.rng_seed)}};
}

// ---- commands ------------------------------------------------------------------------------------

struct ImportArgs {
  std::string rel, attr, text, image, out;
};

inline int cmd_import(ImportArgs& a, std::ostream& out, std::ostream& err) {
  MmkbImport imp = import_mmkb(a.rel, a.attr, a.text, a.image);
  if (!imp.report.ok()) {
    err << "validation failed with " << imp.report.violations.size() << " problem(s):\n" << imp.report;
    return kConfig;
  }
  RunManifest m{"import"};
  m.output_dir = prepare_out(a.out, "import");
  m.settings = {{"rel", a.rel}, {"attr", a.attr}, {"text_feats", a.text}, {"image_feats", a.image}};
  write_canonical(imp.kg, m.output_dir);
  for (const char* f : {"entities.txt", "relations.txt", "triples.tsv", "text_attrs.tsv", "text_features.txt",
                        "image_attrs.tsv", "image_features.txt"}) {
    m.artifacts.push_back(m.output_dir / f);
  }
  {
    auto os = open_artifact(m, "validation.txt");
    os << "violations 0\n";
  }
  m.append();
  out << "entities " << imp.kg.num_entities() << "\nrelations " << imp.kg.relation_names.size() << "\ntriples "
      << imp.kg.triples.size() << "\ntext_attributes " << imp.kg.text_features.size() << "\nimage_attributes "
      << imp.kg.image_features.size() << '\n';
  return kOk;
}

struct SynthArgs {
  std::string config, out;
  std::vector<std::string> sets;
  std::optional<std::size_t> entities, relations;
  std::optional<double> degree, missing, noise;
  std::optional<int> gap, image_gap, text_dim, image_dim;
  std::optional<std::uint64_t> seed;
};

inline int cmd_synth(SynthArgs& a, std::ostream& out) {
  SyntheticConfig c;
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is) throw IoError("cannot open config '" + a.config + "'");
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
      ++no;
      if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
      const std::string text = detail::trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ParseError(a.config, no, "expected key = value");
      set_synthetic_value(c, detail::trim(std::string_view(text).substr(0, eq)), text.substr(eq + 1));
    }
  }
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_synthetic_value(c, detail::trim(std::string_view(kv).substr(0, eq)), kv.substr(eq + 1));
  }
  if (a.entities) c.n_entities = *a.entities;
  if (a.relations) c.n_relation_types = *a.relations;
  if (a.degree) c.avg_degree = *a.degree;
  if (a.missing) c.missing_modality_rate = *a.missing;
  if (a.noise) c.feature_noise_sigma = *a.noise;
  if (a.gap) c.gap_level = *a.gap;
  if (a.image_gap) c.image_gap_level = *a.image_gap;
  if (a.text_dim) c.text_dim = *a.text_dim;
  if (a.image_dim) c.image_dim = *a.image_dim;
  if (a.seed) c.rng_seed = *a.seed;
  c.check();

  const SyntheticPair p = generate_synthetic(c);
  RunManifest m{"synth", a.config};
  m.output_dir = prepare_out(a.out, "synth");
  m.settings = synthetic_entries(c);
  for (const auto& [kg, name] : {std::pair{&p.kg1, "kg1"}, std::pair{&p.kg2, "kg2"}}) {
    write_canonical(*kg, m.output_dir / name);
    for (const char* f : {"entities.txt", "relations.txt", "triples.tsv", "text_attrs.tsv", "text_features.txt",
                          "image_attrs.tsv", "image_features.txt"}) {
      m.artifacts.push_back(m.output_dir / name / f);
    }
  }
  save_seeds((m.output_dir / "seeds.tsv").string(), p.seeds, p.kg1, p.kg2);
  m.artifacts.push_back(m.output_dir / "seeds.tsv");
  m.append();
  out << "wrote " << p.kg1.num_entities() << "+" << p.kg2.num_entities() << " entities, " << p.seeds.pairs.size()
      << " seed pairs to " << m.output_dir.string() << '\n';
  return kOk;
}

struct StatsArgs {
  std::string kg1, kg2, seeds;
};

inline int cmd_stats(const StatsArgs& a, std::ostream& out) {
  check_dir(a.kg1);
  check_dir(a.kg2);
  const MultiModalKG kg1 = load_canonical(a.kg1), kg2 = load_canonical(a.kg2);
  for (const auto& [kg, name] : {std::pair{&kg1, "kg1"}, std::pair{&kg2, "kg2"}}) {
    std::size_t no_text = 0, no_image = 0;
    for (std::size_t e = 0; e < kg->num_entities(); ++e) {
      no_text += kg->text_attrs[e].empty();
      no_image += kg->image_attrs[e].empty();
    }
    out << name << " entities " << kg->num_entities() << " relations " << kg->relation_names.size()
        << " triples " << kg->triples.size() << " text_attributes " << kg->text_features.size()
        << " image_attributes " << kg->image_features.size() << " without_text " << no_text
        << " without_image " << no_image << " violations " << validate(*kg).violations.size() << '\n';
  }
  if (a.seeds.empty()) return kOk;
  const AlignmentSeedSet seeds = load_seeds(a.seeds, kg1, kg2);
  out << "seed_pairs " << seeds.pairs.size() << '\n';
  for (Modality m : {Modality::kText, Modality::kImage}) {
    std::map<std::size_t, std::size_t> hist;
    for (const auto& pr : seeds.pairs) ++hist[attribute_gap(kg1, kg2, pr, m)];
    out << to_string(m) << "_gap";
    for (const auto& [g, n] : hist) out << ' ' << g << ':' << n;
    out << '\n';
  }
  return kOk;
}

struct TrainArgs {
  DataFlags data;
  ConfigFlags config;
  std::string out;
  bool quiet = false;
};

inline int cmd_train(TrainArgs& a, std::ostream& out) {
  const TrainConfig cfg = resolve_config(a.config);
  const LoadedData d = load_data(a.data, cfg);
  RunManifest m{"train", a.config.config};
  m.output_dir = prepare_out(a.out, "train");
  record_config(m, cfg, a.data);

  const PreparedPair data = prepare_pair(d.kg1, d.kg2, d.seeds, cfg);
  auto loss_csv = open_artifact(m, "loss.csv");
  loss_csv.precision(17);
  loss_csv << "epoch,loss,monitored\n";
  const TrainResult r = train(data, cfg, [&](const EpochStats& s) {
    loss_csv << s.epoch << ',' << s.loss << ',' << s.monitored << '\n';
    if (!a.quiet && (s.epoch % 10 == 0 || s.epoch == 1)) out << "epoch " << s.epoch << " loss " << s.loss << '\n';
  });
  loss_csv.close();
  save_checkpoint((m.output_dir / "best.ckpt").string(), r.best);
  save_checkpoint((m.output_dir / "final.ckpt").string(), r.final);
  m.artifacts.push_back(m.output_dir / "best.ckpt");
  m.artifacts.push_back(m.output_dir / "final.ckpt");
  {
    auto os = open_artifact(m, "config.txt");
    write_config(os, cfg);
  }
  if (!data.seeds.test.empty()) {
    const EvalReport rep = evaluate(r.best, data, cfg);
    auto os = open_artifact(m, "report.csv");
    write_metrics_csv(os, rep);
    print_metrics(out, "best epoch " + std::to_string(r.best.epoch), rep.overall);
  }
  m.append();
  if (r.stopped_early) out << "stopped early after epoch " << r.final.epoch << '\n';
  return kOk;
}

struct EvalArgs {
  DataFlags data;
  ConfigFlags config;
  std::string checkpoint, out, modality = "text", buckets;
};

inline int cmd_eval(EvalArgs& a, std::ostream& out, bool gap) {
  if (gap && a.modality != "text" && a.modality != "image") throw ConfigError("--modality must be text or image");
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const TrainConfig cfg = resolve_config(a.config, ckpt.config);
  check_compatible(ckpt.config, cfg);
  const LoadedData d = load_data(a.data, cfg);
  const std::string command = gap ? "gap" : "eval";
  RunManifest m{command, a.config.config};
  m.output_dir = prepare_out(a.out, command);
  record_config(m, cfg, a.data);
  m.settings.emplace_back("checkpoint", a.checkpoint);

  const PreparedPair data = prepare_pair(d.kg1, d.kg2, d.seeds, cfg, ckpt.left_tables, ckpt.right_tables);
  if (gap) {
    const Modality mod = a.modality == "text" ? Modality::kText : Modality::kImage;
    m.settings.emplace_back("modality", a.modality);
    const EvalReport rep = gap_bucket_eval(ckpt, data, cfg, mod,
                                           a.buckets.empty() ? default_gap_buckets() : parse_buckets(a.buckets));
    auto os = open_artifact(m, "gap.csv");
    write_gap_csv(os, rep);
    print_metrics(out, "overall", rep.overall);
  } else {
    const EvalReport rep = evaluate(ckpt, data, cfg);
    auto os = open_artifact(m, "report.csv");
    write_metrics_csv(os, rep);
    print_metrics(out, "overall", rep.overall);
  }
  m.append();
  return kOk;
}

struct SweepArgs {
  DataFlags data;
  ConfigFlags config;
  std::string out, rhos = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
};

inline int cmd_sweep(SweepArgs& a, std::ostream& out) {
  const TrainConfig cfg = resolve_config(a.config);
  std::vector<double> rhos;
  for (const auto& s : split_list(a.rhos)) rhos.push_back(parse_double(s, "dropout rate"));
  if (rhos.empty()) throw ConfigError("no dropout rates given");
  for (double r : rhos) {
    if (!(r >= 0 && r <= 1)) throw ConfigError("dropout rate out of [0,1]");
  }
  const LoadedData d = load_data(a.data, cfg);
  RunManifest m{"sweep", a.config.config};
  m.output_dir = prepare_out(a.out, "sweep");
  record_config(m, cfg, a.data);
  m.settings.emplace_back("rhos", a.rhos);
  const PreparedPair data = prepare_pair(d.kg1, d.kg2, d.seeds, cfg);
  const auto rows = sweep_dropout(data, cfg, rhos);
  auto os = open_artifact(m, "sweep.csv");
  write_sweep_csv(os, rows);
  os.close();
  for (const auto& r : rows) print_metrics(out, "rho " + std::to_string(r.rho), r.report.overall);
  m.append();
  return kOk;
}

struct AblateArgs {
  DataFlags data;
  ConfigFlags config;
  std::string out, variants;
};

inline int cmd_ablate(AblateArgs& a, std::ostream& out) {
  const TrainConfig cfg = resolve_config(a.config);
  const std::vector<std::string> variants = a.variants.empty() ? ablation_variants() : split_list(a.variants);
  for (const auto& v : variants) apply_variant(cfg, v);
  const LoadedData d = load_data(a.data, cfg);
  RunManifest m{"ablate", a.config.config};
  m.output_dir = prepare_out(a.out, "ablate");
  record_config(m, cfg, a.data);
  m.settings.emplace_back("variants", a.variants.empty() ? "all" : a.variants);
  const PreparedPair data = prepare_pair(d.kg1, d.kg2, d.seeds, cfg);
  const auto rows = ablate(data, cfg, variants);
  auto os = open_artifact(m, "ablation.csv");
  write_ablation_csv(os, rows);
  os.close();
  for (const auto& r : rows) print_metrics(out, r.variant, r.report.overall);
  m.append();
  return kOk;
}

// ---- entry point ---------------------------------------------------------------------------------

inline std::string config_key_help() {
  std::ostringstream os;
  os << "Config keys (key = default):\n";
  for (const auto& [k, v] : config_entries(TrainConfig{})) os << "  " << k << " = " << v << '\n';
  os << "Precedence: defaults < --config file < --set < --seed.\n"
        "ACKMMEA_OUT_ROOT sets the default output root (default ./runs).\n"
        "Exit codes: 0 ok, 1 I/O, 2 config/validation, 3 numeric.";
  return os.str();
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-modal entity alignment: data preparation, training and evaluation", "ackmmea"};
  app.require_subcommand(1);
  app.footer(config_key_help());

  ImportArgs imp;
  auto* c_import = app.add_subcommand("import", "convert mmkb-style sources to canonical files");
  c_import->add_option("--rel", imp.rel, "relation triples, head\\trel\\ttail")->required();
  c_import->add_option("--attr", imp.attr, "attribute triples, entity\\tattr\\tvalue[\\tfeature_id]")->required();
  c_import->add_option("--text-feats", imp.text, "text feature table")->required();
  c_import->add_option("--image-feats", imp.image, "image feature table")->required();
  c_import->add_option("--out", imp.out, "output directory");

  SynthArgs syn;
  auto* c_synth = app.add_subcommand("synth", "generate a twin synthetic pair with known alignment");
  c_synth->add_option("--config", syn.config, "synthetic key = value file");
  c_synth->add_option("--set", syn.sets, "override one synthetic key, key=value (repeatable)");
  c_synth->add_option("--entities", syn.entities, "entities per graph");
  c_synth->add_option("--relations", syn.relations, "relation types");
  c_synth->add_option("--degree", syn.degree, "average degree");
  c_synth->add_option("--gap-level", syn.gap, "max text attribute count gap per pair");
  c_synth->add_option("--image-gap-level", syn.image_gap, "max image gap (-1: same as text)");
  c_synth->add_option("--missing-rate", syn.missing, "fraction of right entities losing one modality");
  c_synth->add_option("--noise", syn.noise, "feature noise sigma");
  c_synth->add_option("--text-dim", syn.text_dim, "text feature dimension");
  c_synth->add_option("--image-dim", syn.image_dim, "image feature dimension");
  c_synth->add_option("--seed", syn.seed, "random seed");
  c_synth->add_option("--out", syn.out, "output directory");

  StatsArgs st;
  auto* c_stats = app.add_subcommand("stats", "print graph statistics and seed attribute gaps");
  c_stats->add_option("--kg1", st.kg1, "left graph directory")->required();
  c_stats->add_option("--kg2", st.kg2, "right graph directory")->required();
  c_stats->add_option("--seeds", st.seeds, "aligned pairs");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train and write checkpoints, loss curve and report");
  add_data_flags(c_train, tr.data);
  add_config_flags(c_train, tr.config);
  c_train->add_option("--out", tr.out, "output directory");
  c_train->add_flag("--quiet", tr.quiet, "no progress lines");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  EvalArgs gp;
  auto* c_gap = app.add_subcommand("gap", "evaluate a checkpoint per attribute-gap bucket");
  for (auto [c, a] : {std::pair{c_eval, &ev}, std::pair{c_gap, &gp}}) {
    add_data_flags(c, a->data);
    add_config_flags(c, a->config);
    c->add_option("--checkpoint", a->checkpoint, "checkpoint file")->required();
    c->add_option("--out", a->out, "output directory");
  }
  c_gap->add_option("--modality", gp.modality, "text or image");
  c_gap->add_option("--buckets", gp.buckets, "bucket list, e.g. 0-0,1-2,3-10 (default: unit buckets 0..24)");

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "train and evaluate over dropout rates");
  add_data_flags(c_sweep, sw.data);
  add_config_flags(c_sweep, sw.config);
  c_sweep->add_option("--rho", sw.rhos, "comma separated dropout rates");
  c_sweep->add_option("--out", sw.out, "output directory");

  AblateArgs ab;
  auto* c_ablate = app.add_subcommand("ablate", "train and evaluate ablation variants");
  add_data_flags(c_ablate, ab.data);
  add_config_flags(c_ablate, ab.config);
  c_ablate->add_option("--variants", ab.variants, "comma separated variants (default: all)");
  c_ablate->add_option("--out", ab.out, "output directory");

  std::vector<const char*> argv{"ackmmea"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (c_import->parsed()) return cmd_import(imp, out, err);
    if (c_synth->parsed()) return cmd_synth(syn, out);
    if (c_stats->parsed()) return cmd_stats(st, out);
    if (c_train->parsed()) return cmd_train(tr, out);
    if (c_eval->parsed()) return cmd_eval(ev, out, false);
    if (c_gap->parsed()) return cmd_eval(gp, out, true);
    if (c_sweep->parsed()) return cmd_sweep(sw, out);
    if (c_ablate->parsed()) return cmd_ablate(ab, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}

}  // namespace ackmmea::cli
