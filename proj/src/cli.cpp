// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fctsbn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fctsbn/audit.hpp"
#include "fctsbn/checkpoint.hpp"
#include "fctsbn/data_io.hpp"
#include "fctsbn/gradcheck.hpp"
#include "fctsbn/model.hpp"
#include "fctsbn/parallel.hpp"
#include "fctsbn/schedule.hpp"
#include "fctsbn/semi.hpp"
#include "fctsbn/trainer.hpp"

namespace fctsbn::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config schema

enum class Kind { Int, UInt, Number, Bool, String, IntArray, NumberArray, Object };

struct Field {
  std::string key;
  Kind kind;
  std::vector<Field> children = {};
  std::vector<std::string> choices = {};
};

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "an integer";
    case Kind::UInt: return "a non-negative integer";
    case Kind::Number: return "a number";
    case Kind::Bool: return "a boolean";
    case Kind::String: return "a string";
    case Kind::IntArray: return "an array of integers";
    case Kind::NumberArray: return "an array of numbers";
    case Kind::Object: return "an object";
  }
  return "?";
}

bool matches(const json& v, Kind k) {
  switch (k) {
    case Kind::Int: return v.is_number_integer();
    case Kind::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Kind::Number: return v.is_number();
    case Kind::Bool: return v.is_boolean();
    case Kind::String: return v.is_string();
    case Kind::IntArray:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
    case Kind::NumberArray:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    case Kind::Object: return v.is_object();
  }
  return false;
}

const std::vector<Field>& config_schema() {
  static const std::vector<Field> schema = {
      {"seed", Kind::UInt},
      {"model", Kind::Object,
       {{"visible", Kind::Int},
        {"styles", Kind::Int},
        {"factors", Kind::Int},
        {"order", Kind::Int},
        {"layer_sizes", Kind::IntArray},
        {"obs", Kind::String, {}, {"real", "binary", "count"}},
        {"factored", Kind::Bool},
        {"hidden_markov", Kind::Bool}}},
      {"data", Kind::Object,
       {{"train", Kind::String},
        {"heldout", Kind::String},
        {"header", Kind::Bool},
        {"normalize", Kind::Bool}}},
      {"planted", Kind::Object,
       {{"style_separation", Kind::Number},
        {"sequences", Kind::Int},
        {"heldout_sequences", Kind::Int},
        {"frames", Kind::Int},
        {"hidden_scale", Kind::Number},
        {"loading_scale", Kind::Number},
        {"visible_to_hidden_scale", Kind::Number},
        {"ar_scale", Kind::Number},
        {"noise_std", Kind::Number},
        {"burn_in", Kind::Int},
        {"label_window", Kind::Int},
        {"count_total", Kind::Int}}},
      {"train", Kind::Object,
       {{"mode", Kind::String, {}, {"nvil", "semi"}},
        {"epochs", Kind::Int},
        {"batch_size", Kind::Int},
        {"subsequence_length", Kind::Int},
        {"learning_rate", Kind::Number},
        {"decay", Kind::Number},
        {"epsilon", Kind::Number},
        {"prediction_samples", Kind::Int},
        {"elbo_smoothing", Kind::Number},
        {"data_dependent_baseline", Kind::Bool},
        {"data_independent_baseline", Kind::Bool},
        {"center_running_mean", Kind::Bool},
        {"variance_normalization", Kind::Bool}}},
      {"semi", Kind::Object,
       {{"window", Kind::Int},
        {"alpha", Kind::Number},
        {"labeled_fraction", Kind::Number},
        {"labeled_probability", Kind::Number}}},
      {"generate", Kind::Object,
       {{"checkpoint", Kind::String},
        {"frames", Kind::Int},
        {"seed_frames", Kind::String},
        {"count_total", Kind::Int},
        {"schedule", Kind::Object,
         {{"kind", Kind::String, {}, {"constant", "transition", "blend"}},
          {"style", Kind::Int},
          {"from_style", Kind::Int},
          {"to_style", Kind::Int},
          {"center", Kind::Number},
          {"width", Kind::Number},
          {"weights", Kind::NumberArray}}}}},
      {"predict", Kind::Object,
       {{"checkpoint", Kind::String},
        {"data", Kind::String},
        {"samples", Kind::Int},
        {"header", Kind::Bool},
        {"obs", Kind::String, {}, {"real", "binary", "count"}}}},
      {"classify", Kind::Object,
       {{"checkpoint", Kind::String},
        {"data", Kind::String},
        {"header", Kind::Bool},
        {"obs", Kind::String, {}, {"real", "binary", "count"}}}},
      {"gradcheck", Kind::Object,
       {{"step", Kind::Number},
        {"rtol", Kind::Number},
        {"atol", Kind::Number},
        {"probes", Kind::Int},
        {"audit_instances", Kind::Int},
        {"audit_samples", Kind::Int}}},
      {"audit", Kind::Object, {{"instances", Kind::Int}, {"samples", Kind::Int}}},
  };
  return schema;
}

void validate_node(const json& node, const std::vector<Field>& schema, const std::string& path,
                   std::vector<std::string>& errors) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    const auto f = std::find_if(schema.begin(), schema.end(),
                                [&](const Field& x) { return x.key == it.key(); });
    if (f == schema.end()) {
      errors.push_back(where + ": unknown key");
      continue;
    }
    if (!matches(it.value(), f->kind)) {
      errors.push_back(where + ": expected " + kind_name(f->kind));
      continue;
    }
    if (f->kind == Kind::Object) validate_node(it.value(), f->children, where, errors);
    if (!f->choices.empty() &&
        std::find(f->choices.begin(), f->choices.end(), it.value().get<std::string>()) ==
            f->choices.end()) {
      std::string allowed;
      for (const auto& c : f->choices) allowed += (allowed.empty() ? "" : ", ") + c;
      errors.push_back(where + ": must be one of " + allowed);
    }
  }
}

// Parsed config plus the directory relative paths are resolved against.
struct Config {
  json root = json::object();
  fs::path base = fs::current_path();

  json section(const std::string& name) const {
    return root.contains(name) ? root.at(name) : json::object();
  }
  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
};

[[noreturn]] void missing(const std::string& path) {
  throw ConfigError(path + ": required key missing");
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

std::string require_string(const Config& cfg, const std::string& section, const std::string& key) {
  const json s = cfg.section(section);
  if (!s.contains(key)) missing(section + "." + key);
  return s.at(key).get<std::string>();
}

void require_range(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

Config load_config(const std::string& path) {
  Config cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config");
  try {
    cfg.root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!cfg.root.is_object()) throw ConfigError(path + ": top level must be an object");
  std::vector<std::string> errors;
  validate_node(cfg.root, config_schema(), "", errors);
  if (!errors.empty()) {
    std::string msg = path + ": invalid config";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  cfg.base = fs::absolute(fs::path(path)).parent_path();
  return cfg;
}

ModelSpec parse_model(const Config& cfg) {
  if (!cfg.root.contains("model")) missing("model");
  const json m = cfg.root.at("model");
  ModelSpec spec;
  if (!m.contains("visible")) missing("model.visible");
  if (!m.contains("layer_sizes")) missing("model.layer_sizes");
  spec.dims.visible = m.at("visible").get<int>();
  spec.dims.styles = get_or(m, "styles", 1);
  spec.dims.factors = get_or(m, "factors", 0);
  spec.dims.order = get_or(m, "order", 1);
  spec.dims.layer_sizes = m.at("layer_sizes").get<std::vector<int>>();
  spec.obs = obs_kind_from_string(get_or<std::string>(m, "obs", "real"));
  spec.factored = get_or(m, "factored", true);
  spec.hidden_markov = get_or(m, "hidden_markov", false);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return spec;
}

NvilOptions parse_nvil(const json& t, bool deterministic) {
  NvilOptions o;
  o.baseline.data_dependent = get_or(t, "data_dependent_baseline", true);
  o.baseline.data_independent = get_or(t, "data_independent_baseline", true);
  o.center_running_mean = get_or(t, "center_running_mean", true);
  o.variance_normalization = get_or(t, "variance_normalization", true);
  o.deterministic = deterministic;
  return o;
}

RmsPropConfig parse_rmsprop(const json& t) {
  RmsPropConfig r;
  r.learning_rate = get_or(t, "learning_rate", r.learning_rate);
  r.decay = get_or(t, "decay", r.decay);
  r.epsilon = get_or(t, "epsilon", r.epsilon);
  require_range(r.learning_rate > 0.0, "train.learning_rate", "must be positive");
  require_range(r.decay >= 0.0 && r.decay < 1.0, "train.decay", "must lie in [0, 1)");
  require_range(r.epsilon > 0.0, "train.epsilon", "must be positive");
  return r;
}

PlantConfig parse_planted(const json& p, const ModelSpec& spec) {
  PlantConfig c;
  c.spec = spec;
  c.style_separation = get_or(p, "style_separation", c.style_separation);
  c.sequences = get_or(p, "sequences", c.sequences);
  c.frames = get_or<Index>(p, "frames", c.frames);
  c.hidden_scale = get_or(p, "hidden_scale", c.hidden_scale);
  c.loading_scale = get_or(p, "loading_scale", c.loading_scale);
  c.visible_to_hidden_scale = get_or(p, "visible_to_hidden_scale", c.visible_to_hidden_scale);
  c.ar_scale = get_or(p, "ar_scale", c.ar_scale);
  c.noise_std = get_or(p, "noise_std", c.noise_std);
  c.burn_in = get_or(p, "burn_in", c.burn_in);
  c.label_window = get_or<Index>(p, "label_window", c.label_window);
  c.count_total = get_or(p, "count_total", c.count_total);
  require_range(c.sequences >= 1, "planted.sequences", "must be >= 1");
  require_range(c.frames >= 1, "planted.frames", "must be >= 1");
  require_range(c.noise_std > 0.0, "planted.noise_std", "must be positive");
  return c;
}

void emit(std::ostream& os, const json& record) { os << record.dump() << '\n'; }

void warn(std::ostream& err, const std::string& message) {
  emit(err, json{{"event", "warning"}, {"message", message}});
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json epoch_json(const EpochMetrics& m) {
  return {{"event", "epoch"},
          {"epoch", m.epoch},
          {"elbo", m.elbo},
          {"loss", -m.elbo},
          {"smoothed_elbo", m.smoothed_elbo},
          {"pred_error", optional_json(m.pred_error)},
          {"signal_mean", m.signal_mean},
          {"signal_var", m.signal_var},
          {"grad_norms", m.grad_norms},
          {"skipped_steps", m.skipped_steps}};
}

json semi_epoch_json(const SemiEpochMetrics& m) {
  return {{"event", "epoch"},
          {"epoch", m.epoch},
          {"accuracy", optional_json(m.accuracy)},
          {"elbo", m.elbo},
          {"loss", -m.elbo},
          {"labeled_batches", m.labeled_batches},
          {"unlabeled_batches", m.unlabeled_batches}};
}

SequenceDataset load_for(const Checkpoint& ckpt, const fs::path& dir, bool header) {
  SequenceDataset data = load_dataset(dir, ckpt.model.spec.obs, {header});
  if (!data.empty() && data.visible() != ckpt.model.spec.dims.visible) {
    throw ConfigError(dir.string() + ": data has " + std::to_string(data.visible()) +
                      " dimensions, checkpoint expects " +
                      std::to_string(ckpt.model.spec.dims.visible));
  }
  if (ckpt.norm) apply_normalization(data, *ckpt.norm);
  return data;
}

void check_obs(const json& section, const std::string& name, const Checkpoint& ckpt) {
  if (!section.contains("obs")) return;
  const ObsKind want = obs_kind_from_string(section.at("obs").get<std::string>());
  if (want != ckpt.model.spec.obs) {
    throw ConfigError(name + ".obs: " + std::string(to_string(want)) +
                      " data given, checkpoint models " + std::string(to_string(ckpt.model.spec.obs)));
  }
}

struct Global {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool deterministic = false;
  std::string out = ".";
  std::optional<int> epochs;
  std::string corrupt;
};

std::uint64_t resolve_seed(const Global& g, const Config& cfg) {
  if (g.seed_given) return g.seed;
  return get_or<std::uint64_t>(cfg.root, "seed", 0);
}

fs::path prepare_out(const Global& g) {
  const fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": cannot create output directory: " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_train(const Global& g, std::ostream& out) {
  const Config cfg = load_config(g.config);
  const ModelSpec spec = parse_model(cfg);
  const json tsec = cfg.section("train");
  const json dsec = cfg.section("data");
  const Rng root(resolve_seed(g, cfg));

  SequenceDataset data;
  SequenceDataset heldout;
  if (dsec.contains("train")) {
    const bool header = get_or(dsec, "header", false);
    data = load_dataset(cfg.resolve(dsec.at("train").get<std::string>()), spec.obs, {header});
    if (dsec.contains("heldout"))
      heldout = load_dataset(cfg.resolve(dsec.at("heldout").get<std::string>()), spec.obs, {header});
  } else if (cfg.root.contains("planted")) {
    const json psec = cfg.section("planted");
    PlantConfig pc = parse_planted(psec, spec);
    Rng data_rng = root.fork(2);
    PlantedModel planted = plant_model(pc, data_rng);
    data = std::move(planted.data);
    const int extra = get_or(psec, "heldout_sequences", 0);
    if (extra > 0) {
      pc.sequences = extra;
      Rng held_rng = root.fork(4);
      heldout = sample_dataset(planted.truth, pc, held_rng);
    }
  } else {
    missing("data.train");
  }
  if (data.empty()) throw ConfigError("data.train: dataset is empty");
  if (data.visible() != spec.dims.visible) {
    throw ConfigError("model.visible: " + std::to_string(spec.dims.visible) +
                      " but the training data has " + std::to_string(data.visible()) + " dimensions");
  }

  std::optional<NormStats> norm;
  if (spec.obs == ObsKind::Real && get_or(dsec, "normalize", true)) {
    norm = compute_norm_stats(data);
    apply_normalization(data, *norm);
    if (!heldout.empty()) apply_normalization(heldout, *norm);
  }

  const NvilOptions nvil = parse_nvil(tsec, g.deterministic);
  Rng init_rng = root.fork(1);
  Checkpoint init = initial_state(spec, init_rng, nvil);
  init.norm = norm;
  const int epochs = g.epochs ? *g.epochs : get_or(tsec, "epochs", 50);
  require_range(epochs >= 0, "train.epochs", "must be >= 0");
  const Index batch = get_or<Index>(tsec, "batch_size", 20);
  require_range(batch >= 1, "train.batch_size", "must be >= 1");

  const fs::path dir = prepare_out(g);
  std::ofstream log(dir / "metrics.ndjson");
  if (!log) throw IoError((dir / "metrics.ndjson").string() + ": cannot open for writing");
  Rng train_rng = root.fork(3);
  Checkpoint final_state;
  json summary = {{"event", "done"}, {"command", "train"}, {"epochs", epochs}};

  if (get_or<std::string>(tsec, "mode", "nvil") == "semi") {
    const json ssec = cfg.section("semi");
    SemiConfig sc;
    sc.window = get_or<Index>(ssec, "window", 0);
    sc.alpha = get_or(ssec, "alpha", 0.0);
    if (ssec.contains("labeled_probability")) sc.labeled_probability = ssec.at("labeled_probability").get<double>();
    sc.epochs = epochs;
    sc.batch_size = batch;
    sc.rmsprop = parse_rmsprop(tsec);
    sc.nvil = nvil;
    const double fraction = get_or(ssec, "labeled_fraction", 1.0);
    require_range(fraction > 0.0 && fraction <= 1.0, "semi.labeled_fraction", "must lie in (0, 1]");
    const Index w = sc.resolved_window(spec);
    std::vector<Window> all = labeled_windows(data, w);
    if (all.empty()) throw ConfigError("data.train: semi-supervised training needs label windows");
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng = root.fork(5);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[split_rng.next_u64() % i]);
    const auto n_lab = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(all.size()))));
    std::vector<Window> labeled, unlabeled;
    for (std::size_t i = 0; i < order.size(); ++i) {
      Window win = all[order[i]];
      if (i < n_lab) {
        labeled.push_back(std::move(win));
      } else {
        win.label.reset();
        unlabeled.push_back(std::move(win));
      }
    }
    const std::vector<Window> test = labeled_windows(heldout, w);
    SemiResult res = semi_train(sc, std::move(init), labeled, unlabeled,
                                test.empty() ? nullptr : &test, train_rng);
    for (const auto& m : res.metrics) {
      const json j = semi_epoch_json(m);
      emit(out, j);
      emit(log, j);
    }
    summary["labeled_windows"] = labeled.size();
    summary["unlabeled_windows"] = unlabeled.size();
    if (!res.metrics.empty()) summary["accuracy"] = optional_json(res.metrics.back().accuracy);
    final_state = std::move(res.checkpoint);
  } else {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.subsequence_length = get_or<Index>(tsec, "subsequence_length", 50);
    tc.rmsprop = parse_rmsprop(tsec);
    tc.nvil = nvil;
    tc.prediction_samples = get_or(tsec, "prediction_samples", 10);
    tc.elbo_smoothing = get_or(tsec, "elbo_smoothing", 0.5);
    require_range(tc.prediction_samples >= 1, "train.prediction_samples", "must be >= 1");
    TrainResult res = train(tc, std::move(init), data, heldout.empty() ? nullptr : &heldout,
                            train_rng, [&](const EpochMetrics& m) {
                              const json j = epoch_json(m);
                              emit(out, j);
                              emit(log, j);
                            });
    summary["initial_pred_error"] = optional_json(res.initial_pred_error);
    if (!res.metrics.empty()) {
      summary["elbo"] = res.metrics.back().elbo;
      summary["pred_error"] = optional_json(res.metrics.back().pred_error);
    }
    final_state = std::move(res.checkpoint);
  }

  const fs::path ckpt = dir / "checkpoint.fctsbn";
  save_checkpoint(ckpt, final_state);
  summary["checkpoint"] = ckpt.string();
  emit(out, summary);
  return kExitOk;
}

StyleSchedule parse_schedule(const json& s, Index styles, Index frames) {
  const std::string kind = get_or<std::string>(s, "kind", "constant");
  auto style_at = [&](const std::string& key, int fallback) {
    const int v = get_or(s, key, fallback);
    if (v < 0 || v >= styles) {
      throw ConfigError("generate.schedule." + key + ": style " + std::to_string(v) +
                        " out of range [0, " + std::to_string(styles) + ")");
    }
    return v;
  };
  if (kind == "constant") return constant_schedule(styles, style_at("style", 0), frames);
  if (kind == "transition") {
    TransitionSpec t;
    t.from_style = style_at("from_style", 0);
    t.to_style = style_at("to_style", styles > 1 ? 1 : 0);
    t.center = get_or(s, "center", static_cast<double>(frames) / 2.0);
    t.width = get_or(s, "width", TransitionSpec::default_width());
    require_range(t.width >= 0.0, "generate.schedule.width", "must be >= 0");
    return transition_schedule(styles, t, frames);
  }
  if (!s.contains("weights")) missing("generate.schedule.weights");
  const auto weights = s.at("weights").get<std::vector<double>>();
  if (static_cast<Index>(weights.size()) != styles) {
    throw ConfigError("generate.schedule.weights: " + std::to_string(weights.size()) +
                      " weights for " + std::to_string(styles) + " styles");
  }
  try {
    return blend_schedule(weights, frames);
  } catch (const ValueError& e) {
    throw ConfigError(std::string("generate.schedule.weights: ") + e.what());
  }
}

int cmd_generate(const Global& g, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(g.config);
  const json gsec = cfg.section("generate");
  const Checkpoint ckpt = load_checkpoint(cfg.resolve(require_string(cfg, "generate", "checkpoint")));
  const ModelSpec& spec = ckpt.model.spec;
  if (!gsec.contains("frames")) missing("generate.frames");
  const Index frames = gsec.at("frames").get<Index>();
  require_range(frames >= 1, "generate.frames", "must be >= 1");
  const StyleSchedule schedule =
      parse_schedule(gsec.contains("schedule") ? gsec.at("schedule") : json::object(),
                     spec.dims.styles, frames);
  schedule.validate();

  Matrix seed;
  if (gsec.contains("seed_frames")) {
    const Matrix rows = read_csv(cfg.resolve(gsec.at("seed_frames").get<std::string>()));
    if (rows.cols() != spec.dims.visible) {
      throw ConfigError("generate.seed_frames: " + std::to_string(rows.cols()) +
                        " columns, checkpoint expects " + std::to_string(spec.dims.visible));
    }
    seed = rows.transpose();
    if (ckpt.norm) {
      for (Index i = 0; i < seed.rows(); ++i)
        seed.row(i) = (seed.row(i).array() - ckpt.norm->mean[i]) / ckpt.norm->stddev[i];
    }
  }
  GenerateOptions opts;
  opts.count_total = get_or(gsec, "count_total", 1);
  Rng rng = Rng(resolve_seed(g, cfg)).fork(6);
  const GeneratedSequence gen = generate(ckpt.model, seed, schedule, frames, rng, opts);
  if (gen.seed_padded) {
    warn(err, "seed frames: " + std::to_string(seed.cols()) + " of " +
                  std::to_string(spec.dims.order) + " supplied; lag window zero-padded");
  }
  const Matrix V = ckpt.norm ? denormalize(gen.V, *ckpt.norm) : gen.V;

  const fs::path dir = prepare_out(g);
  write_csv(dir / "generated.csv", V.transpose());
  write_csv(dir / "schedule.csv", schedule.Y.transpose());
  emit(out, {{"event", "done"},
             {"command", "generate"},
             {"frames", frames},
             {"seed_padded", gen.seed_padded},
             {"generated", (dir / "generated.csv").string()},
             {"schedule", (dir / "schedule.csv").string()}});
  return kExitOk;
}

int cmd_predict(const Global& g, std::ostream& out) {
  const Config cfg = load_config(g.config);
  const json psec = cfg.section("predict");
  const Checkpoint ckpt = load_checkpoint(cfg.resolve(require_string(cfg, "predict", "checkpoint")));
  check_obs(psec, "predict", ckpt);
  const SequenceDataset data =
      load_for(ckpt, cfg.resolve(require_string(cfg, "predict", "data")), get_or(psec, "header", false));
  if (data.empty()) throw ConfigError("predict.data: dataset is empty");
  const int samples = get_or(psec, "samples", 10);
  require_range(samples >= 1, "predict.samples", "must be >= 1");
  const Rng rng = Rng(resolve_seed(g, cfg)).fork(7);
  const double mae = prediction_mae(ckpt.model, ckpt.recognition, data, samples, rng);
  emit(out, {{"event", "done"},
             {"command", "predict"},
             {"mae", mae},
             {"sequences", data.size()},
             {"frames", data.total_frames()},
             {"samples", samples}});
  return kExitOk;
}

int cmd_classify(const Global& g, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(g.config);
  const json csec = cfg.section("classify");
  const Checkpoint ckpt = load_checkpoint(cfg.resolve(require_string(cfg, "classify", "checkpoint")));
  check_obs(csec, "classify", ckpt);
  const ModelSpec& spec = ckpt.model.spec;
  ClassifierParams c;
  if (ckpt.classifier) {
    c = *ckpt.classifier;
  } else {
    warn(err, "checkpoint has no classifier; using an untrained one");
    c = make_classifier(spec.dims.styles, spec.dims.visible, spec.dims.order + 1);
  }
  const SequenceDataset data =
      load_for(ckpt, cfg.resolve(require_string(cfg, "classify", "data")), get_or(csec, "header", false));
  const std::vector<Window> windows = labeled_windows(data, c.window);
  if (windows.empty()) throw ConfigError("classify.data: no label windows of length " + std::to_string(c.window));
  emit(out, {{"event", "done"},
             {"command", "classify"},
             {"accuracy", classification_accuracy(c, windows)},
             {"windows", windows.size()},
             {"chance", 1.0 / static_cast<double>(spec.dims.styles)}});
  return kExitOk;
}

// Enumeration audit of one instance; returns whether every check held.
bool audit_instance(const AuditInstance& inst, Index samples, const Rng& rng, std::ostream& out) {
  const EnumerationSums sums = enumerate_sums(inst.p, inst.q, inst.V, inst.Y);
  const MonteCarloEstimate mc = monte_carlo_elbo(inst.p, inst.q, inst.V, inst.Y, samples, rng);
  const double q_mass = std::exp(sums.log_q_mass);
  const bool normalized = std::abs(q_mass - 1.0) <= 1e-9;
  const bool jensen = sums.exact_elbo <= sums.log_marginal + 1e-9;
  // Rounding floor for estimators whose spread is zero.
  const double slack = std::max(3.0 * mc.std_error, 1e-9);
  const bool bound = mc.mean <= sums.log_marginal + slack;
  const bool tight = !inst.exact_posterior || std::abs(mc.mean - sums.log_marginal) <= slack;
  const bool pass = normalized && jensen && bound && tight;
  emit(out, {{"event", "audit"},
             {"instance", inst.label},
             {"hidden_bits", hidden_bits(inst.p.spec, inst.V.cols())},
             {"q_mass", q_mass},
             {"log_marginal", sums.log_marginal},
             {"exact_elbo", sums.exact_elbo},
             {"mc_elbo", mc.mean},
             {"mc_std_error", mc.std_error},
             {"samples", mc.samples},
             {"exact_posterior", inst.exact_posterior},
             {"pass", pass}});
  return pass;
}

int cmd_gradcheck(const Global& g, std::ostream& out) {
  const Config cfg = load_config(g.config);
  const json s = cfg.section("gradcheck");
  GradCheckOptions opts;
  opts.step = get_or(s, "step", opts.step);
  opts.rtol = get_or(s, "rtol", opts.rtol);
  opts.atol = get_or(s, "atol", opts.atol);
  opts.probes = get_or(s, "probes", opts.probes);
  opts.corrupt = g.corrupt;
  require_range(opts.step > 0.0, "gradcheck.step", "must be positive");
  require_range(opts.probes >= 1, "gradcheck.probes", "must be >= 1");
  const std::uint64_t seed = resolve_seed(g, cfg);

  std::set<std::string> failed;
  double worst = 0.0;
  for (const GradCheckReport& r : run_gradcheck_suite(seed, opts)) {
    for (const TensorCheck& t : r.tensors) {
      emit(out, {{"event", "gradcheck"},
                 {"report", r.label},
                 {"tensor", t.name},
                 {"max_error", t.max_error},
                 {"probes", t.probes},
                 {"pass", t.pass}});
      worst = std::max(worst, t.max_error);
      if (!t.pass) failed.insert(t.name);
    }
  }
  const int instances = get_or(s, "audit_instances", 4);
  const Index samples = get_or<Index>(s, "audit_samples", 2000);
  bool audits = true;
  for (int i = 0; i < instances; ++i)
    audits = audit_instance(make_audit_instance(i, seed), samples, Rng(seed).fork(100 + i), out) && audits;
  const bool pass = failed.empty() && audits;
  emit(out, {{"event", "done"},
             {"command", "gradcheck"},
             {"pass", pass},
             {"max_error", worst},
             {"failed_tensors", std::vector<std::string>(failed.begin(), failed.end())},
             {"audits_pass", audits}});
  return pass ? kExitOk : kExitNumeric;
}

int cmd_audit(const Global& g, std::ostream& out) {
  const Config cfg = load_config(g.config);
  const json s = cfg.section("audit");
  const int instances = get_or(s, "instances", 10);
  const Index samples = get_or<Index>(s, "samples", 100000);
  require_range(instances >= 1, "audit.instances", "must be >= 1");
  require_range(samples >= 2, "audit.samples", "must be >= 2");
  const std::uint64_t seed = resolve_seed(g, cfg);
  int passed = 0;
  for (int i = 0; i < instances; ++i)
    passed += audit_instance(make_audit_instance(i, seed), samples, Rng(seed).fork(100 + i), out) ? 1 : 0;
  const bool pass = passed == instances;
  emit(out, {{"event", "done"},
             {"command", "audit-enum"},
             {"pass", pass},
             {"instances", instances},
             {"passed", passed}});
  return pass ? kExitOk : kExitNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factored conditional temporal sigmoid belief networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "Root random seed");
  app.add_flag("--deterministic", g.deterministic, "Fixed-order parallel reductions");
  app.add_option("--out", g.out, "Output directory");

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--epochs", g.epochs, "Override train.epochs");
  auto* generate = app.add_subcommand("generate", "Sample a sequence from a checkpoint");
  auto* predict = app.add_subcommand("predict", "One-step prediction error on a dataset");
  auto* classify = app.add_subcommand("classify", "Window classification accuracy");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gradcheck->add_option("--corrupt", g.corrupt, "Perturb the analytic gradient of one tensor");
  auto* audit = app.add_subcommand("audit-enum", "Exhaustive-enumeration bound audit");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  g.seed_given = app.count("--seed") > 0;
  configure_threads_from_env();
  try {
    if (*train) return cmd_train(g, out);
    if (*generate) return cmd_generate(g, out, err);
    if (*predict) return cmd_predict(g, out);
    if (*classify) return cmd_classify(g, out, err);
    if (*gradcheck) return cmd_gradcheck(g, out);
    if (*audit) return cmd_audit(g, out);
  } catch (const ConfigError& e) {
    emit(err, {{"event", "error"}, {"kind", "config"}, {"message", e.what()}});
    return kExitConfig;
  } catch (const NumericAbort& e) {
    emit(err, {{"event", "error"}, {"kind", "numeric"}, {"message", e.what()}});
    return kExitNumeric;
  } catch (const IoError& e) {
    emit(err, {{"event", "error"}, {"kind", "io"}, {"message", e.what()}});
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    emit(err, {{"event", "error"}, {"kind", "config"}, {"message", e.what()}});
    return kExitConfig;
  } catch (const json::exception& e) {
    emit(err, {{"event", "error"}, {"kind", "config"}, {"message", e.what()}});
    return kExitConfig;
  } catch (const std::exception& e) {
    emit(err, {{"event", "error"}, {"kind", "internal"}, {"message", e.what()}});
    return kExitUsage;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace fctsbn::cli
