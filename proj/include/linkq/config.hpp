#pragma once

// Pipeline configuration: JSON or TOML documents with the same key layout.
//
//   seed = 42
//   feature_set = "combo3"
//   resample = "ros"            # none | ros | rus
//   resample_scope = "train"    # train | all
//   output_dir = "out"
//   [input]
//   kind = "synthetic"          # synthetic | csv | raw
//   [cv]
//   k = 10
//   [[models]]
//   kind = "dtree"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "linkq/dataset.hpp"
#include "linkq/error.hpp"
#include "linkq/features.hpp"
#include "linkq/models/spec.hpp"
#include "linkq/rng.hpp"
#include "linkq/synthetic.hpp"
#include "linkq/trace.hpp"

namespace linkq {

enum class InputKind { synthetic, csv, raw };

constexpr std::string_view to_string(InputKind k) {
  switch (k) {
    case InputKind::synthetic: return "synthetic";
    case InputKind::csv: return "csv";
    case InputKind::raw: return "raw";
  }
  return "?";
}

/// Where resampling happens: on each training split only, or on the whole
/// dataset before it is split into folds.
enum class ResampleScope { train, all };

constexpr std::string_view to_string(ResampleScope s) {
  return s == ResampleScope::train ? "train" : "all";
}

struct InputConfig {
  InputKind kind = InputKind::synthetic;
  std::string path;
  int seq_base = 0;
  SynthSpec synthetic;
};

struct CvConfig {
  int k = 10;
  int repeats = 1;
  bool group_by_link = false;
  std::optional<std::uint64_t> seed;  // default: derived from the master seed
};

struct GridEntry {
  std::string name;
  FeatureSet feature_set = FeatureSet::combo3;
  Resample resample = Resample::ros;
  ModelSpec model;
};

struct PipelineConfig {
  InputConfig input;
  int trace_length = kDefaultTraceLength;
  double fill = 0.0;
  ErrorRssiPolicy error_policy = ErrorRssiPolicy::lost;
  WindowConfig window;
  FeatureSet feature_set = FeatureSet::combo3;
  Resample resample = Resample::ros;
  ResampleScope resample_scope = ResampleScope::train;
  CvConfig cv;
  std::vector<ModelSpec> models = {ModelSpec::defaults(ModelKind::logistic),
                                   ModelSpec::defaults(ModelKind::dtree)};
  std::vector<GridEntry> grid;  // overrides feature_set x resample x models when non-empty
  std::uint64_t seed = 42;
  std::string output_dir = "linkq-out";
  int workers = 1;
  bool save_models = true;
  bool export_folds = true;
};

inline std::string default_entry_name(ModelKind model, FeatureSet fs, Resample r) {
  return std::string(to_string(model)) + "-" + std::string(to_string(fs)) + "-" +
         std::string(to_string(r));
}

/// The grid entries a config describes.
inline std::vector<GridEntry> expand_grid(const PipelineConfig& cfg) {
  if (!cfg.grid.empty()) return cfg.grid;
  std::vector<GridEntry> out;
  for (const auto& m : cfg.models)
    out.push_back({default_entry_name(m.kind(), cfg.feature_set, cfg.resample), cfg.feature_set,
                   cfg.resample, m});
  return out;
}

inline void validate(const PipelineConfig& cfg) {
  if (cfg.trace_length < 1) throw ConfigError("trace.length must be positive");
  if (!std::isfinite(cfg.fill)) throw ConfigError("trace.fill must be finite");
  validate(cfg.window, cfg.trace_length);
  if (cfg.cv.k < 2) throw ConfigError("cv.k must be at least 2");
  if (cfg.cv.repeats < 1) throw ConfigError("cv.repeats must be at least 1");
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  switch (cfg.input.kind) {
    case InputKind::synthetic: {
      validate(cfg.input.synthetic);
      if (cfg.input.synthetic.trace_length != cfg.trace_length)
        throw ConfigError("input.synthetic.trace_length differs from trace.length");
      break;
    }
    case InputKind::csv:
    case InputKind::raw:
      if (cfg.input.path.empty()) throw ConfigError("input.path is required for csv/raw input");
      break;
  }
  const auto entries = expand_grid(cfg);
  if (entries.empty()) throw ConfigError("no models configured");
  std::set<std::string> names;
  for (const auto& e : entries) {
    validate(e.model);
    if (e.name.empty()) throw ConfigError("grid entry without a name");
    if (e.name.find_first_of("/\\") != std::string::npos)
      throw ConfigError("grid entry name '" + e.name + "' contains a path separator");
    if (!names.insert(e.name).second) throw ConfigError("duplicate grid entry name '" + e.name + "'");
  }
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json latent;
  for (auto c : kAllClasses)
    latent[std::string(to_string(c))] = {s.latent[index_of(c)].lo, s.latent[index_of(c)].hi};
  return {{"n_traces", s.n_traces},
          {"trace_length", s.trace_length},
          {"mixture",
           {{"bad", s.mixture[0]}, {"intermediate", s.mixture[1]}, {"good", s.mixture[2]}}},
          {"latent", latent},
          {"midpoint", s.midpoint},
          {"slope", s.slope},
          {"drift_ar", s.drift_ar},
          {"drift_sd", s.drift_sd},
          {"jitter_sd", s.jitter_sd}};
}

inline nlohmann::json to_json(const GridEntry& e) {
  return {{"name", e.name},
          {"feature_set", std::string(to_string(e.feature_set))},
          {"resample", std::string(to_string(e.resample))},
          {"model", to_json(e.model)}};
}

/// Fully resolved configuration, defaults included.
inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json input = {{"kind", std::string(to_string(c.input.kind))}};
  if (c.input.kind == InputKind::synthetic)
    input["synthetic"] = to_json(c.input.synthetic);
  else
    input["path"] = c.input.path;
  if (c.input.kind == InputKind::raw) input["seq_base"] = c.input.seq_base;

  nlohmann::json cv = {{"k", c.cv.k}, {"repeats", c.cv.repeats}, {"group_by_link", c.cv.group_by_link}};
  if (c.cv.seed) cv["seed"] = *c.cv.seed;
  auto models = nlohmann::json::array();
  for (const auto& m : c.models) models.push_back(to_json(m));
  auto grid = nlohmann::json::array();
  for (const auto& e : c.grid) grid.push_back(to_json(e));

  return {{"input", input},
          {"trace",
           {{"length", c.trace_length},
            {"fill", c.fill},
            {"error_rssi", c.error_policy == ErrorRssiPolicy::lost ? "lost" : "drop_row"}}},
          {"window",
           {{"w_history", c.window.w_history}, {"w_prr", c.window.w_prr}, {"stride", c.window.stride}}},
          {"feature_set", std::string(to_string(c.feature_set))},
          {"resample", std::string(to_string(c.resample))},
          {"resample_scope", std::string(to_string(c.resample_scope))},
          {"cv", cv},
          {"models", models},
          {"grid", grid},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"workers", c.workers},
          {"save_models", c.save_models},
          {"export_folds", c.export_folds}};
}

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a table/object");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

inline FeatureSet feature_set_from(const nlohmann::json& j) {
  const auto s = j.get<std::string>();
  const auto fs = parse_feature_set(s);
  if (!fs) throw ConfigError("unknown feature set '" + s + "'");
  return *fs;
}

inline Resample resample_from(const nlohmann::json& j) {
  const auto s = j.get<std::string>();
  const auto r = parse_resample(s);
  if (!r) throw ConfigError("unknown resample strategy '" + s + "'");
  return *r;
}

inline SynthSpec synth_from(const nlohmann::json& j) {
  check_keys(j, {"n_traces", "trace_length", "mixture", "latent", "midpoint", "slope", "drift_ar",
                 "drift_sd", "jitter_sd"},
             "input.synthetic");
  SynthSpec s;
  s.n_traces = j.value("n_traces", s.n_traces);
  s.trace_length = j.value("trace_length", s.trace_length);
  if (j.contains("mixture")) {
    const auto& m = j["mixture"];
    check_keys(m, {"bad", "intermediate", "good"}, "input.synthetic.mixture");
    s.mixture = {m.value("bad", 0.0), m.value("intermediate", 0.0), m.value("good", 0.0)};
  }
  if (j.contains("latent")) {
    const auto& l = j["latent"];
    check_keys(l, {"bad", "intermediate", "good"}, "input.synthetic.latent");
    for (auto c : kAllClasses) {
      const auto name = std::string(to_string(c));
      if (!l.contains(name)) continue;
      const auto v = l[name].get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("input.synthetic.latent." + name + " needs [lo, hi]");
      s.latent[index_of(c)] = {v[0], v[1]};
    }
  }
  s.midpoint = j.value("midpoint", s.midpoint);
  s.slope = j.value("slope", s.slope);
  s.drift_ar = j.value("drift_ar", s.drift_ar);
  s.drift_sd = j.value("drift_sd", s.drift_sd);
  s.jitter_sd = j.value("jitter_sd", s.jitter_sd);
  return s;
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  PipelineConfig c;
  try {
    check_keys(j, {"input", "trace", "window", "feature_set", "resample", "resample_scope", "cv",
                   "models", "grid", "seed", "output_dir", "workers", "save_models",
                   "export_folds"},
               "config");
    if (j.contains("trace")) {
      const auto& t = j["trace"];
      check_keys(t, {"length", "fill", "error_rssi"}, "trace");
      c.trace_length = t.value("length", c.trace_length);
      c.fill = t.value("fill", c.fill);
      const auto policy = t.value("error_rssi", std::string("lost"));
      if (policy == "lost")
        c.error_policy = ErrorRssiPolicy::lost;
      else if (policy == "drop_row")
        c.error_policy = ErrorRssiPolicy::drop_row;
      else
        throw ConfigError("trace.error_rssi must be 'lost' or 'drop_row'");
    }
    c.input.synthetic.trace_length = c.trace_length;
    if (j.contains("input")) {
      const auto& in = j["input"];
      check_keys(in, {"kind", "path", "seq_base", "synthetic"}, "input");
      const auto kind = in.value("kind", std::string("synthetic"));
      if (kind == "synthetic")
        c.input.kind = InputKind::synthetic;
      else if (kind == "csv")
        c.input.kind = InputKind::csv;
      else if (kind == "raw")
        c.input.kind = InputKind::raw;
      else
        throw ConfigError("input.kind must be synthetic, csv or raw");
      c.input.path = in.value("path", std::string());
      c.input.seq_base = in.value("seq_base", 0);
      if (in.contains("synthetic")) {
        auto synth = in["synthetic"];
        if (!synth.contains("trace_length")) synth["trace_length"] = c.trace_length;
        c.input.synthetic = detail::synth_from(synth);
      }
    }
    if (j.contains("window")) {
      const auto& w = j["window"];
      check_keys(w, {"w_history", "w_prr", "stride"}, "window");
      c.window.w_history = w.value("w_history", c.window.w_history);
      c.window.w_prr = w.value("w_prr", c.window.w_prr);
      c.window.stride = w.value("stride", c.window.stride);
    }
    if (j.contains("feature_set")) c.feature_set = detail::feature_set_from(j["feature_set"]);
    if (j.contains("resample")) c.resample = detail::resample_from(j["resample"]);
    if (j.contains("resample_scope")) {
      const auto s = j["resample_scope"].get<std::string>();
      if (s == "train")
        c.resample_scope = ResampleScope::train;
      else if (s == "all")
        c.resample_scope = ResampleScope::all;
      else
        throw ConfigError("resample_scope must be 'train' or 'all'");
    }
    if (j.contains("cv")) {
      const auto& cv = j["cv"];
      check_keys(cv, {"k", "seed", "repeats", "group_by_link"}, "cv");
      c.cv.k = cv.value("k", c.cv.k);
      c.cv.repeats = cv.value("repeats", c.cv.repeats);
      c.cv.group_by_link = cv.value("group_by_link", c.cv.group_by_link);
      if (cv.contains("seed")) c.cv.seed = cv["seed"].get<std::uint64_t>();
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j["models"]) c.models.push_back(model_spec_from_json(m));
    }
    if (j.contains("grid")) {
      for (const auto& e : j["grid"]) {
        check_keys(e, {"name", "feature_set", "resample", "model"}, "grid entry");
        GridEntry g;
        g.feature_set = e.contains("feature_set") ? detail::feature_set_from(e["feature_set"])
                                                  : c.feature_set;
        g.resample = e.contains("resample") ? detail::resample_from(e["resample"]) : c.resample;
        if (!e.contains("model")) throw ConfigError("grid entry needs a model");
        g.model = model_spec_from_json(e["model"]);
        g.name = e.value("name", default_entry_name(g.model.kind(), g.feature_set, g.resample));
        c.grid.push_back(std::move(g));
      }
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);
    c.save_models = j.value("save_models", c.save_models);
    c.export_folds = j.value("export_folds", c.export_folds);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  validate(c);
  return c;
}

/// Parses a TOML document into the equivalent JSON tree.
inline nlohmann::json toml_to_json(std::string_view text, const std::string& source = "config") {
  try {
    const auto table = toml::parse(text, source);
    std::ostringstream os;
    os << toml::json_formatter{table};
    return nlohmann::json::parse(os.str());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ':' << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

/// Loads a `.toml` or `.json` config file.
inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  nlohmann::json j;
  if (path.extension() == ".toml") {
    j = toml_to_json(text, path.string());
  } else {
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config '" + path.string() + "': " + e.what());
    }
  }
  return config_from_json(j);
}

/// LINKQ_SEED, when set, replaces the master seed.
inline void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* s = std::getenv("LINKQ_SEED"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw ConfigError("LINKQ_SEED must be an unsigned integer");
    cfg.seed = v;
  }
}

inline std::string config_hash(const PipelineConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
  return buf;
}

}  // namespace linkq
