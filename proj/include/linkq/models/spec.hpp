#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "linkq/error.hpp"

namespace linkq {

enum class ModelKind { majority, logistic, linear_svm, dtree, mlp };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::majority, ModelKind::logistic, ModelKind::linear_svm, ModelKind::dtree,
    ModelKind::mlp};

constexpr std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::majority: return "majority";
    case ModelKind::logistic: return "logistic";
    case ModelKind::linear_svm: return "linear_svm";
    case ModelKind::dtree: return "dtree";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : kAllModelKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct MajorityHyper {
  friend bool operator==(const MajorityHyper&, const MajorityHyper&) = default;
};

/// Multinomial softmax regression, full-batch gradient descent. A step that
/// increases the loss is rejected and the learning rate halved.
struct LogisticHyper {
  double learning_rate = 0.1;
  int max_epochs = 500;
  double tolerance = 1e-7;  // stop when an accepted step improves less
  double l2 = 1e-4;
  friend bool operator==(const LogisticHyper&, const LogisticHyper&) = default;
};

/// One-vs-rest linear SVM with squared hinge loss.
struct SvmHyper {
  double c = 1.0;
  double learning_rate = 0.1;
  int epochs = 500;
  friend bool operator==(const SvmHyper&, const SvmHyper&) = default;
};

/// CART with Gini impurity. Every node, leaves included, keeps at least
/// min_samples_per_node training rows.
struct TreeHyper {
  int max_depth = 4;
  int min_samples_per_node = 50;
  friend bool operator==(const TreeHyper&, const TreeHyper&) = default;
};

/// One hidden ReLU layer, softmax output, mini-batch SGD.
struct MlpHyper {
  int hidden = 32;
  int batch_size = 128;
  int epochs = 100;
  double learning_rate = 0.01;
  friend bool operator==(const MlpHyper&, const MlpHyper&) = default;
};

using Hyperparameters =
    std::variant<MajorityHyper, LogisticHyper, SvmHyper, TreeHyper, MlpHyper>;

struct ModelSpec {
  Hyperparameters hyper = TreeHyper{};
  std::uint64_t seed = 0;

  ModelKind kind() const { return static_cast<ModelKind>(hyper.index()); }

  static ModelSpec defaults(ModelKind kind, std::uint64_t seed = 0) {
    switch (kind) {
      case ModelKind::majority: return {MajorityHyper{}, seed};
      case ModelKind::logistic: return {LogisticHyper{}, seed};
      case ModelKind::linear_svm: return {SvmHyper{}, seed};
      case ModelKind::dtree: return {TreeHyper{}, seed};
      case ModelKind::mlp: return {MlpHyper{}, seed};
    }
    throw ConfigError("unknown model kind");
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& spec) {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("model hyperparameter ") + what + " out of range");
  };
  std::visit(
      [&](const auto& h) {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, LogisticHyper>) {
          positive(h.learning_rate > 0.0, "learning_rate");
          positive(h.max_epochs >= 1, "max_epochs");
          positive(h.tolerance >= 0.0, "tolerance");
          positive(h.l2 >= 0.0, "l2");
        } else if constexpr (std::is_same_v<H, SvmHyper>) {
          positive(h.c > 0.0, "c");
          positive(h.learning_rate > 0.0, "learning_rate");
          positive(h.epochs >= 1, "epochs");
        } else if constexpr (std::is_same_v<H, TreeHyper>) {
          positive(h.max_depth >= 1, "max_depth");
          positive(h.min_samples_per_node >= 1, "min_samples_per_node");
        } else if constexpr (std::is_same_v<H, MlpHyper>) {
          positive(h.hidden >= 1, "hidden");
          positive(h.batch_size >= 1, "batch_size");
          positive(h.epochs >= 1, "epochs");
          positive(h.learning_rate > 0.0, "learning_rate");
        }
      },
      spec.hyper);
}

inline nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(spec.kind()));
  std::visit(
      [&](const auto& h) {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, LogisticHyper>) {
          j["learning_rate"] = h.learning_rate;
          j["max_epochs"] = h.max_epochs;
          j["tolerance"] = h.tolerance;
          j["l2"] = h.l2;
        } else if constexpr (std::is_same_v<H, SvmHyper>) {
          j["c"] = h.c;
          j["learning_rate"] = h.learning_rate;
          j["epochs"] = h.epochs;
        } else if constexpr (std::is_same_v<H, TreeHyper>) {
          j["max_depth"] = h.max_depth;
          j["min_samples_per_node"] = h.min_samples_per_node;
        } else if constexpr (std::is_same_v<H, MlpHyper>) {
          j["hidden"] = h.hidden;
          j["batch_size"] = h.batch_size;
          j["epochs"] = h.epochs;
          j["learning_rate"] = h.learning_rate;
        }
      },
      spec.hyper);
  j["seed"] = spec.seed;
  return j;
}

/// Parses a model spec; keys that are not hyperparameters of the kind are
/// rejected so typos do not silently fall back to defaults.
inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("model spec needs a string 'kind'");
  const auto kind = parse_model_kind(j["kind"].get<std::string>());
  if (!kind) throw ConfigError("unknown model kind '" + j["kind"].get<std::string>() + "'");
  ModelSpec spec = ModelSpec::defaults(*kind);
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") continue;
      if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
        continue;
      }
      bool known = false;
      std::visit(
          [&](auto& h) {
            using H = std::decay_t<decltype(h)>;
            auto take = [&](const char* name, auto& field) {
              if (key == name) {
                field = value.get<std::decay_t<decltype(field)>>();
                known = true;
              }
            };
            if constexpr (std::is_same_v<H, LogisticHyper>) {
              take("learning_rate", h.learning_rate);
              take("max_epochs", h.max_epochs);
              take("tolerance", h.tolerance);
              take("l2", h.l2);
            } else if constexpr (std::is_same_v<H, SvmHyper>) {
              take("c", h.c);
              take("learning_rate", h.learning_rate);
              take("epochs", h.epochs);
            } else if constexpr (std::is_same_v<H, TreeHyper>) {
              take("max_depth", h.max_depth);
              take("min_samples_per_node", h.min_samples_per_node);
            } else if constexpr (std::is_same_v<H, MlpHyper>) {
              take("hidden", h.hidden);
              take("batch_size", h.batch_size);
              take("epochs", h.epochs);
              take("learning_rate", h.learning_rate);
            }
          },
          spec.hyper);
      if (!known)
        throw ConfigError("unknown hyperparameter '" + key + "' for model kind '" +
                          std::string(to_string(*kind)) + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec value: ") + e.what());
  }
  validate(spec);
  return spec;
}

}  // namespace linkq
