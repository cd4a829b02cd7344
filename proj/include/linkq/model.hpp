#pragma once

// Train / predict / score over every supported classifier, plus the versioned
// JSON model document.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "linkq/dataset.hpp"
#include "linkq/error.hpp"
#include "linkq/features.hpp"
#include "linkq/link_class.hpp"
#include "linkq/models/common.hpp"
#include "linkq/models/linear.hpp"
#include "linkq/models/mlp.hpp"
#include "linkq/models/spec.hpp"
#include "linkq/models/tree.hpp"

namespace linkq {

inline constexpr int kModelFormatVersion = 1;

/// Fixed scores: class frequencies for the majority baseline, or a one-hot
/// vector when training saw a single class.
struct ConstantParams {
  PerClass<double> scores{};
  friend bool operator==(const ConstantParams&, const ConstantParams&) = default;
};

using ModelParams = std::variant<ConstantParams, LinearParams, TreeParams, MlpParams>;

struct TrainedModel {
  ModelSpec spec;
  std::size_t n_features = 0;
  PerClass<std::size_t> train_counts{};
  std::optional<Standardizer> standardizer;
  ModelParams params;
  double training_time_seconds = 0.0;
  std::vector<double> loss_history;  // diagnostics only; not serialized

  ModelKind kind() const { return spec.kind(); }
};

/// Whether a kind is trained on standardized features.
constexpr bool uses_standardization(ModelKind k) {
  return k == ModelKind::logistic || k == ModelKind::linear_svm || k == ModelKind::mlp;
}

inline TrainedModel fit(const ModelSpec& spec, const Dataset& train) {
  validate(spec);
  if (train.empty()) throw DataError("fit: empty training set");
  train.validate();

  TrainedModel model;
  model.spec = spec;
  model.n_features = train.cols();
  model.train_counts = train.class_counts();
  const auto n = static_cast<double>(train.rows());
  std::size_t present = 0;
  for (auto c : model.train_counts) present += c > 0 ? 1 : 0;

  if (spec.kind() == ModelKind::majority || present == 1) {
    const auto start = std::chrono::steady_clock::now();
    ConstantParams p;
    if (spec.kind() == ModelKind::majority) {
      for (std::size_t c = 0; c < kNumClasses; ++c)
        p.scores[c] = static_cast<double>(model.train_counts[c]) / n;
    } else {
      for (std::size_t c = 0; c < kNumClasses; ++c) p.scores[c] = model.train_counts[c] > 0;
    }
    model.params = p;
    model.training_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return model;
  }

  const Dataset* data = &train;
  Dataset scaled;
  if (uses_standardization(spec.kind())) {
    model.standardizer = fit_standardizer(train);
    scaled = apply_standardizer(*model.standardizer, train);
    data = &scaled;
  }

  const auto start = std::chrono::steady_clock::now();
  switch (spec.kind()) {
    case ModelKind::logistic: {
      auto f = fit_logistic(*data, std::get<LogisticHyper>(spec.hyper));
      model.params = std::move(f.params);
      model.loss_history = std::move(f.loss_history);
      break;
    }
    case ModelKind::linear_svm:
      model.params = fit_linear_svm(*data, std::get<SvmHyper>(spec.hyper));
      break;
    case ModelKind::dtree:
      model.params = fit_tree(*data, std::get<TreeHyper>(spec.hyper));
      break;
    case ModelKind::mlp: {
      auto f = fit_mlp(*data, std::get<MlpHyper>(spec.hyper), spec.seed);
      model.params = std::move(f.params);
      model.loss_history = std::move(f.loss_history);
      break;
    }
    case ModelKind::majority:
      break;
  }
  model.training_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return model;
}

/// Per-class scores, summing to one. Linear SVM margins go through a softmax
/// (uncalibrated); trees report the training class proportions of the leaf.
inline ScoreVector score(const TrainedModel& model, std::span<const double> x) {
  if (x.size() != model.n_features)
    throw DimensionError("score: expected " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.size()));
  std::vector<double> scaled;
  if (model.standardizer) {
    scaled.resize(x.size());
    model.standardizer->apply_row(x, scaled);
    x = scaled;
  }
  return std::visit(
      [&](const auto& p) -> ScoreVector {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantParams>) return p.scores;
        if constexpr (std::is_same_v<P, LinearParams>) return softmax(p.margins(x));
        if constexpr (std::is_same_v<P, TreeParams>) return p.leaf_for(x).proportion;
        if constexpr (std::is_same_v<P, MlpParams>) return softmax(p.logits(x));
      },
      model.params);
}

inline ScoreVector score(const TrainedModel& model, const FeatureVector& x) {
  return score(model, std::span<const double>(x.values));
}

/// argmax of score(); ties resolve toward bad, then intermediate.
inline LinkClass predict(const TrainedModel& model, std::span<const double> x) {
  return argmax_class(score(model, x));
}

inline LinkClass predict(const TrainedModel& model, const FeatureVector& x) {
  return predict(model, std::span<const double>(x.values));
}

inline std::vector<ScoreVector> score_all(const TrainedModel& model, const Dataset& data) {
  std::vector<ScoreVector> out;
  out.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out.push_back(score(model, data.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class T>
std::vector<T> vec_from(const nlohmann::json& j) {
  return j.get<std::vector<T>>();
}

inline PerClass<double> per_class_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kNumClasses) throw DataError("model: per-class array of wrong length");
  return {v[0], v[1], v[2]};
}

inline nlohmann::json per_class_json(const PerClass<double>& v) {
  return nlohmann::json::array({v[0], v[1], v[2]});
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = "linkq-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(m.kind()));
  j["hyperparameters"] = to_json(m.spec);
  j["class_order"] = {"bad", "intermediate", "good"};
  j["n_features"] = m.n_features;
  j["train_counts"] = {m.train_counts[0], m.train_counts[1], m.train_counts[2]};
  j["training_time_seconds"] = m.training_time_seconds;
  if (m.standardizer)
    j["standardizer"] = {{"mean", m.standardizer->mean}, {"sd", m.standardizer->sd}};
  else
    j["standardizer"] = nullptr;

  nlohmann::json p;
  std::visit(
      [&](const auto& v) {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, ConstantParams>) {
          p["type"] = "constant";
          p["scores"] = detail::per_class_json(v.scores);
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          p["type"] = "linear";
          p["weights"] = v.w;
          p["bias"] = detail::per_class_json(v.b);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          p["type"] = "tree";
          auto nodes = nlohmann::json::array();
          for (const auto& n : v.nodes)
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"depth", n.depth},
                             {"n_samples", n.n_samples},
                             {"proportion", detail::per_class_json(n.proportion)}});
          p["nodes"] = std::move(nodes);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          p["type"] = "mlp";
          p["hidden"] = v.hidden;
          p["w1"] = v.w1;
          p["b1"] = v.b1;
          p["w2"] = v.w2;
          p["b2"] = detail::per_class_json(v.b2);
        }
      },
      m.params);
  j["parameters"] = std::move(p);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "linkq-model")
      throw DataError("not a linkq model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format version " + j.at("version").dump());
    TrainedModel m;
    m.spec = model_spec_from_json(j.at("hyperparameters"));
    m.n_features = j.at("n_features").get<std::size_t>();
    const auto counts = j.at("train_counts").get<std::vector<std::size_t>>();
    if (counts.size() != kNumClasses) throw DataError("model: bad train_counts");
    m.train_counts = {counts[0], counts[1], counts[2]};
    m.training_time_seconds = j.at("training_time_seconds").get<double>();
    if (!j.at("standardizer").is_null()) {
      Standardizer s{detail::vec_from<double>(j["standardizer"].at("mean")),
                     detail::vec_from<double>(j["standardizer"].at("sd"))};
      if (s.mean.size() != m.n_features || s.sd.size() != m.n_features)
        throw DataError("model: standardizer dimension mismatch");
      m.standardizer = std::move(s);
    }
    const auto& p = j.at("parameters");
    const auto type = p.at("type").get<std::string>();
    if (type == "constant") {
      m.params = ConstantParams{detail::per_class_from(p.at("scores"))};
    } else if (type == "linear") {
      LinearParams lp{m.n_features, detail::vec_from<double>(p.at("weights")),
                      detail::per_class_from(p.at("bias"))};
      if (lp.w.size() != kNumClasses * m.n_features) throw DataError("model: bad weight count");
      m.params = std::move(lp);
    } else if (type == "tree") {
      TreeParams tp;
      for (const auto& n : p.at("nodes")) {
        tp.nodes.push_back(TreeNode{n.at("feature").get<int>(), n.at("threshold").get<double>(),
                                    n.at("left").get<int>(), n.at("right").get<int>(),
                                    n.at("depth").get<int>(), n.at("n_samples").get<std::size_t>(),
                                    detail::per_class_from(n.at("proportion"))});
      }
      const auto count = static_cast<int>(tp.nodes.size());
      if (count == 0) throw DataError("model: empty tree");
      for (const auto& n : tp.nodes)
        if (!n.is_leaf() && (n.feature >= static_cast<int>(m.n_features) || n.left <= 0 ||
                             n.right <= 0 || n.left >= count || n.right >= count))
          throw DataError("model: malformed tree node");
      m.params = std::move(tp);
    } else if (type == "mlp") {
      MlpParams mp{m.n_features, p.at("hidden").get<std::size_t>(),
                   detail::vec_from<double>(p.at("w1")), detail::vec_from<double>(p.at("b1")),
                   detail::vec_from<double>(p.at("w2")), detail::per_class_from(p.at("b2"))};
      if (mp.w1.size() != mp.hidden * m.n_features || mp.b1.size() != mp.hidden ||
          mp.w2.size() != kNumClasses * mp.hidden)
        throw DataError("model: MLP dimension mismatch");
      m.params = std::move(mp);
    } else {
      throw DataError("model: unknown parameter type '" + type + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace linkq
