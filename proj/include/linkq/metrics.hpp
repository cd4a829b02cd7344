#pragma once

// Per-class evaluation: confusion matrix, precision / recall / F1, weighted
// and macro aggregates, and one-vs-rest ROC curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkq/dataset.hpp"
#include "linkq/error.hpp"
#include "linkq/link_class.hpp"
#include "linkq/model.hpp"
#include "linkq/models/common.hpp"

namespace linkq {

/// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t operator()(LinkClass truth, LinkClass predicted) const {
    return counts[index_of(truth)][index_of(predicted)];
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
    return t;
  }

  std::uint64_t row_sum(std::size_t c) const {
    return std::accumulate(counts[c].begin(), counts[c].end(), std::uint64_t{0});
  }

  std::uint64_t col_sum(std::size_t c) const {
    std::uint64_t s = 0;
    for (const auto& row : counts) s += row[c];
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (std::size_t i = 0; i < kNumClasses; ++i)
      for (std::size_t j = 0; j < kNumClasses; ++j) counts[i][j] += o.counts[i][j];
    return *this;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const LinkClass> y_true,
                                 std::span<const LinkClass> y_pred) {
  if (y_true.size() != y_pred.size())
    throw DimensionError("confusion: " + std::to_string(y_true.size()) + " labels but " +
                         std::to_string(y_pred.size()) + " predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++cm.counts[index_of(y_true[i])][index_of(y_pred[i])];
  return cm;
}

struct ClassMetrics {
  PerClass<double> precision{};
  PerClass<double> recall{};
  PerClass<double> f1{};
  PerClass<std::uint64_t> support{};
  // A zero denominator yields 0 and sets the matching flag.
  PerClass<bool> precision_undefined{};
  PerClass<bool> recall_undefined{};

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

inline ClassMetrics class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const auto predicted = cm.col_sum(c);
    const auto actual = cm.row_sum(c);
    m.support[c] = actual;
    m.precision_undefined[c] = predicted == 0;
    m.recall_undefined[c] = actual == 0;
    m.precision[c] = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    m.recall[c] = actual == 0 ? 0.0 : tp / static_cast<double>(actual);
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
  }
  return m;
}

struct AggregateMetrics {
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  friend bool operator==(const AggregateMetrics&, const AggregateMetrics&) = default;
};

/// Weighted aggregates use class support as weights; macro is the plain mean.
inline AggregateMetrics aggregate(const ConfusionMatrix& cm, const ClassMetrics& m) {
  AggregateMetrics a;
  const auto total = cm.total();
  if (total == 0) return a;
  std::uint64_t diag = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) diag += cm.counts[c][c];
  a.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  const auto n = static_cast<double>(total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double w = static_cast<double>(m.support[c]) / n;
    a.weighted_precision += w * m.precision[c];
    a.weighted_recall += w * m.recall[c];
    a.weighted_f1 += w * m.f1[c];
    a.macro_precision += m.precision[c] / kNumClasses;
    a.macro_recall += m.recall[c] / kNumClasses;
    a.macro_f1 += m.f1[c] / kNumClasses;
  }
  return a;
}

// ---------------------------------------------------------------------------
// ROC

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
  bool defined = false;  // false when positives or negatives are absent

  friend bool operator==(const RocCurve&, const RocCurve&) = default;
};

/// Threshold sweep over the distinct scores (descending); tied scores form a
/// single step, so the trapezoidal area counts ties as one half.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw DimensionError("roc_curve: size mismatch");
  std::uint64_t n_pos = 0;
  for (auto p : positive) n_pos += p ? 1 : 0;
  const std::uint64_t n_neg = positive.size() - n_pos;
  RocCurve curve;
  if (n_pos == 0 || n_neg == 0) return curve;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  curve.defined = true;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (positive[order[i]])
        ++tp;
      else
        ++fp;
      ++i;
    }
    const double x = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double y = static_cast<double>(tp) / static_cast<double>(n_pos);
    curve.auc += (x - curve.fpr.back()) * (y + curve.tpr.back()) * 0.5;
    curve.fpr.push_back(x);
    curve.tpr.push_back(y);
  }
  return curve;
}

/// Keeps at most max_points points (always the first and last), evenly
/// spaced by index. The AUC is left untouched.
inline RocCurve thin_curve(const RocCurve& curve, std::size_t max_points) {
  if (curve.fpr.size() <= max_points || max_points < 2) return curve;
  RocCurve out{{}, {}, curve.auc, curve.defined};
  const std::size_t last = curve.fpr.size() - 1;
  for (std::size_t k = 0; k < max_points; ++k) {
    const std::size_t i = k * last / (max_points - 1);
    out.fpr.push_back(curve.fpr[i]);
    out.tpr.push_back(curve.tpr[i]);
  }
  return out;
}

struct RocResult {
  PerClass<RocCurve> per_class;
  RocCurve micro;
  double macro_auc = 0.0;
  bool macro_defined = false;

  friend bool operator==(const RocResult&, const RocResult&) = default;
};

inline RocResult roc_ovr(std::span<const LinkClass> y_true, std::span<const ScoreVector> scores) {
  if (y_true.size() != scores.size()) throw DimensionError("roc_ovr: size mismatch");
  const std::size_t n = y_true.size();
  RocResult r;
  std::vector<double> s(n);
  std::vector<std::uint8_t> pos(n);
  std::vector<double> pooled_s;
  std::vector<std::uint8_t> pooled_pos;
  pooled_s.reserve(n * kNumClasses);
  pooled_pos.reserve(n * kNumClasses);
  double auc_sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = scores[i][c];
      pos[i] = index_of(y_true[i]) == c;
    }
    pooled_s.insert(pooled_s.end(), s.begin(), s.end());
    pooled_pos.insert(pooled_pos.end(), pos.begin(), pos.end());
    r.per_class[c] = roc_curve(s, pos);
    if (r.per_class[c].defined) {
      auc_sum += r.per_class[c].auc;
      ++defined;
    }
  }
  r.micro = roc_curve(pooled_s, pooled_pos);
  r.macro_defined = defined > 0;
  r.macro_auc = defined > 0 ? auc_sum / static_cast<double>(defined) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Fold evaluation and pooling

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kMaxRocPoints = 512;

struct FoldMetrics {
  int repeat = 0;
  int fold = -1;  // -1 for pooled results
  std::uint64_t n_train = 0;
  std::uint64_t n_eval = 0;
  PerClass<std::uint64_t> train_counts{};
  double training_time_seconds = 0.0;
  ConfusionMatrix cm;
  ClassMetrics per_class;
  AggregateMetrics aggregate;
  RocResult roc;  // curves thinned to kMaxRocPoints

  friend bool operator==(const FoldMetrics&, const FoldMetrics&) = default;
};

struct Predictions {
  std::vector<LinkClass> y_true;
  std::vector<LinkClass> y_pred;
  std::vector<ScoreVector> scores;
};

struct FoldOutcome {
  FoldMetrics metrics;
  Predictions predictions;
};

inline FoldMetrics metrics_from(const Predictions& p) {
  FoldMetrics m;
  m.n_eval = p.y_true.size();
  m.cm = confusion(p.y_true, p.y_pred);
  m.per_class = class_metrics(m.cm);
  m.aggregate = aggregate(m.cm, m.per_class);
  m.roc = roc_ovr(p.y_true, p.scores);
  for (auto& c : m.roc.per_class) c = thin_curve(c, kMaxRocPoints);
  m.roc.micro = thin_curve(m.roc.micro, kMaxRocPoints);
  return m;
}

struct FoldInfo {
  int repeat = 0;
  int fold = 0;
  std::uint64_t n_train = 0;
  PerClass<std::uint64_t> train_counts{};
};

inline FoldOutcome evaluate_fold(const TrainedModel& model, const Dataset& eval,
                                 const FoldInfo& info = {}) {
  FoldOutcome out;
  auto& p = out.predictions;
  p.y_true = eval.y;
  p.scores = score_all(model, eval);
  p.y_pred.reserve(p.scores.size());
  for (const auto& s : p.scores) p.y_pred.push_back(argmax_class(s));
  out.metrics = metrics_from(p);
  out.metrics.repeat = info.repeat;
  out.metrics.fold = info.fold;
  out.metrics.n_train = info.n_train;
  out.metrics.train_counts = info.train_counts;
  out.metrics.training_time_seconds = model.training_time_seconds;
  return out;
}

struct Dispersion {
  double mean = 0.0;
  double sd = 0.0;  // population sd over folds
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Dispersion&, const Dispersion&) = default;
};

struct EvaluationReport {
  int schema_version = kReportSchemaVersion;
  std::string name;
  nlohmann::json provenance = nlohmann::json::object();
  FoldMetrics pooled;
  std::vector<FoldMetrics> folds;
  Dispersion accuracy;
  Dispersion weighted_f1;
  Dispersion intermediate_f1;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline Dispersion dispersion_of(const std::vector<double>& v) {
  Dispersion d;
  if (v.empty()) return d;
  d.min = *std::min_element(v.begin(), v.end());
  d.max = *std::max_element(v.begin(), v.end());
  for (double x : v) d.mean += x;
  d.mean /= static_cast<double>(v.size());
  for (double x : v) d.sd += (x - d.mean) * (x - d.mean);
  d.sd = std::sqrt(d.sd / static_cast<double>(v.size()));
  return d;
}

/// Pools the predictions of all folds and recomputes every metric on the
/// pool; per-fold metrics are kept alongside for dispersion.
inline EvaluationReport merge_reports(std::span<const FoldOutcome> folds) {
  if (folds.empty()) throw DataError("merge_reports: no folds");
  Predictions pooled;
  EvaluationReport r;
  std::uint64_t n_train = 0;
  PerClass<std::uint64_t> train_counts{};
  double time = 0.0;
  std::vector<double> acc, wf1, if1;
  for (const auto& f : folds) {
    const auto& p = f.predictions;
    pooled.y_true.insert(pooled.y_true.end(), p.y_true.begin(), p.y_true.end());
    pooled.y_pred.insert(pooled.y_pred.end(), p.y_pred.begin(), p.y_pred.end());
    pooled.scores.insert(pooled.scores.end(), p.scores.begin(), p.scores.end());
    n_train += f.metrics.n_train;
    for (std::size_t c = 0; c < kNumClasses; ++c) train_counts[c] += f.metrics.train_counts[c];
    time += f.metrics.training_time_seconds;
    r.folds.push_back(f.metrics);
    acc.push_back(f.metrics.aggregate.accuracy);
    wf1.push_back(f.metrics.aggregate.weighted_f1);
    if1.push_back(f.metrics.per_class.f1[index_of(LinkClass::intermediate)]);
  }
  if (folds.size() == 1) {
    r.pooled = folds[0].metrics;
  } else {
    r.pooled = metrics_from(pooled);
    r.pooled.n_train = n_train;
    r.pooled.train_counts = train_counts;
    r.pooled.training_time_seconds = time;
  }
  r.accuracy = dispersion_of(acc);
  r.weighted_f1 = dispersion_of(wf1);
  r.intermediate_f1 = dispersion_of(if1);
  return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class T>
nlohmann::json pc(const PerClass<T>& v) {
  return nlohmann::json::array({v[0], v[1], v[2]});
}

template <class T>
PerClass<T> pc_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<T>>();
  if (v.size() != kNumClasses) throw DataError("report: per-class array of wrong length");
  return {v[0], v[1], v[2]};
}

inline nlohmann::json curve_json(const RocCurve& c) {
  return {{"fpr", c.fpr},
          {"tpr", c.tpr},
          {"auc", c.defined ? nlohmann::json(c.auc) : nlohmann::json(nullptr)},
          {"defined", c.defined}};
}

inline RocCurve curve_from(const nlohmann::json& j) {
  RocCurve c;
  c.fpr = j.at("fpr").get<std::vector<double>>();
  c.tpr = j.at("tpr").get<std::vector<double>>();
  c.defined = j.at("defined").get<bool>();
  c.auc = c.defined ? j.at("auc").get<double>() : 0.0;
  return c;
}

inline nlohmann::json dispersion_json(const Dispersion& d) {
  return {{"mean", d.mean}, {"sd", d.sd}, {"min", d.min}, {"max", d.max}};
}

inline Dispersion dispersion_from(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("sd").get<double>(), j.at("min").get<double>(),
          j.at("max").get<double>()};
}

}  // namespace detail

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
  auto j = nlohmann::json::array();
  for (const auto& row : cm.counts) j.push_back(row);
  return j;
}

inline nlohmann::json to_json(const FoldMetrics& m) {
  using detail::pc;
  nlohmann::json roc = {{"bad", detail::curve_json(m.roc.per_class[0])},
                        {"intermediate", detail::curve_json(m.roc.per_class[1])},
                        {"good", detail::curve_json(m.roc.per_class[2])},
                        {"micro", detail::curve_json(m.roc.micro)},
                        {"macro_auc", m.roc.macro_defined ? nlohmann::json(m.roc.macro_auc)
                                                          : nlohmann::json(nullptr)}};
  return {{"repeat", m.repeat},
          {"fold", m.fold},
          {"n_train", m.n_train},
          {"n_eval", m.n_eval},
          {"train_counts", pc(m.train_counts)},
          {"training_time_seconds", m.training_time_seconds},
          {"confusion_matrix", to_json(m.cm)},
          {"per_class",
           {{"precision", pc(m.per_class.precision)},
            {"recall", pc(m.per_class.recall)},
            {"f1", pc(m.per_class.f1)},
            {"support", pc(m.per_class.support)},
            {"precision_undefined", pc(m.per_class.precision_undefined)},
            {"recall_undefined", pc(m.per_class.recall_undefined)}}},
          {"aggregate",
           {{"accuracy", m.aggregate.accuracy},
            {"weighted_precision", m.aggregate.weighted_precision},
            {"weighted_recall", m.aggregate.weighted_recall},
            {"weighted_f1", m.aggregate.weighted_f1},
            {"macro_precision", m.aggregate.macro_precision},
            {"macro_recall", m.aggregate.macro_recall},
            {"macro_f1", m.aggregate.macro_f1}}},
          {"roc", std::move(roc)}};
}

inline FoldMetrics fold_metrics_from_json(const nlohmann::json& j) {
  using detail::pc_from;
  FoldMetrics m;
  m.repeat = j.at("repeat").get<int>();
  m.fold = j.at("fold").get<int>();
  m.n_train = j.at("n_train").get<std::uint64_t>();
  m.n_eval = j.at("n_eval").get<std::uint64_t>();
  m.train_counts = pc_from<std::uint64_t>(j.at("train_counts"));
  m.training_time_seconds = j.at("training_time_seconds").get<double>();
  const auto& cm = j.at("confusion_matrix");
  for (std::size_t i = 0; i < kNumClasses; ++i)
    m.cm.counts[i] = pc_from<std::uint64_t>(cm.at(i));
  const auto& pcj = j.at("per_class");
  m.per_class.precision = pc_from<double>(pcj.at("precision"));
  m.per_class.recall = pc_from<double>(pcj.at("recall"));
  m.per_class.f1 = pc_from<double>(pcj.at("f1"));
  m.per_class.support = pc_from<std::uint64_t>(pcj.at("support"));
  m.per_class.precision_undefined = pc_from<bool>(pcj.at("precision_undefined"));
  m.per_class.recall_undefined = pc_from<bool>(pcj.at("recall_undefined"));
  const auto& a = j.at("aggregate");
  m.aggregate = {a.at("accuracy").get<double>(),        a.at("weighted_precision").get<double>(),
                 a.at("weighted_recall").get<double>(), a.at("weighted_f1").get<double>(),
                 a.at("macro_precision").get<double>(), a.at("macro_recall").get<double>(),
                 a.at("macro_f1").get<double>()};
  const auto& roc = j.at("roc");
  m.roc.per_class = {detail::curve_from(roc.at("bad")), detail::curve_from(roc.at("intermediate")),
                     detail::curve_from(roc.at("good"))};
  m.roc.micro = detail::curve_from(roc.at("micro"));
  m.roc.macro_defined = !roc.at("macro_auc").is_null();
  m.roc.macro_auc = m.roc.macro_defined ? roc.at("macro_auc").get<double>() : 0.0;
  return m;
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  auto folds = nlohmann::json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  return {{"format", "linkq-report"},
          {"schema_version", r.schema_version},
          {"name", r.name},
          {"provenance", r.provenance},
          {"pooled", to_json(r.pooled)},
          {"folds", std::move(folds)},
          {"dispersion",
           {{"accuracy", detail::dispersion_json(r.accuracy)},
            {"weighted_f1", detail::dispersion_json(r.weighted_f1)},
            {"intermediate_f1", detail::dispersion_json(r.intermediate_f1)}}}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "linkq-report") throw DataError("not a linkq report");
    EvaluationReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw DataError("unsupported report schema version " + std::to_string(r.schema_version));
    r.name = j.at("name").get<std::string>();
    r.provenance = j.at("provenance");
    r.pooled = fold_metrics_from_json(j.at("pooled"));
    for (const auto& f : j.at("folds")) r.folds.push_back(fold_metrics_from_json(f));
    const auto& d = j.at("dispersion");
    r.accuracy = detail::dispersion_from(d.at("accuracy"));
    r.weighted_f1 = detail::dispersion_from(d.at("weighted_f1"));
    r.intermediate_f1 = detail::dispersion_from(d.at("intermediate_f1"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

/// ROC points as `curve,fpr,tpr` rows.
inline void write_roc_csv(std::ostream& out, const RocResult& roc) {
  out << "curve,fpr,tpr\n";
  auto emit = [&](std::string_view name, const RocCurve& c) {
    for (std::size_t i = 0; i < c.fpr.size(); ++i)
      out << name << ',' << c.fpr[i] << ',' << c.tpr[i] << '\n';
  };
  for (std::size_t c = 0; c < kNumClasses; ++c) emit(to_string(class_at(c)), roc.per_class[c]);
  emit("micro", roc.micro);
}

/// Bar-chart data as `metric,class,percent` rows (one decimal).
inline void write_bars_csv(std::ostream& out, const FoldMetrics& m) {
  out << "metric,class,percent\n";
  char buf[32];
  auto emit = [&](std::string_view metric, std::string_view cls, double v) {
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    out << metric << ',' << cls << ',' << buf << '\n';
  };
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto cls = to_string(class_at(c));
    emit("precision", cls, m.per_class.precision[c]);
    emit("recall", cls, m.per_class.recall[c]);
    emit("f1", cls, m.per_class.f1[c]);
  }
  emit("precision", "weighted", m.aggregate.weighted_precision);
  emit("recall", "weighted", m.aggregate.weighted_recall);
  emit("f1", "weighted", m.aggregate.weighted_f1);
  emit("accuracy", "all", m.aggregate.accuracy);
}

}  // namespace linkq
