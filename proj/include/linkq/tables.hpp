#pragma once

// Reruns the feature-set (II), resampling (III) and model (IV) comparisons
// and renders them beside the published values.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkq/config.hpp"
#include "linkq/pipeline.hpp"
#include "linkq/published.hpp"

namespace linkq {

inline bool is_table_id(std::string_view which) {
  return which == "II" || which == "III" || which == "IV";
}

struct TableEntry {
  GridEntry entry;
  std::string variant;  // key into the published rows
};

namespace detail {

inline ModelSpec configured_model(const PipelineConfig& cfg, ModelKind kind) {
  for (const auto& m : cfg.models)
    if (m.kind() == kind) return m;
  return ModelSpec::defaults(kind);
}

}  // namespace detail

/// Grid of one comparison table. Hyperparameters come from cfg.models when a
/// model of the same kind is configured there.
inline std::vector<TableEntry> table_grid(std::string_view which, const PipelineConfig& cfg) {
  std::vector<TableEntry> out;
  auto add = [&](ModelKind kind, FeatureSet fs, Resample r, std::string variant) {
    GridEntry e{std::string(which) + "-" + default_entry_name(kind, fs, r), fs, r,
                detail::configured_model(cfg, kind)};
    out.push_back({std::move(e), std::move(variant)});
  };
  if (which == "II") {
    for (auto kind : {ModelKind::logistic, ModelKind::dtree})
      for (auto fs : kAllFeatureSets) add(kind, fs, Resample::ros, std::string(to_string(fs)));
  } else if (which == "III") {
    for (auto kind : {ModelKind::logistic, ModelKind::dtree})
      for (auto r : {Resample::none, Resample::rus, Resample::ros})
        add(kind, FeatureSet::combo3, r, std::string(to_string(r)));
  } else if (which == "IV") {
    for (auto kind : {ModelKind::majority, ModelKind::logistic, ModelKind::linear_svm,
                      ModelKind::dtree, ModelKind::mlp})
      add(kind, FeatureSet::combo3, Resample::ros, "");
  } else {
    throw ConfigError("unknown table '" + std::string(which) + "' (expected II, III or IV)");
  }
  return out;
}

struct TableLine {
  TableEntry entry;
  EvaluationReport report;
  std::optional<published::Row> published;
};

struct TableResult {
  std::string which;
  bool comparable = false;  // false when the input is not the published trace-set
  ResampleScope scope = ResampleScope::train;
  std::vector<TableLine> lines;
};

inline TableResult reproduce_table(std::string_view which, PipelineConfig cfg, const Corpus& corpus,
                                   bool comparable) {
  const auto entries = table_grid(which, cfg);
  std::vector<GridEntry> grid;
  for (const auto& e : entries) grid.push_back(e.entry);
  cfg.grid = grid;
  cfg.save_models = false;
  validate(cfg);
  auto results = run_grid(cfg, corpus, grid);

  TableResult t{std::string(which), comparable, cfg.resample_scope, {}};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& report = results[i].report;
    report.provenance = provenance_of(cfg, entries[i].entry);
    t.lines.push_back({entries[i], std::move(report),
                       published::find(which, to_string(entries[i].entry.model.kind()),
                                       entries[i].variant)});
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace detail {

// Our per-class values reordered to the published (good, intermediate, bad).
inline published::Scores as_scores(double weighted, const PerClass<double>& v) {
  return {100.0 * weighted, 100.0 * v[index_of(LinkClass::good)],
          100.0 * v[index_of(LinkClass::intermediate)], 100.0 * v[index_of(LinkClass::bad)]};
}

inline std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string fmt_delta(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", std::abs(v) < 0.05 ? 0.0 : v);
  return buf;
}

inline std::string fmt_scores(const published::Scores& s) {
  return fmt1(s.weighted) + " (" + fmt1(s.good) + ", " + fmt1(s.intermediate) + ", " +
         fmt1(s.bad) + ")";
}

inline std::string fmt_delta_scores(const published::Scores& a, const published::Scores& b) {
  return fmt_delta(a.weighted - b.weighted) + " (" + fmt_delta(a.good - b.good) + ", " +
         fmt_delta(a.intermediate - b.intermediate) + ", " + fmt_delta(a.bad - b.bad) + ")";
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

struct MetricView {
  const char* name;
  published::Scores ours;
  std::optional<published::Scores> ref;
};

inline std::vector<MetricView> metric_views(const TableLine& line) {
  const auto& m = line.report.pooled;
  const double acc = 100.0 * m.aggregate.accuracy;
  std::optional<published::Scores> pacc, pp, pr, pf;
  if (line.published) {
    const auto& p = *line.published;
    pacc = published::Scores{p.accuracy, NAN, NAN, NAN};
    pp = p.precision;
    pr = p.recall;
    pf = p.f1;
  }
  return {{"accuracy", {acc, NAN, NAN, NAN}, pacc},
          {"precision", as_scores(m.aggregate.weighted_precision, m.per_class.precision), pp},
          {"recall", as_scores(m.aggregate.weighted_recall, m.per_class.recall), pr},
          {"f1", as_scores(m.aggregate.weighted_f1, m.per_class.f1), pf}};
}

inline nlohmann::json scores_json(const published::Scores& s) {
  auto v = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
  return {{"weighted", v(s.weighted)},
          {"good", v(s.good)},
          {"intermediate", v(s.intermediate)},
          {"bad", v(s.bad)}};
}

}  // namespace detail

inline std::string table_title(std::string_view which) {
  if (which == "II") return "Table II: feature sets (resampling ros)";
  if (which == "III") return "Table III: resampling strategies (feature set combo3)";
  return "Table IV: models (feature set combo3, resampling ros)";
}

/// Plain-text rendering. Percentages to one decimal; per-class values in
/// (good, intermediate, bad) order; delta = ours - published.
inline std::string render_table(const TableResult& t) {
  std::ostringstream out;
  out << table_title(t.which) << "\n";
  out << "resampling scope: " << to_string(t.scope) << "\n";
  if (!t.comparable)
    out << "NOTE: input is not the published trace-set; published values are shown for "
           "orientation only and are NOT comparable.\n";
  out << "per-class values in (good, intermediate, bad) order; delta = ours - published\n\n";

  const std::size_t wm = 11, wv = 8, wk = 10, ws = 28;
  out << detail::pad("model", wm) << detail::pad("variant", wv) << detail::pad("metric", wk)
      << detail::pad("ours", ws) << detail::pad("published", ws) << "delta\n";
  for (const auto& line : t.lines) {
    bool first = true;
    for (const auto& mv : detail::metric_views(line)) {
      const bool scalar = std::string_view(mv.name) == "accuracy";
      out << detail::pad(first ? std::string(to_string(line.entry.entry.model.kind())) : "", wm)
          << detail::pad(first ? line.entry.variant : "", wv) << detail::pad(mv.name, wk);
      if (scalar) {
        out << detail::pad(detail::fmt1(mv.ours.weighted), ws);
        if (mv.ref)
          out << detail::pad(detail::fmt1(mv.ref->weighted), ws)
              << detail::fmt_delta(mv.ours.weighted - mv.ref->weighted);
        else
          out << "-";
      } else {
        out << detail::pad(detail::fmt_scores(mv.ours), ws);
        if (mv.ref)
          out << detail::pad(detail::fmt_scores(*mv.ref), ws)
              << detail::fmt_delta_scores(mv.ours, *mv.ref);
        else
          out << "-";
      }
      out << "\n";
      first = false;
    }
    if (t.which == "IV") {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f", line.report.pooled.training_time_seconds);
      out << detail::pad("", wm) << detail::pad("", wv) << detail::pad("train_s", wk)
          << detail::pad(buf, ws);
      if (line.published && !std::isnan(line.published->training_time_s))
        out << detail::fmt1(line.published->training_time_s) << " (hardware-dependent)";
      out << "\n";
    }
  }
  return out.str();
}

inline nlohmann::json to_json(const TableResult& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& line : t.lines) {
    nlohmann::json r = {{"name", line.entry.entry.name},
                        {"model", std::string(to_string(line.entry.entry.model.kind()))},
                        {"variant", line.entry.variant},
                        {"training_time_seconds", line.report.pooled.training_time_seconds}};
    for (const auto& mv : detail::metric_views(line)) {
      r["ours"][mv.name] = detail::scores_json(mv.ours);
      r["published"][mv.name] = mv.ref ? detail::scores_json(*mv.ref) : nullptr;
    }
    if (line.published && !std::isnan(line.published->training_time_s))
      r["published_training_time_seconds"] = line.published->training_time_s;
    rows.push_back(std::move(r));
  }
  return {{"format", "linkq-table"},
          {"table", t.which},
          {"comparable", t.comparable},
          {"resample_scope", std::string(to_string(t.scope))},
          {"class_order", {"good", "intermediate", "bad"}},
          {"rows", rows}};
}

}  // namespace linkq
