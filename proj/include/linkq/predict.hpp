#pragma once

// Applying a saved model to new traces.

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkq/error.hpp"
#include "linkq/features.hpp"
#include "linkq/model.hpp"
#include "linkq/trace.hpp"
#include "linkq/trace_io.hpp"

namespace linkq {

struct DeployedModel {
  TrainedModel model;
  FeatureSet feature_set = FeatureSet::combo3;
  WindowConfig window;
  double fill = 0.0;
  int trace_length = kDefaultTraceLength;
  ErrorRssiPolicy error_policy = ErrorRssiPolicy::lost;
};

/// Reads a model document written by `run` (model plus its "features" block).
inline DeployedModel deployed_model_from_json(const nlohmann::json& j) {
  DeployedModel d;
  d.model = model_from_json(j);
  if (!j.contains("features")) throw DataError("model document has no 'features' block");
  try {
    const auto& f = j.at("features");
    const auto fs = parse_feature_set(f.at("feature_set").get<std::string>());
    if (!fs) throw DataError("model: unknown feature set " + f.at("feature_set").dump());
    d.feature_set = *fs;
    d.window.w_history = f.at("w_history").get<int>();
    d.window.w_prr = f.at("w_prr").get<int>();
    d.fill = f.at("fill").get<double>();
    d.trace_length = f.at("trace_length").get<int>();
    const auto policy = f.at("error_rssi").get<std::string>();
    if (policy == "lost") d.error_policy = ErrorRssiPolicy::lost;
    else if (policy == "drop_row") d.error_policy = ErrorRssiPolicy::drop_row;
    else throw DataError("model: unknown error_rssi policy '" + policy + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: bad features block: ") + e.what());
  }
  if (feature_count(d.feature_set) != d.model.n_features)
    throw DataError("model: feature set does not match n_features");
  if (d.window.w_history < 1 || d.window.w_history > d.trace_length)
    throw DataError("model: invalid history window");
  return d;
}

inline constexpr std::string_view kPredictionCsvHeader =
    "trace_id,t,predicted,p_bad,p_intermediate,p_good";

/// Scores every slot that has a full history window. Returns the number of
/// rows written.
inline std::size_t write_predictions(std::ostream& out, const DeployedModel& d,
                                     std::span<const AlignedTrace> traces) {
  out << kPredictionCsvHeader << '\n';
  std::size_t n = 0;
  std::vector<double> x(d.model.n_features);
  char buf[128];
  for (const auto& trace : traces) {
    for (int t = d.window.w_history - 1; t < trace.length(); ++t) {
      window_features_into(trace, t, d.window, d.feature_set, x);
      const auto s = score(d.model, x);
      std::snprintf(buf, sizeof buf, ",%d,%s,%.6f,%.6f,%.6f\n", t,
                    std::string(to_string(argmax_class(s))).c_str(), s[0], s[1], s[2]);
      out << trace.trace_id << buf;
      ++n;
    }
  }
  return n;
}

inline std::size_t predict_csv(std::istream& csv, std::ostream& out, const DeployedModel& d) {
  const auto traces = parse_canonical_csv(csv, {d.trace_length, d.error_policy});
  const auto aligned = align_all(traces, d.fill);
  return write_predictions(out, d, aligned);
}

}  // namespace linkq
