#pragma once

// Windowed RSSI features and PRR labels.
//
// For an anchor slot t the history window is [t - w_history + 1, t] and the
// prediction window is [t + 1, t + w_prr]; features come only from the
// history window and the label only from the prediction window.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linkq/error.hpp"
#include "linkq/labeling.hpp"
#include "linkq/link_class.hpp"
#include "linkq/trace.hpp"

namespace linkq {

struct WindowConfig {
  int w_history = 10;
  int w_prr = 10;
  int stride = 1;

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

inline void validate(const WindowConfig& cfg, int trace_length) {
  if (cfg.w_history < 1 || cfg.w_prr < 1)
    throw ConfigError("window sizes must be positive");
  if (cfg.stride < 1) throw ConfigError("window stride must be positive");
  if (cfg.w_history + cfg.w_prr > trace_length)
    throw ConfigError("w_history + w_prr exceeds trace_length");
}

enum class FeatureSet { rssi, mean10, sd10, combo3, delta, pow };

inline constexpr std::array<FeatureSet, 6> kAllFeatureSets = {
    FeatureSet::rssi, FeatureSet::mean10, FeatureSet::sd10,
    FeatureSet::combo3, FeatureSet::delta, FeatureSet::pow};

inline constexpr std::array<int, 8> kMeanPowers = {-4, -3, -2, -1, 1, 2, 3, 4};
/// Floor applied to the window mean before raising it to a negative power.
inline constexpr double kMeanFloor = 1e-6;

constexpr std::string_view to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::rssi: return "rssi";
    case FeatureSet::mean10: return "mean10";
    case FeatureSet::sd10: return "sd10";
    case FeatureSet::combo3: return "combo3";
    case FeatureSet::delta: return "delta";
    case FeatureSet::pow: return "pow";
  }
  return "?";
}

inline std::optional<FeatureSet> parse_feature_set(std::string_view s) {
  for (auto fs : kAllFeatureSets)
    if (to_string(fs) == s) return fs;
  return std::nullopt;
}

inline std::vector<std::string> feature_names(FeatureSet set) {
  switch (set) {
    case FeatureSet::rssi: return {"rssi"};
    case FeatureSet::mean10: return {"rssi_mean_10"};
    case FeatureSet::sd10: return {"rssi_sd_10"};
    case FeatureSet::combo3: return {"rssi", "rssi_mean_10", "rssi_sd_10"};
    case FeatureSet::delta: return {"rssi_delta"};
    case FeatureSet::pow: {
      std::vector<std::string> names;
      for (int k : kMeanPowers) names.push_back("rssi_mean_pow_" + std::to_string(k));
      return names;
    }
  }
  return {};
}

inline std::size_t feature_count(FeatureSet set) { return feature_names(set).size(); }

/// Feature values in the fixed column order of their feature set.
struct FeatureVector {
  FeatureSet set = FeatureSet::combo3;
  std::vector<double> values;

  /// Value by canonical name; throws IndexError for names outside the set.
  double at(std::string_view name) const {
    const auto names = feature_names(set);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    throw IndexError("feature '" + std::string(name) + "' not in set " +
                     std::string(to_string(set)));
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Sample {
  FeatureVector features;
  LinkClass label = LinkClass::bad;
  std::string trace_id;
  int t = 0;
  double prr = 0.0;
};

/// Fraction of received slots.
inline double prr(std::span<const Slot> window) {
  if (window.empty()) throw DomainError("prr: empty window");
  std::size_t rx = 0;
  for (const auto& s : window) rx += s.received ? 1 : 0;
  return static_cast<double>(rx) / static_cast<double>(window.size());
}

namespace detail {

struct WindowMoments {
  double mean = 0.0;
  double sd = 0.0;
};

// Two-pass population moments.
inline WindowMoments moments(std::span<const Slot> window) {
  double sum = 0.0;
  for (const auto& s : window) sum += s.rssi;
  const double mean = sum / static_cast<double>(window.size());
  double ss = 0.0;
  for (const auto& s : window) ss += (s.rssi - mean) * (s.rssi - mean);
  return {mean, std::sqrt(ss / static_cast<double>(window.size()))};
}

inline double integer_power(double base, int k) {
  double r = 1.0;
  for (int i = 0; i < std::abs(k); ++i) r *= base;
  return k < 0 ? 1.0 / r : r;
}

}  // namespace detail

/// Writes the features of anchor t into `out` (which must hold
/// feature_count(set) values).
inline void window_features_into(const AlignedTrace& trace, int t, const WindowConfig& cfg,
                                 FeatureSet set, std::span<double> out) {
  if (cfg.w_history < 1) throw ConfigError("w_history must be positive");
  if (t < 0 || t >= trace.length() || t - cfg.w_history + 1 < 0)
    throw IndexError("anchor " + std::to_string(t) + " outside valid range of trace " +
                     trace.trace_id);
  const auto history = std::span<const Slot>(trace.slots).subspan(
      static_cast<std::size_t>(t - cfg.w_history + 1), static_cast<std::size_t>(cfg.w_history));
  const double instant = trace.slots[static_cast<std::size_t>(t)].rssi;

  switch (set) {
    case FeatureSet::rssi:
      out[0] = instant;
      break;
    case FeatureSet::mean10:
      out[0] = detail::moments(history).mean;
      break;
    case FeatureSet::sd10:
      out[0] = detail::moments(history).sd;
      break;
    case FeatureSet::combo3: {
      const auto m = detail::moments(history);
      out[0] = instant;
      out[1] = m.mean;
      out[2] = m.sd;
      break;
    }
    case FeatureSet::delta:
      out[0] = t == 0 ? 0.0 : instant - trace.slots[static_cast<std::size_t>(t - 1)].rssi;
      break;
    case FeatureSet::pow: {
      const double mean = detail::moments(history).mean;
      for (std::size_t i = 0; i < kMeanPowers.size(); ++i) {
        const int k = kMeanPowers[i];
        out[i] = detail::integer_power(k < 0 ? std::max(mean, kMeanFloor) : mean, k);
      }
      break;
    }
  }
}

inline FeatureVector window_features(const AlignedTrace& trace, int t, const WindowConfig& cfg,
                                     FeatureSet set) {
  FeatureVector fv{set, std::vector<double>(feature_count(set))};
  window_features_into(trace, t, cfg, set, fv.values);
  return fv;
}

/// Number of anchors build_samples produces for a trace of this length.
inline std::size_t anchor_count(int trace_length, const WindowConfig& cfg) {
  const int first = cfg.w_history - 1;
  const int last = trace_length - cfg.w_prr - 1;
  if (last < first) return 0;
  return static_cast<std::size_t>((last - first) / cfg.stride + 1);
}

/// Calls fn(t, prr) for every anchor of the trace.
template <class Fn>
void for_each_anchor(const AlignedTrace& trace, const WindowConfig& cfg, Fn&& fn) {
  const int first = cfg.w_history - 1;
  const int last = trace.length() - cfg.w_prr - 1;
  const std::span<const Slot> slots(trace.slots);
  for (int t = first; t <= last; t += cfg.stride) {
    const double p = prr(slots.subspan(static_cast<std::size_t>(t + 1),
                                       static_cast<std::size_t>(cfg.w_prr)));
    fn(t, p);
  }
}

struct SampleStats {
  std::size_t samples = 0;
  std::size_t skipped_traces = 0;  // too short for one history + prediction window
};

inline std::vector<Sample> build_samples(const AlignedTrace& trace, const WindowConfig& cfg,
                                         FeatureSet set, SampleStats* stats = nullptr) {
  if (cfg.w_history < 1 || cfg.w_prr < 1 || cfg.stride < 1)
    throw ConfigError("window sizes and stride must be positive");
  std::vector<Sample> out;
  if (trace.length() < cfg.w_history + cfg.w_prr) {
    if (stats) ++stats->skipped_traces;
    return out;
  }
  out.reserve(anchor_count(trace.length(), cfg));
  for_each_anchor(trace, cfg, [&](int t, double p) {
    out.push_back(Sample{window_features(trace, t, cfg, set), label_of(p), trace.trace_id, t, p});
  });
  if (stats) stats->samples += out.size();
  return out;
}

/// Sample labels for corpus_stats.
inline std::vector<LinkClass> sample_labels(std::span<const Sample> samples) {
  std::vector<LinkClass> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

}  // namespace linkq
