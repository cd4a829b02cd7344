#pragma once

// Design matrices, stratified folds, resampling and standardization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linkq/error.hpp"
#include "linkq/features.hpp"
#include "linkq/link_class.hpp"
#include "linkq/rng.hpp"

namespace linkq {

/// Row-major feature matrix with labels and the trace each row came from.
struct Dataset {
  std::optional<FeatureSet> feature_set;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<LinkClass> y;
  std::vector<std::uint32_t> groups;  // index into group_names
  std::vector<std::string> group_names;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return n_features; }
  bool empty() const { return y.empty(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x).subspan(i * n_features, n_features);
  }

  double at(std::size_t i, std::size_t j) const { return x[i * n_features + j]; }

  PerClass<std::size_t> class_counts() const {
    PerClass<std::size_t> counts{};
    for (auto c : y) ++counts[index_of(c)];
    return counts;
  }

  /// New dataset made of the given rows (repeats allowed), in that order.
  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.feature_set = feature_set;
    out.feature_names = feature_names;
    out.n_features = n_features;
    out.group_names = group_names;
    out.x.reserve(indices.size() * n_features);
    out.y.reserve(indices.size());
    out.groups.reserve(indices.size());
    for (auto i : indices) {
      if (i >= rows()) throw IndexError("Dataset::subset: row index out of range");
      const auto r = row(i);
      out.x.insert(out.x.end(), r.begin(), r.end());
      out.y.push_back(y[i]);
      out.groups.push_back(groups[i]);
    }
    return out;
  }

  /// Unlabelled-provenance dataset from a plain matrix (one group).
  static Dataset from_matrix(std::vector<double> x, std::size_t n_features,
                             std::vector<LinkClass> y) {
    if (n_features == 0 ? !x.empty() : x.size() != y.size() * n_features)
      throw DimensionError("Dataset::from_matrix: matrix size does not match labels");
    Dataset d;
    d.n_features = n_features;
    for (std::size_t j = 0; j < n_features; ++j) d.feature_names.push_back("x" + std::to_string(j));
    d.x = std::move(x);
    d.groups.assign(y.size(), 0);
    d.group_names = {"all"};
    d.y = std::move(y);
    return d;
  }

  /// Throws DataError on NaN/Inf or inconsistent sizes.
  void validate() const {
    if (x.size() != y.size() * n_features || groups.size() != y.size())
      throw DimensionError("Dataset: inconsistent sizes");
    for (double v : x)
      if (!std::isfinite(v)) throw DataError("Dataset: non-finite feature value");
  }
};

namespace detail {

struct DatasetBuilder {
  Dataset data;
  std::unordered_map<std::string, std::uint32_t> group_index;

  explicit DatasetBuilder(FeatureSet set) {
    data.feature_set = set;
    data.feature_names = feature_names(set);
    data.n_features = data.feature_names.size();
  }

  std::uint32_t group_of(const std::string& id) {
    auto [it, inserted] =
        group_index.emplace(id, static_cast<std::uint32_t>(data.group_names.size()));
    if (inserted) data.group_names.push_back(id);
    return it->second;
  }
};

}  // namespace detail

inline Dataset assemble(std::span<const Sample> samples, FeatureSet set) {
  detail::DatasetBuilder b(set);
  b.data.x.reserve(samples.size() * b.data.n_features);
  for (const auto& s : samples) {
    if (s.features.set != set || s.features.values.size() != b.data.n_features)
      throw DataError("assemble: sample from trace " + s.trace_id + " uses feature set " +
                      std::string(to_string(s.features.set)) + ", expected " +
                      std::string(to_string(set)));
    b.data.x.insert(b.data.x.end(), s.features.values.begin(), s.features.values.end());
    b.data.y.push_back(s.label);
    b.data.groups.push_back(b.group_of(s.trace_id));
  }
  return std::move(b.data);
}

/// Builds the dataset for a whole corpus without materializing Sample objects.
/// Row order equals concatenating build_samples() over the traces.
inline Dataset build_dataset(std::span<const AlignedTrace> corpus, const WindowConfig& cfg,
                             FeatureSet set, SampleStats* stats = nullptr) {
  detail::DatasetBuilder b(set);
  std::size_t expected = 0;
  for (const auto& t : corpus) expected += anchor_count(t.length(), cfg);
  b.data.x.reserve(expected * b.data.n_features);
  b.data.y.reserve(expected);
  b.data.groups.reserve(expected);
  std::vector<double> buf(b.data.n_features);
  for (const auto& trace : corpus) {
    if (trace.length() < cfg.w_history + cfg.w_prr) {
      if (stats) ++stats->skipped_traces;
      continue;
    }
    const auto group = b.group_of(trace.trace_id);
    for_each_anchor(trace, cfg, [&](int t, double p) {
      window_features_into(trace, t, cfg, set, buf);
      b.data.x.insert(b.data.x.end(), buf.begin(), buf.end());
      b.data.y.push_back(label_of(p));
      b.data.groups.push_back(group);
    });
  }
  if (stats) stats->samples += b.data.rows();
  return std::move(b.data);
}

// ---------------------------------------------------------------------------
// Folds

struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::vector<int> assignment;  // fold index per sample

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }
};

/// Stratified K-fold: every class is shuffled and dealt round-robin across
/// folds, continuing where the previous class stopped, so each fold holds
/// floor or ceil of (class count / k) members of every class.
inline FoldPlan stratified_kfold(std::span<const LinkClass> y, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
  PerClass<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[index_of(y[i])].push_back(i);
  for (auto c : kAllClasses) {
    const auto n = members[index_of(c)].size();
    if (n > 0 && n < static_cast<std::size_t>(k))
      throw DataError("stratified_kfold: class '" + std::string(to_string(c)) + "' has only " +
                      std::to_string(n) + " samples, fewer than k=" + std::to_string(k));
  }
  FoldPlan plan{k, seed, std::vector<int>(y.size(), -1)};
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (auto& idx : members) {
    rng.shuffle(idx.begin(), idx.end());
    for (auto i : idx) {
      plan.assignment[i] = static_cast<int>(next_fold);
      next_fold = (next_fold + 1) % static_cast<std::size_t>(k);
    }
  }
  return plan;
}

/// Fold assignment that keeps every trace's samples in one fold. Groups are
/// shuffled and each goes to the fold currently holding the fewest samples.
inline FoldPlan grouped_kfold(std::span<const std::uint32_t> groups, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("grouped_kfold: k must be at least 2");
  std::map<std::uint32_t, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < groups.size(); ++i) by_group[groups[i]].push_back(i);
  if (by_group.size() < static_cast<std::size_t>(k))
    throw DataError("grouped_kfold: fewer groups than folds");
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [g, idx] : by_group) order.push_back(&idx);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  FoldPlan plan{k, seed, std::vector<int>(groups.size(), -1)};
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (const auto* idx : order) {
    const auto fold = static_cast<std::size_t>(
        std::min_element(load.begin(), load.end()) - load.begin());
    for (auto i : *idx) plan.assignment[i] = static_cast<int>(fold);
    load[fold] += idx->size();
  }
  return plan;
}

inline void write_fold_plan_csv(std::ostream& out, const FoldPlan& plan) {
  out << "sample_index,fold\n";
  for (std::size_t i = 0; i < plan.assignment.size(); ++i)
    out << i << ',' << plan.assignment[i] << '\n';
}

// ---------------------------------------------------------------------------
// Resampling

enum class Resample { none, ros, rus };

constexpr std::string_view to_string(Resample r) {
  switch (r) {
    case Resample::none: return "none";
    case Resample::ros: return "ros";
    case Resample::rus: return "rus";
  }
  return "?";
}

inline std::optional<Resample> parse_resample(std::string_view s) {
  if (s == "none") return Resample::none;
  if (s == "ros") return Resample::ros;
  if (s == "rus") return Resample::rus;
  return std::nullopt;
}

/// Source-row indices of the resampled dataset.
///
/// ROS keeps every row and appends uniform with-replacement draws of each
/// smaller class until it matches the largest class. RUS keeps a uniform
/// without-replacement subset of every class sized to the smallest present
/// class, in original row order. Classes are visited bad, intermediate, good.
inline std::vector<std::size_t> resample_indices(std::span<const LinkClass> y, Resample strategy,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> all(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) all[i] = i;
  if (strategy == Resample::none) return all;
  if (y.empty()) throw DataError("resample: empty training set");

  PerClass<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[index_of(y[i])].push_back(i);
  std::size_t largest = 0;
  std::size_t smallest = y.size();
  for (const auto& m : members) {
    if (m.empty()) continue;
    largest = std::max(largest, m.size());
    smallest = std::min(smallest, m.size());
  }

  Rng rng(seed);
  if (strategy == Resample::ros) {
    for (const auto& m : members) {
      if (m.empty()) continue;
      for (std::size_t extra = m.size(); extra < largest; ++extra)
        all.push_back(m[rng.below(m.size())]);
    }
    return all;
  }

  std::vector<std::size_t> kept;
  kept.reserve(smallest * kNumClasses);
  for (auto& m : members) {
    if (m.empty()) continue;
    // Partial Fisher-Yates: the first `smallest` positions are the sample.
    for (std::size_t i = 0; i < smallest; ++i) {
      const auto j = i + rng.below(m.size() - i);
      std::swap(m[i], m[j]);
    }
    kept.insert(kept.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(smallest));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline Dataset resample(const Dataset& train, Resample strategy, std::uint64_t seed) {
  const auto idx = resample_indices(train.y, strategy, seed);
  return train.subset(idx);
}

inline Dataset ros(const Dataset& train, std::uint64_t seed) {
  return resample(train, Resample::ros, seed);
}

inline Dataset rus(const Dataset& train, std::uint64_t seed) {
  return resample(train, Resample::rus, seed);
}

inline void write_resample_csv(std::ostream& out, std::span<const std::size_t> indices) {
  out << "row,sample_index\n";
  for (std::size_t i = 0; i < indices.size(); ++i) out << i << ',' << indices[i] << '\n';
}

// ---------------------------------------------------------------------------
// Standardization

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;  // population sd; 0 marks a constant feature

  void apply_row(std::span<const double> in, std::span<double> out) const {
    if (in.size() != mean.size() || out.size() != mean.size())
      throw DimensionError("Standardizer: dimension mismatch");
    for (std::size_t j = 0; j < in.size(); ++j)
      out[j] = sd[j] > 0.0 ? (in[j] - mean[j]) / sd[j] : 0.0;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline Standardizer fit_standardizer(const Dataset& train) {
  if (train.empty()) throw DataError("fit_standardizer: empty training set");
  const auto n = static_cast<double>(train.rows());
  const auto d = train.cols();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < train.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += train.at(i, j);
  for (auto& m : s.mean) m /= n;
  for (std::size_t i = 0; i < train.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = train.at(i, j) - s.mean[j];
      s.sd[j] += dev * dev;
    }
  for (auto& v : s.sd) v = std::sqrt(v / n);
  return s;
}

inline Dataset apply_standardizer(const Standardizer& s, const Dataset& data) {
  Dataset out = data;
  for (std::size_t i = 0; i < data.rows(); ++i)
    s.apply_row(data.row(i), std::span<double>(out.x).subspan(i * data.cols(), data.cols()));
  return out;
}

}  // namespace linkq
