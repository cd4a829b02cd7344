#pragma once

// CART classification tree with Gini impurity.
//
// Candidate thresholds are the midpoints between consecutive distinct values
// of a feature; rows with x[f] <= threshold go left. A split is admissible
// only when both children keep at least min_samples_per_node rows. Among
// equal gains the lower feature index wins, then the lower threshold.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "linkq/dataset.hpp"
#include "linkq/link_class.hpp"
#include "linkq/models/spec.hpp"

namespace linkq {

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::size_t n_samples = 0;
  PerClass<double> proportion{};

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
  }

  const TreeNode& leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
    }
    return nodes[i];
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

namespace detail {

inline double gini(const PerClass<std::size_t>& counts, std::size_t n) {
  if (n == 0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Gains closer than this are treated as ties.
inline constexpr double kGainTieEps = 1e-12;

inline SplitChoice best_split(const Dataset& data, std::span<const std::size_t> rows,
                              const PerClass<std::size_t>& counts, std::size_t min_leaf) {
  const std::size_t n = rows.size();
  const double parent = gini(counts, n);
  SplitChoice best;
  std::vector<std::pair<double, LinkClass>> column(n);
  for (std::size_t f = 0; f < data.cols(); ++f) {
    for (std::size_t k = 0; k < n; ++k) column[k] = {data.at(rows[k], f), data.y[rows[k]]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    PerClass<std::size_t> left{};
    for (std::size_t k = 0; k + 1 < n; ++k) {
      ++left[index_of(column[k].second)];
      const double lo = column[k].first;
      const double hi = column[k + 1].first;
      if (lo == hi) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf) continue;
      if (nr < min_leaf) break;
      PerClass<std::size_t> right{};
      for (std::size_t c = 0; c < kNumClasses; ++c) right[c] = counts[c] - left[c];
      const double weighted = (static_cast<double>(nl) * gini(left, nl) +
                               static_cast<double>(nr) * gini(right, nr)) /
                              static_cast<double>(n);
      const double gain = parent - weighted;
      if (gain > best.gain + kGainTieEps) {
        double mid = lo + (hi - lo) * 0.5;
        if (!(mid >= lo && mid < hi)) mid = lo;
        best = {static_cast<int>(f), mid, gain};
      }
    }
  }
  return best;
}

}  // namespace detail

inline TreeParams fit_tree(const Dataset& train, const TreeHyper& hp) {
  TreeParams tree;
  const auto min_leaf = static_cast<std::size_t>(hp.min_samples_per_node);

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  std::vector<std::size_t> all(train.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  tree.nodes.push_back(TreeNode{});
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    auto [node_index, rows] = std::move(stack.back());
    stack.pop_back();
    PerClass<std::size_t> counts{};
    for (auto r : rows) ++counts[index_of(train.y[r])];
    {
      auto& node = tree.nodes[node_index];
      node.n_samples = rows.size();
      for (std::size_t c = 0; c < kNumClasses; ++c)
        node.proportion[c] =
            rows.empty() ? 0.0 : static_cast<double>(counts[c]) / static_cast<double>(rows.size());
    }
    const int depth = tree.nodes[node_index].depth;
    const auto empty_classes = static_cast<std::size_t>(std::count(counts.begin(), counts.end(), 0u));
    const bool pure = empty_classes >= kNumClasses - 1;
    if (pure || depth >= hp.max_depth || rows.size() < 2 * min_leaf) continue;

    const auto split = detail::best_split(train, rows, counts, min_leaf);
    if (split.feature < 0 || split.gain <= detail::kGainTieEps) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      if (train.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{.depth = depth + 1});
    tree.nodes.push_back(TreeNode{.depth = depth + 1});
    auto& node = tree.nodes[node_index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = left + 1;
    // Right first so the left subtree is expanded first (stable node order).
    stack.push_back({static_cast<std::size_t>(left + 1), std::move(right_rows)});
    stack.push_back({static_cast<std::size_t>(left), std::move(left_rows)});
  }
  return tree;
}

}  // namespace linkq
