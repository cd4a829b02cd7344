#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "linkq/link_class.hpp"

namespace linkq {

/// Per-class probability-like scores in (bad, intermediate, good) order.
using ScoreVector = PerClass<double>;

inline ScoreVector softmax(const PerClass<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  ScoreVector p{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(z[c] - m);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  return p;
}

/// log(sum(exp(z)))
inline double log_sum_exp(const PerClass<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

/// Index of the largest score; ties go to the earlier class.
inline LinkClass argmax_class(const PerClass<double>& s) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (s[c] > s[best]) best = c;
  return class_at(best);
}

}  // namespace linkq
