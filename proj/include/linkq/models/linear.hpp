#pragma once

// Linear classifiers over (already standardized) features: multinomial
// logistic regression and one-vs-rest squared-hinge SVM. Both share the
// parameter layout: one weight row and one bias per class.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "linkq/dataset.hpp"
#include "linkq/link_class.hpp"
#include "linkq/models/common.hpp"
#include "linkq/models/spec.hpp"

namespace linkq {

struct LinearParams {
  std::size_t n_features = 0;
  std::vector<double> w;  // kNumClasses x n_features, row-major
  PerClass<double> b{};

  static LinearParams zeros(std::size_t d) {
    return {d, std::vector<double>(kNumClasses * d, 0.0), {}};
  }

  double* row(std::size_t c) { return w.data() + c * n_features; }
  const double* row(std::size_t c) const { return w.data() + c * n_features; }

  PerClass<double> margins(std::span<const double> x) const {
    PerClass<double> z = b;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double* wc = row(c);
      for (std::size_t j = 0; j < n_features; ++j) z[c] += wc[j] * x[j];
    }
    return z;
  }

  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

struct LinearObjective {
  double loss = 0.0;
  LinearParams grad;
};

/// Mean multinomial cross-entropy plus (l2 / 2) * ||W||^2 (biases are not
/// penalized), with its exact gradient.
inline LinearObjective logistic_objective(const LinearParams& p, const Dataset& data, double l2) {
  const std::size_t d = p.n_features;
  LinearObjective out{0.0, LinearParams::zeros(d)};
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto x = data.row(i);
    const auto z = p.margins(x);
    const auto y = index_of(data.y[i]);
    const double m = *std::max_element(z.begin(), z.end());
    PerClass<double> e{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) sum += e[c] = std::exp(z[c] - m);
    out.loss += m + std::log(sum) - z[y];
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double r = e[c] / sum - (c == y ? 1.0 : 0.0);
      double* g = out.grad.row(c);
      for (std::size_t j = 0; j < d; ++j) g[j] += r * x[j];
      out.grad.b[c] += r;
    }
  }
  const double inv_n = data.rows() > 0 ? 1.0 / static_cast<double>(data.rows()) : 0.0;
  out.loss *= inv_n;
  for (auto& g : out.grad.w) g *= inv_n;
  for (auto& g : out.grad.b) g *= inv_n;
  double norm2 = 0.0;
  for (std::size_t k = 0; k < p.w.size(); ++k) {
    norm2 += p.w[k] * p.w[k];
    out.grad.w[k] += l2 * p.w[k];
  }
  out.loss += 0.5 * l2 * norm2;
  return out;
}

struct LinearFit {
  LinearParams params;
  std::vector<double> loss_history;  // objective after every accepted step
};

namespace detail {

inline LinearParams step(const LinearParams& p, const LinearParams& g, double lr) {
  LinearParams q = p;
  for (std::size_t k = 0; k < q.w.size(); ++k) q.w[k] -= lr * g.w[k];
  for (std::size_t c = 0; c < kNumClasses; ++c) q.b[c] -= lr * g.b[c];
  return q;
}

}  // namespace detail

inline LinearFit fit_logistic(const Dataset& train, const LogisticHyper& hp) {
  LinearFit fit{LinearParams::zeros(train.cols()), {}};
  auto current = logistic_objective(fit.params, train, hp.l2);
  fit.loss_history.push_back(current.loss);
  double lr = hp.learning_rate;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    auto candidate = detail::step(fit.params, current.grad, lr);
    auto next = logistic_objective(candidate, train, hp.l2);
    if (!(next.loss <= current.loss)) {
      lr *= 0.5;
      if (lr < 1e-12) break;
      continue;
    }
    const double improvement = current.loss - next.loss;
    fit.params = std::move(candidate);
    current = std::move(next);
    fit.loss_history.push_back(current.loss);
    if (improvement < hp.tolerance) break;
  }
  return fit;
}

struct BinaryObjective {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

/// (lambda / 2) ||w||^2 + mean(max(0, 1 - s (w.x + b))^2) for labels s in
/// {+1, -1} (+1 for `positive`).
inline BinaryObjective squared_hinge_objective(std::span<const double> w, double b,
                                               const Dataset& data, LinkClass positive,
                                               double lambda) {
  const std::size_t d = data.cols();
  BinaryObjective out{0.0, std::vector<double>(d, 0.0), 0.0};
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto x = data.row(i);
    const double s = data.y[i] == positive ? 1.0 : -1.0;
    double f = b;
    for (std::size_t j = 0; j < d; ++j) f += w[j] * x[j];
    const double slack = 1.0 - s * f;
    if (slack <= 0.0) continue;
    out.loss += slack * slack;
    const double coef = -2.0 * slack * s;
    for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += coef * x[j];
    out.grad_b += coef;
  }
  const double inv_n = data.rows() > 0 ? 1.0 / static_cast<double>(data.rows()) : 0.0;
  out.loss *= inv_n;
  out.grad_b *= inv_n;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad_w[j] = out.grad_w[j] * inv_n + lambda * w[j];
    norm2 += w[j] * w[j];
  }
  out.loss += 0.5 * lambda * norm2;
  return out;
}

/// One binary problem per class for a fixed number of epochs; steps that
/// raise the objective are rejected and halve the step size. The penalty is
/// lambda = 1 / (C n), the mean-loss form of (1/2)||w||^2 + C * sum(loss).
inline LinearParams fit_linear_svm(const Dataset& train, const SvmHyper& hp) {
  const std::size_t d = train.cols();
  auto params = LinearParams::zeros(d);
  const double lambda = 1.0 / (hp.c * static_cast<double>(std::max<std::size_t>(train.rows(), 1)));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    auto current = squared_hinge_objective(w, b, train, class_at(c), lambda);
    double lr = hp.learning_rate;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
      std::vector<double> w_next(d);
      for (std::size_t j = 0; j < d; ++j) w_next[j] = w[j] - lr * current.grad_w[j];
      const double b_next = b - lr * current.grad_b;
      auto next = squared_hinge_objective(w_next, b_next, train, class_at(c), lambda);
      if (!(next.loss <= current.loss)) {
        lr *= 0.5;
        continue;
      }
      w = std::move(w_next);
      b = b_next;
      current = std::move(next);
    }
    std::copy(w.begin(), w.end(), params.row(c));
    params.b[c] = b;
  }
  return params;
}

}  // namespace linkq
