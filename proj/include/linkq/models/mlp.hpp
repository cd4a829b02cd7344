#pragma once

// Single-hidden-layer perceptron: x -> ReLU(W1 x + b1) -> softmax(W2 h + b2),
// trained with mini-batch SGD on mean cross-entropy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "linkq/dataset.hpp"
#include "linkq/link_class.hpp"
#include "linkq/models/common.hpp"
#include "linkq/models/spec.hpp"
#include "linkq/rng.hpp"

namespace linkq {

struct MlpParams {
  std::size_t n_features = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x n_features
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // kNumClasses x hidden
  PerClass<double> b2{};

  static MlpParams zeros(std::size_t d, std::size_t h) {
    return {d, h, std::vector<double>(h * d, 0.0), std::vector<double>(h, 0.0),
            std::vector<double>(kNumClasses * h, 0.0), {}};
  }

  /// Output logits; `hidden_out`, when given, receives the hidden activations.
  PerClass<double> logits(std::span<const double> x, std::vector<double>* hidden_out = nullptr) const {
    std::vector<double> local;
    auto& h = hidden_out ? *hidden_out : local;
    h.assign(hidden, 0.0);
    for (std::size_t u = 0; u < hidden; ++u) {
      double a = b1[u];
      const double* wu = w1.data() + u * n_features;
      for (std::size_t j = 0; j < n_features; ++j) a += wu[j] * x[j];
      h[u] = a > 0.0 ? a : 0.0;
    }
    PerClass<double> z = b2;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double* wc = w2.data() + c * hidden;
      for (std::size_t u = 0; u < hidden; ++u) z[c] += wc[u] * h[u];
    }
    return z;
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Glorot-uniform weights, zero biases.
inline MlpParams init_mlp(std::size_t d, std::size_t h, Rng& rng) {
  auto p = MlpParams::zeros(d, h);
  const double r1 = std::sqrt(6.0 / static_cast<double>(d + h));
  const double r2 = std::sqrt(6.0 / static_cast<double>(h + kNumClasses));
  for (auto& w : p.w1) w = rng.uniform(-r1, r1);
  for (auto& w : p.w2) w = rng.uniform(-r2, r2);
  return p;
}

struct MlpObjective {
  double loss = 0.0;
  MlpParams grad;
};

/// Mean cross-entropy over `rows` of `data`, with its gradient (backprop).
inline MlpObjective mlp_objective(const MlpParams& p, const Dataset& data,
                                  std::span<const std::size_t> rows) {
  MlpObjective out{0.0, MlpParams::zeros(p.n_features, p.hidden)};
  std::vector<double> h;
  std::vector<double> dh(p.hidden);
  for (auto i : rows) {
    const auto x = data.row(i);
    const auto z = p.logits(x, &h);
    const auto y = index_of(data.y[i]);
    const double m = *std::max_element(z.begin(), z.end());
    PerClass<double> e{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) sum += e[c] = std::exp(z[c] - m);
    out.loss += m + std::log(sum) - z[y];
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double r = e[c] / sum - (c == y ? 1.0 : 0.0);
      out.grad.b2[c] += r;
      double* g2 = out.grad.w2.data() + c * p.hidden;
      const double* w2c = p.w2.data() + c * p.hidden;
      for (std::size_t u = 0; u < p.hidden; ++u) {
        g2[u] += r * h[u];
        dh[u] += r * w2c[u];
      }
    }
    for (std::size_t u = 0; u < p.hidden; ++u) {
      if (h[u] <= 0.0) continue;
      out.grad.b1[u] += dh[u];
      double* g1 = out.grad.w1.data() + u * p.n_features;
      for (std::size_t j = 0; j < p.n_features; ++j) g1[j] += dh[u] * x[j];
    }
  }
  const double inv_n = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  out.loss *= inv_n;
  for (auto* v : {&out.grad.w1, &out.grad.b1, &out.grad.w2})
    for (auto& g : *v) g *= inv_n;
  for (auto& g : out.grad.b2) g *= inv_n;
  return out;
}

struct MlpFit {
  MlpParams params;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

inline MlpFit fit_mlp(const Dataset& train, const MlpHyper& hp, std::uint64_t seed) {
  Rng rng(seed);
  MlpFit fit{init_mlp(train.cols(), static_cast<std::size_t>(hp.hidden), rng), {}};
  auto& p = fit.params;
  std::vector<std::size_t> order(train.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(hp.batch_size);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto len = std::min(batch, order.size() - start);
      const auto obj =
          mlp_objective(p, train, std::span<const std::size_t>(order).subspan(start, len));
      for (std::size_t k = 0; k < p.w1.size(); ++k) p.w1[k] -= hp.learning_rate * obj.grad.w1[k];
      for (std::size_t k = 0; k < p.b1.size(); ++k) p.b1[k] -= hp.learning_rate * obj.grad.b1[k];
      for (std::size_t k = 0; k < p.w2.size(); ++k) p.w2[k] -= hp.learning_rate * obj.grad.w2[k];
      for (std::size_t c = 0; c < kNumClasses; ++c) p.b2[c] -= hp.learning_rate * obj.grad.b2[c];
      epoch_loss += obj.loss;
      ++batches;
    }
    fit.loss_history.push_back(batches ? epoch_loss / static_cast<double>(batches) : 0.0);
  }
  return fit;
}

}  // namespace linkq
