#pragma once

// Seeded synthetic trace corpus, used when the measured trace-set is not
// available. Each trace draws a class from the mixture and a base latent RSSI
// from that class's range. The latent RSSI then drifts as an AR(1) process;
// a slot is received with probability logistic(slope * (latent - midpoint))
// and a received slot reports the latent RSSI plus jitter, rounded and
// clamped to [1, 127].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "linkq/error.hpp"
#include "linkq/link_class.hpp"
#include "linkq/rng.hpp"
#include "linkq/trace.hpp"

namespace linkq {

struct LatentRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthSpec {
  int n_traces = 1000;
  int trace_length = kDefaultTraceLength;
  PerClass<double> mixture = {0.34, 0.05, 0.61};  // (bad, intermediate, good)
  PerClass<LatentRange> latent = {LatentRange{-10.0, 3.0}, LatentRange{8.0, 12.0},
                                  LatentRange{18.0, 45.0}};
  double midpoint = 10.0;  // latent RSSI with reception probability 0.5
  double slope = 0.5;
  double drift_ar = 0.9;
  double drift_sd = 3.0;
  double jitter_sd = 1.5;
};

inline void validate(const SynthSpec& spec) {
  if (spec.n_traces < 0) throw ConfigError("synthetic: n_traces must be >= 0");
  if (spec.trace_length < 1) throw ConfigError("synthetic: trace_length must be positive");
  double total = 0.0;
  for (double m : spec.mixture) {
    if (!(m >= 0.0)) throw ConfigError("synthetic: mixture weights must be non-negative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("synthetic: mixture weights sum to " + std::to_string(total) + ", not 1");
  for (const auto& r : spec.latent)
    if (!(r.lo <= r.hi)) throw ConfigError("synthetic: latent range with lo > hi");
  if (!(spec.slope > 0.0)) throw ConfigError("synthetic: slope must be positive");
  if (!(spec.drift_ar >= 0.0 && spec.drift_ar < 1.0))
    throw ConfigError("synthetic: drift_ar must be in [0, 1)");
  if (spec.drift_sd < 0.0 || spec.jitter_sd < 0.0)
    throw ConfigError("synthetic: standard deviations must be non-negative");
}

/// Latent classes drawn for each trace, in generation order. Exposed so tests
/// can compare the realized labels against the intended mixture.
struct SyntheticCorpus {
  std::vector<AlignedTrace> traces;
  std::vector<LinkClass> drawn_class;
};

inline SyntheticCorpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  SyntheticCorpus out;
  out.traces.reserve(static_cast<std::size_t>(spec.n_traces));
  out.drawn_class.reserve(static_cast<std::size_t>(spec.n_traces));
  const double innovation_scale = std::sqrt(1.0 - spec.drift_ar * spec.drift_ar);

  for (int i = 0; i < spec.n_traces; ++i) {
    const double u = rng.uniform();
    std::size_t c = 0;
    double acc = spec.mixture[0];
    while (c + 1 < kNumClasses && u >= acc) acc += spec.mixture[++c];
    while (spec.mixture[c] == 0.0 && c > 0) --c;  // guard u landing on a zero-width tail

    const auto& range = spec.latent[c];
    const double base = rng.uniform(range.lo, range.hi);
    char id[32];
    std::snprintf(id, sizeof id, "synth-%05d", i);
    AlignedTrace trace{id, "s" + std::to_string(i), "d" + std::to_string(i),
                       kNoiseLevelsDbm[static_cast<std::size_t>(i) % kNoiseLevelsDbm.size()],
                       std::vector<Slot>(static_cast<std::size_t>(spec.trace_length))};
    // drift_sd is the stationary standard deviation of the drift.
    double drift = spec.drift_sd * rng.normal();
    for (auto& slot : trace.slots) {
      const double latent = base + drift;
      const double p_rx = 1.0 / (1.0 + std::exp(-spec.slope * (latent - spec.midpoint)));
      const double jitter = rng.normal(0.0, spec.jitter_sd);
      if (rng.uniform() < p_rx) {
        slot.received = true;
        slot.rssi = std::clamp(std::round(latent + jitter), 1.0, 127.0);
      }
      drift = spec.drift_ar * drift + spec.drift_sd * innovation_scale * rng.normal();
    }
    out.traces.push_back(std::move(trace));
    out.drawn_class.push_back(class_at(c));
  }
  return out;
}

inline std::vector<AlignedTrace> generate_synthetic_corpus(const SynthSpec& spec,
                                                           std::uint64_t seed) {
  return generate_synthetic(spec, seed).traces;
}

}  // namespace linkq
