#pragma once

// Link traces: raw per-packet records and their fixed-length aligned form.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linkq/error.hpp"
#include "linkq/labeling.hpp"
#include "linkq/link_class.hpp"

namespace linkq {

inline constexpr int kDefaultTraceLength = 300;
/// Radio-reported RSSI value meaning "error".
inline constexpr int kRssiError = 128;
inline constexpr std::array<int, 5> kNoiseLevelsDbm = {0, -5, -10, -15, -20};

struct PacketRecord {
  int seq = 0;
  int rssi = 0;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct LinkTrace {
  std::string trace_id;
  std::string source_id;
  std::string dest_id;
  int noise_dbm = 0;
  std::vector<PacketRecord> packets;  // strictly ascending by seq
  int trace_length = kDefaultTraceLength;

  friend bool operator==(const LinkTrace&, const LinkTrace&) = default;
};

/// What to do with packets carrying the error RSSI value.
enum class ErrorRssiPolicy {
  lost,      // keep the row; the slot is aligned as not received
  drop_row,  // remove the row during ingestion
};

inline bool is_valid_noise_level(int noise_dbm) {
  return std::find(kNoiseLevelsDbm.begin(), kNoiseLevelsDbm.end(), noise_dbm) !=
         kNoiseLevelsDbm.end();
}

/// Throws RangeError/DataError when a trace breaks its invariants.
inline void validate(const LinkTrace& trace) {
  if (trace.trace_length < 1)
    throw RangeError("trace " + trace.trace_id + ": trace_length must be positive");
  if (static_cast<int>(trace.packets.size()) > trace.trace_length)
    throw RangeError("trace " + trace.trace_id + ": more packets than trace_length");
  int prev = -1;
  for (const auto& p : trace.packets) {
    if (p.seq < 0 || p.seq >= trace.trace_length)
      throw RangeError("trace " + trace.trace_id + ": seq " + std::to_string(p.seq) +
                       " outside [0, " + std::to_string(trace.trace_length) + ")");
    if (p.rssi < 0 || p.rssi > kRssiError)
      throw RangeError("trace " + trace.trace_id + ": rssi " + std::to_string(p.rssi) +
                       " outside [0, 128]");
    if (p.seq <= prev)
      throw DataError("trace " + trace.trace_id + ": packets not strictly ascending by seq");
    prev = p.seq;
  }
}

struct Slot {
  bool received = false;
  double rssi = 0.0;

  friend bool operator==(const Slot&, const Slot&) = default;
};

struct AlignedTrace {
  std::string trace_id;
  std::string source_id;
  std::string dest_id;
  int noise_dbm = 0;
  std::vector<Slot> slots;

  int length() const { return static_cast<int>(slots.size()); }

  std::size_t received_count() const {
    return static_cast<std::size_t>(
        std::count_if(slots.begin(), slots.end(), [](const Slot& s) { return s.received; }));
  }

  friend bool operator==(const AlignedTrace&, const AlignedTrace&) = default;
};

/// Expands a trace to exactly trace_length slots. Missing packets and packets
/// with the error RSSI become not-received slots holding `fill`.
inline AlignedTrace align(const LinkTrace& trace, double fill = 0.0) {
  validate(trace);
  AlignedTrace out{trace.trace_id, trace.source_id, trace.dest_id, trace.noise_dbm,
                   std::vector<Slot>(static_cast<std::size_t>(trace.trace_length),
                                     Slot{false, fill})};
  for (const auto& p : trace.packets) {
    if (p.rssi == kRssiError) continue;
    out.slots[static_cast<std::size_t>(p.seq)] = Slot{true, static_cast<double>(p.rssi)};
  }
  return out;
}

inline std::vector<AlignedTrace> align_all(std::span<const LinkTrace> traces,
                                           double fill = 0.0) {
  std::vector<AlignedTrace> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(align(t, fill));
  return out;
}

/// Class of a whole link from its PRR over all slots.
inline LinkClass link_class_of_trace(const AlignedTrace& trace) {
  if (trace.slots.empty()) return LinkClass::bad;
  return label_of(static_cast<double>(trace.received_count()) /
                  static_cast<double>(trace.slots.size()));
}

struct CorpusStats {
  std::size_t n_traces = 0;
  std::size_t n_links = 0;  // distinct (source, destination) pairs
  std::size_t n_empty_traces = 0;
  std::uint64_t n_sent = 0;
  std::uint64_t n_received = 0;
  double reception_ratio = 0.0;
  std::optional<PerClass<double>> class_share;
};

/// Corpus statistics. `labels`, when non-empty, supplies the labels whose
/// class shares are reported (one per link, or one per sample).
inline CorpusStats corpus_stats(std::span<const AlignedTrace> corpus,
                                std::span<const LinkClass> labels = {}) {
  if (corpus.empty()) throw EmptyCorpusError("corpus_stats: empty corpus");
  CorpusStats s;
  s.n_traces = corpus.size();
  std::set<std::pair<std::string, std::string>> links;
  for (const auto& t : corpus) {
    links.emplace(t.source_id, t.dest_id);
    s.n_sent += t.slots.size();
    const auto rx = t.received_count();
    s.n_received += rx;
    if (rx == 0) ++s.n_empty_traces;
  }
  s.n_links = links.size();
  s.reception_ratio =
      s.n_sent == 0 ? 0.0 : static_cast<double>(s.n_received) / static_cast<double>(s.n_sent);
  if (!labels.empty()) {
    PerClass<double> share{};
    for (auto c : labels) share[index_of(c)] += 1.0;
    for (auto& v : share) v /= static_cast<double>(labels.size());
    s.class_share = share;
  }
  return s;
}

/// Per-link labels for corpus_stats.
inline std::vector<LinkClass> link_labels(std::span<const AlignedTrace> corpus) {
  std::vector<LinkClass> out;
  out.reserve(corpus.size());
  for (const auto& t : corpus) out.push_back(link_class_of_trace(t));
  return out;
}

}  // namespace linkq
