#pragma once

// Reading and writing link traces.
//
// Canonical CSV (the interchange format):
//
//   trace_id,src,dst,noise_dbm,seq,rssi
//   n1_n2@-5,n1,n2,-5,0,41
//
// One packet per row; missing packets are absent rows. A row with empty seq
// and rssi fields declares a trace that has no packets at all, so empty
// traces survive a round trip.
//
// Raw directory layout (best effort; unreadable files are skipped and
// reported):
//
//   <root>/<noise-dir>/<src>_<dst>[.ext]      or
//   <root>/<noise-dir>/<src>/<dst>[.ext]
//
// <noise-dir> is any directory name containing the noise level as a signed
// integer, e.g. `dbm-5`, `-10dBm`, `noise_0`. Each file holds one packet per
// line as `seq rssi` (whitespace, comma or semicolon separated; extra columns
// are ignored). Blank lines, `#` comments and one leading non-numeric header
// line are skipped.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "linkq/error.hpp"
#include "linkq/trace.hpp"

namespace linkq {

inline constexpr std::string_view kCanonicalCsvHeader = "trace_id,src,dst,noise_dbm,seq,rssi";

struct TraceReadOptions {
  int trace_length = kDefaultTraceLength;
  ErrorRssiPolicy error_policy = ErrorRssiPolicy::lost;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_int(std::string_view s, int& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Sorts by seq and drops later duplicates.
inline void sort_and_dedupe(std::vector<PacketRecord>& packets) {
  std::stable_sort(packets.begin(), packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.seq < b.seq; });
  packets.erase(std::unique(packets.begin(), packets.end(),
                            [](const PacketRecord& a, const PacketRecord& b) {
                              return a.seq == b.seq;
                            }),
                packets.end());
}

}  // namespace detail

inline std::vector<LinkTrace> parse_canonical_csv(std::istream& in,
                                                  const TraceReadOptions& opts = {}) {
  if (opts.trace_length < 1) throw ConfigError("trace_length must be positive");
  std::vector<LinkTrace> traces;
  std::map<std::string, std::size_t, std::less<>> index;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = detail::trim(view);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != kCanonicalCsvHeader)
        throw ParseError(line_no, "expected header '" + std::string(kCanonicalCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(view, ',');
    if (fields.size() != 6)
      throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty trace_id");
    int noise = 0;
    if (!detail::parse_int(fields[3], noise)) throw ParseError(line_no, "bad noise_dbm");
    if (!is_valid_noise_level(noise))
      throw RangeError("line " + std::to_string(line_no) + ": noise_dbm " +
                       std::to_string(noise) + " not in {0,-5,-10,-15,-20}");

    auto it = index.find(fields[0]);
    if (it == index.end()) {
      it = index.emplace(std::string(fields[0]), traces.size()).first;
      traces.push_back(LinkTrace{std::string(fields[0]), std::string(fields[1]),
                                 std::string(fields[2]), noise, {}, opts.trace_length});
    } else {
      const auto& t = traces[it->second];
      if (t.source_id != fields[1] || t.dest_id != fields[2] || t.noise_dbm != noise)
        throw ParseError(line_no, "metadata of trace '" + t.trace_id + "' changes between rows");
    }

    if (fields[4].empty() && fields[5].empty()) continue;  // packetless declaration
    int seq = 0, rssi = 0;
    if (!detail::parse_int(fields[4], seq)) throw ParseError(line_no, "bad seq");
    if (!detail::parse_int(fields[5], rssi)) throw ParseError(line_no, "bad rssi");
    if (seq < 0 || seq >= opts.trace_length)
      throw RangeError("line " + std::to_string(line_no) + ": seq " + std::to_string(seq) +
                       " outside [0, " + std::to_string(opts.trace_length) + ")");
    if (rssi < 0 || rssi > kRssiError)
      throw RangeError("line " + std::to_string(line_no) + ": rssi " + std::to_string(rssi) +
                       " outside [0, 128]");
    if (rssi == kRssiError && opts.error_policy == ErrorRssiPolicy::drop_row) continue;
    traces[it->second].packets.push_back({seq, rssi});
  }
  for (auto& t : traces) detail::sort_and_dedupe(t.packets);
  return traces;
}

inline void write_canonical_csv(std::ostream& out, std::span<const LinkTrace> traces) {
  out << kCanonicalCsvHeader << '\n';
  for (const auto& t : traces) {
    const auto prefix =
        t.trace_id + ',' + t.source_id + ',' + t.dest_id + ',' + std::to_string(t.noise_dbm) + ',';
    if (t.packets.empty()) {
      out << prefix << ",\n";
      continue;
    }
    for (const auto& p : t.packets) out << prefix << p.seq << ',' << p.rssi << '\n';
  }
}

/// Inverse of align() for writing generated corpora: received slots become
/// packets with their (rounded) RSSI.
inline LinkTrace to_link_trace(const AlignedTrace& aligned) {
  LinkTrace t{aligned.trace_id, aligned.source_id, aligned.dest_id, aligned.noise_dbm, {},
              aligned.length()};
  for (int s = 0; s < aligned.length(); ++s) {
    const auto& slot = aligned.slots[static_cast<std::size_t>(s)];
    if (slot.received) t.packets.push_back({s, static_cast<int>(std::lround(slot.rssi))});
  }
  return t;
}

struct RawIngestResult {
  std::vector<LinkTrace> traces;
  std::vector<std::string> skipped_files;
  std::size_t dropped_rows = 0;
};

struct RawLayoutOptions {
  TraceReadOptions read;
  int seq_base = 0;  // subtracted from every sequence number
  std::ostream* log = nullptr;
};

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == ';' || c == '\r'; };
  while (i < s.size()) {
    while (i < s.size() && is_sep(s[i])) ++i;
    const auto start = i;
    while (i < s.size() && !is_sep(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Returns false when the file is not a packet listing.
inline bool read_raw_packets(const std::filesystem::path& file, const RawLayoutOptions& opts,
                             std::vector<PacketRecord>& packets, std::size_t& dropped,
                             std::string& why) {
  std::ifstream in(file);
  if (!in) {
    why = "cannot open";
    return false;
  }
  std::string line;
  bool first_content = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto tokens = split_tokens(view);
    int seq = 0, rssi = 0;
    if (tokens.size() < 2 || !parse_int(tokens[0], seq) || !parse_int(tokens[1], rssi)) {
      if (first_content) {
        first_content = false;
        continue;
      }
      why = "unparseable line " + std::to_string(line_no);
      return false;
    }
    first_content = false;
    seq -= opts.seq_base;
    if (seq < 0 || seq >= opts.read.trace_length || rssi < 0 || rssi > kRssiError) {
      ++dropped;
      continue;
    }
    if (rssi == kRssiError && opts.read.error_policy == ErrorRssiPolicy::drop_row) continue;
    packets.push_back({seq, rssi});
  }
  if (in.bad()) {
    why = "read error";
    return false;
  }
  sort_and_dedupe(packets);
  return true;
}

}  // namespace detail

inline RawIngestResult parse_rutgers_layout(const std::filesystem::path& root,
                                            const RawLayoutOptions& opts = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw IoError("raw trace root '" + root.string() + "' is not a readable directory");

  RawIngestResult result;
  auto skip = [&](const fs::path& p, const std::string& why) {
    result.skipped_files.push_back(p.string());
    if (opts.log) *opts.log << "warning: skipping " << p.string() << ": " << why << '\n';
  };

  static const std::regex noise_re(R"((-?\d+))");
  std::vector<fs::path> noise_dirs;
  for (const auto& entry : fs::directory_iterator(root, ec))
    if (entry.is_directory()) noise_dirs.push_back(entry.path());
  if (ec) throw IoError("cannot list '" + root.string() + "': " + ec.message());
  std::sort(noise_dirs.begin(), noise_dirs.end());

  for (const auto& dir : noise_dirs) {
    std::smatch m;
    const auto name = dir.filename().string();
    int noise = 0;
    if (!std::regex_search(name, m, noise_re) || !detail::parse_int(m[1].str(), noise) ||
        !is_valid_noise_level(noise)) {
      skip(dir, "directory name carries no valid noise level");
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir, ec))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
      const auto rel = fs::relative(file, dir);
      const auto stem = file.stem().string();
      std::string src, dst;
      if (const auto us = stem.find('_'); us != std::string::npos && us > 0 &&
                                          us + 1 < stem.size() && !rel.has_parent_path()) {
        src = stem.substr(0, us);
        dst = stem.substr(us + 1);
      } else if (std::distance(rel.begin(), rel.end()) == 2) {
        src = rel.begin()->string();
        dst = stem;
      } else {
        skip(file, "cannot infer link endpoints from path");
        continue;
      }
      LinkTrace trace{src + "_" + dst + "@" + std::to_string(noise), src, dst, noise, {},
                      opts.read.trace_length};
      std::string why;
      if (!detail::read_raw_packets(file, opts, trace.packets, result.dropped_rows, why)) {
        skip(file, why);
        continue;
      }
      result.traces.push_back(std::move(trace));
    }
  }
  if (result.traces.empty())
    throw EmptyCorpusError("empty corpus: no traces recognized under '" + root.string() + "'");
  std::sort(result.traces.begin(), result.traces.end(),
            [](const LinkTrace& a, const LinkTrace& b) { return a.trace_id < b.trace_id; });
  return result;
}

}  // namespace linkq
