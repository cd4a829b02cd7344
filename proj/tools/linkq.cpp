// linkq: link-quality classification experiments on packet traces.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "linkq/config.hpp"
#include "linkq/error.hpp"
#include "linkq/pipeline.hpp"
#include "linkq/predict.hpp"
#include "linkq/synthetic.hpp"
#include "linkq/tables.hpp"
#include "linkq/trace_io.hpp"

namespace fs = std::filesystem;
using namespace linkq;

namespace {

void print_stats(std::ostream& os, const CorpusStats& s) {
  os << "traces:          " << s.n_traces << "\n"
     << "links:           " << s.n_links << "\n"
     << "empty traces:    " << s.n_empty_traces << "\n"
     << "packets sent:    " << s.n_sent << "\n"
     << "packets received:" << s.n_received << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * s.reception_ratio);
  os << "reception ratio: " << buf << "\n";
  if (s.class_share) {
    std::snprintf(buf, sizeof buf, "%.1f/%.1f/%.1f%%", 100.0 * (*s.class_share)[2],
                  100.0 * (*s.class_share)[1], 100.0 * (*s.class_share)[0]);
    os << "links good/intermediate/bad: " << buf << "\n";
  }
}

ErrorRssiPolicy parse_policy(const std::string& s) {
  if (s == "lost") return ErrorRssiPolicy::lost;
  if (s == "drop_row") return ErrorRssiPolicy::drop_row;
  throw ConfigError("--error-rssi must be 'lost' or 'drop_row'");
}

std::uint64_t master_seed(std::optional<std::uint64_t> flag) {
  PipelineConfig tmp;
  if (flag) tmp.seed = *flag;
  apply_env_overrides(tmp);
  return tmp.seed;
}

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    try {
      fn(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    if (!out) throw IoError("error writing '" + path + "'");
  }
  fs::rename(tmp, p);
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string raw, csv, out;
  int trace_length = kDefaultTraceLength;
  int seq_base = 0;
  std::string error_rssi = "lost";
};

int cmd_ingest(const IngestArgs& a) {
  const TraceReadOptions read{a.trace_length, parse_policy(a.error_rssi)};
  std::vector<LinkTrace> traces;
  if (!a.raw.empty()) {
    auto res = parse_rutgers_layout(a.raw, {read, a.seq_base, &std::cerr});
    traces = std::move(res.traces);
    if (!res.skipped_files.empty() || res.dropped_rows > 0)
      std::cerr << "skipped files: " << res.skipped_files.size()
                << ", dropped rows: " << res.dropped_rows << "\n";
  } else {
    std::ifstream in(a.csv);
    if (!in) throw IoError("cannot open '" + a.csv + "'");
    traces = parse_canonical_csv(in, read);
  }
  const auto aligned = align_all(traces);
  print_stats(std::cerr, corpus_stats(aligned, link_labels(aligned)));
  write_file(a.out, [&](std::ostream& o) { write_canonical_csv(o, traces); });
  return 0;
}

struct SynthArgs {
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traces;
  std::optional<int> trace_length;
};

int cmd_synth(const SynthArgs& a) {
  SynthSpec spec;
  std::uint64_t seed = master_seed(a.seed);
  if (!a.config.empty()) {
    auto cfg = load_config(a.config);
    apply_env_overrides(cfg);
    spec = cfg.input.synthetic;
    if (!a.seed) seed = cfg.seed;
  }
  if (a.n_traces) spec.n_traces = *a.n_traces;
  if (a.trace_length) spec.trace_length = *a.trace_length;
  validate(spec);
  const auto aligned = generate_synthetic_corpus(spec, derive_seed(seed, "synthetic"));
  std::vector<LinkTrace> traces;
  for (const auto& t : aligned) traces.push_back(to_link_trace(t));
  print_stats(std::cerr, corpus_stats(aligned, link_labels(aligned)));
  write_file(a.out, [&](std::ostream& o) { write_canonical_csv(o, traces); });
  return 0;
}

struct RunArgs {
  std::string config;
  std::string output_dir;
  std::optional<int> workers;
};

int cmd_run(const RunArgs& a) {
  auto cfg = load_config(a.config);
  apply_env_overrides(cfg);
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (a.workers) cfg.workers = *a.workers;
  const auto summary = run(cfg, &std::cerr);
  print_stats(std::cerr, summary.stats);
  for (const auto& r : summary.reports) {
    const auto& m = r.pooled;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-32s acc %5.1f  f1 %5.1f  int-f1 %5.1f  int-prec %5.1f  train %.3fs",
                  r.name.c_str(), 100.0 * m.aggregate.accuracy, 100.0 * m.aggregate.weighted_f1,
                  100.0 * m.per_class.f1[1], 100.0 * m.per_class.precision[1],
                  m.training_time_seconds);
    std::cout << buf << "\n";
  }
  std::cout << "wrote " << summary.files.size() << " files to " << cfg.output_dir << "\n";
  return 0;
}

struct TablesArgs {
  std::string which;
  std::string config, csv, raw, out;
  std::string scope = "all";
  std::optional<int> k;
  std::optional<std::size_t> n_traces;
  std::optional<int> workers;
};

int cmd_tables(const TablesArgs& a) {
  if (!is_table_id(a.which)) throw ConfigError("--which must be II, III or IV");
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  apply_env_overrides(cfg);
  if (!a.csv.empty()) {
    cfg.input.kind = InputKind::csv;
    cfg.input.path = a.csv;
  } else if (!a.raw.empty()) {
    cfg.input.kind = InputKind::raw;
    cfg.input.path = a.raw;
  }
  if (a.scope == "all") cfg.resample_scope = ResampleScope::all;
  else if (a.scope == "train") cfg.resample_scope = ResampleScope::train;
  else throw ConfigError("--scope must be 'train' or 'all'");
  if (a.k) cfg.cv.k = *a.k;
  if (a.n_traces) cfg.input.synthetic.n_traces = *a.n_traces;
  if (a.workers) cfg.workers = *a.workers;

  const auto corpus = in_stage("ingest", [&] { return load_corpus(cfg, &std::cerr); });
  const auto table = reproduce_table(a.which, cfg, corpus, !corpus.synthetic);
  std::cout << render_table(table);
  if (!a.out.empty()) write_file(a.out, [&](std::ostream& o) { o << to_json(table).dump(2) << "\n"; });
  return 0;
}

struct PredictArgs {
  std::string model, csv, out;
};

int cmd_predict(const PredictArgs& a) {
  std::ifstream min(a.model);
  if (!min) throw IoError("cannot open model '" + a.model + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(min);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model '" + a.model + "': " + e.what());
  }
  const auto deployed = deployed_model_from_json(j);
  std::ifstream in(a.csv);
  if (!in) throw IoError("cannot open '" + a.csv + "'");
  write_file(a.out, [&](std::ostream& o) { predict_csv(in, o, deployed); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linkq: link-quality classification from packet traces"};
  app.set_version_flag("--version", std::string(LINKQ_VERSION));
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "convert a trace-set to canonical CSV");
  auto* o_raw = c_ingest->add_option("--raw", ingest.raw, "directory in per-noise-level layout");
  auto* o_csv = c_ingest->add_option("--csv", ingest.csv, "canonical CSV to validate and normalize");
  o_raw->excludes(o_csv);
  c_ingest->require_option(1, 0);
  c_ingest->add_option("--out", ingest.out, "output CSV ('-' for stdout)")->required();
  c_ingest->add_option("--trace-length", ingest.trace_length, "slots per trace");
  c_ingest->add_option("--seq-base", ingest.seq_base, "first sequence number in raw files");
  c_ingest->add_option("--error-rssi", ingest.error_rssi, "lost | drop_row");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic trace corpus");
  c_synth->add_option("--out", synth.out, "output CSV ('-' for stdout)")->required();
  c_synth->add_option("--config", synth.config, "take the synthetic spec from a config file");
  c_synth->add_option("--seed", synth.seed, "master seed");
  c_synth->add_option("--n-traces", synth.n_traces, "number of traces");
  c_synth->add_option("--trace-length", synth.trace_length, "slots per trace");

  RunArgs runa;
  auto* c_run = app.add_subcommand("run", "run the configured experiment");
  c_run->add_option("--config", runa.config, "TOML or JSON config")->required();
  c_run->add_option("--output-dir", runa.output_dir, "override output_dir");
  c_run->add_option("--workers", runa.workers, "parallel grid entries (0 = all cores)");

  TablesArgs tables;
  auto* c_tables = app.add_subcommand("tables", "rerun a comparison table against published values");
  c_tables->add_option("--which", tables.which, "II | III | IV")->required();
  c_tables->add_option("--config", tables.config, "base config (input, windows, cv, hyperparameters)");
  auto* t_csv = c_tables->add_option("--csv", tables.csv, "canonical CSV input");
  auto* t_raw = c_tables->add_option("--raw", tables.raw, "raw trace-set directory");
  t_csv->excludes(t_raw);
  c_tables->add_option("--scope", tables.scope, "resampling scope: all (default) | train");
  c_tables->add_option("--k", tables.k, "number of folds");
  c_tables->add_option("--n-traces", tables.n_traces, "synthetic corpus size");
  c_tables->add_option("--workers", tables.workers, "parallel grid entries");
  c_tables->add_option("--out", tables.out, "also write the table as JSON");

  PredictArgs pred;
  auto* c_predict = app.add_subcommand("predict", "classify traces with a saved model");
  c_predict->add_option("--model", pred.model, "model JSON written by run")->required();
  c_predict->add_option("--csv", pred.csv, "canonical CSV input")->required();
  c_predict->add_option("--out", pred.out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::config);
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest);
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_run->parsed()) return cmd_run(runa);
    if (c_tables->parsed()) return cmd_tables(tables);
    if (c_predict->parsed()) return cmd_predict(pred);
  } catch (const Error& e) {
    std::cerr << "linkq: error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "linkq: error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::data);
  } catch (const std::exception& e) {
    std::cerr << "linkq: internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::internal);
  }
  return static_cast<int>(ExitCode::internal);
}
