#pragma once

// End-to-end experiment runs: ingest -> featurize -> split -> resample ->
// train -> evaluate -> report.

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "linkq/config.hpp"
#include "linkq/dataset.hpp"
#include "linkq/error.hpp"
#include "linkq/features.hpp"
#include "linkq/metrics.hpp"
#include "linkq/model.hpp"
#include "linkq/rng.hpp"
#include "linkq/synthetic.hpp"
#include "linkq/trace.hpp"
#include "linkq/trace_io.hpp"

#ifndef LINKQ_VERSION
#define LINKQ_VERSION "dev"
#endif

namespace linkq {

/// An error annotated with the pipeline stage it came from. Keeps the exit
/// code of the original error.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, ExitCode code)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)), code_(code) {}
  ExitCode exit_code() const noexcept override { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
  ExitCode code_;
};

template <class Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what(), e.exit_code());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), ExitCode::internal);
  }
}

struct InputChecksum {
  std::string path;
  std::string fnv1a64;
};

struct Corpus {
  std::vector<AlignedTrace> traces;
  std::vector<InputChecksum> checksums;
  std::vector<std::string> skipped_files;
  std::size_t dropped_rows = 0;
  bool synthetic = false;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_checksum(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  return hex64(h);
}

}  // namespace detail

inline Corpus load_corpus(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  Corpus corpus;
  const TraceReadOptions read{cfg.trace_length, cfg.error_policy};
  switch (cfg.input.kind) {
    case InputKind::synthetic: {
      corpus.synthetic = true;
      corpus.traces =
          generate_synthetic_corpus(cfg.input.synthetic, derive_seed(cfg.seed, "synthetic"));
      if (cfg.fill != 0.0)
        for (auto& t : corpus.traces)
          for (auto& s : t.slots)
            if (!s.received) s.rssi = cfg.fill;
      break;
    }
    case InputKind::csv: {
      std::ifstream in(cfg.input.path);
      if (!in) throw IoError("cannot open '" + cfg.input.path + "'");
      const auto traces = parse_canonical_csv(in, read);
      corpus.traces = align_all(traces, cfg.fill);
      corpus.checksums.push_back({cfg.input.path, detail::file_checksum(cfg.input.path)});
      break;
    }
    case InputKind::raw: {
      auto raw = parse_rutgers_layout(cfg.input.path, {read, cfg.input.seq_base, log});
      corpus.traces = align_all(raw.traces, cfg.fill);
      corpus.skipped_files = std::move(raw.skipped_files);
      corpus.dropped_rows = raw.dropped_rows;
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(cfg.input.path))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (const auto& f : files) {
        h = fnv1a(fs::relative(f, cfg.input.path).generic_string(), h);
        h = fnv1a(detail::file_checksum(f), h);
      }
      corpus.checksums.push_back({cfg.input.path, detail::hex64(h)});
      break;
    }
  }
  if (corpus.traces.empty()) throw EmptyCorpusError("corpus has no traces");
  return corpus;
}

// ---------------------------------------------------------------------------

/// Seeds for every stage, derived from the master seed so that a stage can
/// be rerun in isolation and grid order does not matter.
struct StageSeeds {
  std::uint64_t master = 0;

  std::uint64_t folds(const CvConfig& cv, int repeat) const {
    const auto base = cv.seed ? *cv.seed : derive_seed(master, "folds");
    return repeat == 0 ? base : derive_seed(base, "repeat/" + std::to_string(repeat));
  }
  std::uint64_t resample_all(Resample r) const {
    return derive_seed(master, "resample/all/" + std::string(to_string(r)));
  }
  std::uint64_t resample_fold(Resample r, int repeat, int fold) const {
    return derive_seed(master, "resample/" + std::string(to_string(r)) + "/" +
                                   std::to_string(repeat) + "/" + std::to_string(fold));
  }
  std::uint64_t model(const ModelSpec& spec, int repeat, int fold) const {
    return spec.seed ^ derive_seed(master, "model/" + std::string(to_string(spec.kind())) + "/" +
                                               std::to_string(repeat) + "/" + std::to_string(fold));
  }
};

inline FoldPlan make_fold_plan(const Dataset& data, const CvConfig& cv, std::uint64_t seed) {
  return cv.group_by_link ? grouped_kfold(data.groups, cv.k, seed)
                          : stratified_kfold(data.y, cv.k, seed);
}

struct EntryResult {
  GridEntry entry;
  EvaluationReport report;
  std::optional<TrainedModel> final_model;
};

/// Cross-validates one grid entry on an already featurized dataset.
inline EntryResult run_entry(const PipelineConfig& cfg, const GridEntry& entry,
                             const Dataset& data) {
  const StageSeeds seeds{cfg.seed};
  EntryResult result{entry, {}, std::nullopt};

  const bool resample_first = cfg.resample_scope == ResampleScope::all;
  const Dataset base = resample_first
                           ? in_stage("resample", [&] {
                               return resample(data, entry.resample,
                                               seeds.resample_all(entry.resample));
                             })
                           : data;

  std::vector<FoldOutcome> outcomes;
  for (int repeat = 0; repeat < cfg.cv.repeats; ++repeat) {
    const auto plan =
        in_stage("split", [&] { return make_fold_plan(base, cfg.cv, seeds.folds(cfg.cv, repeat)); });
    for (int fold = 0; fold < cfg.cv.k; ++fold) {
      const auto test_idx = plan.test_indices(fold);
      const auto train_idx = plan.train_indices(fold);
      Dataset train = base.subset(train_idx);
      const Dataset test = base.subset(test_idx);
      if (!resample_first) {
        train = in_stage("resample", [&] {
          return resample(train, entry.resample, seeds.resample_fold(entry.resample, repeat, fold));
        });
        // Evaluation rows must keep the original class balance.
        PerClass<std::size_t> expected{};
        for (auto i : test_idx) ++expected[index_of(base.y[i])];
        if (expected != test.class_counts())
          throw StageError("evaluate", "evaluation fold was altered by resampling",
                           ExitCode::internal);
      }
      ModelSpec spec = entry.model;
      spec.seed = seeds.model(entry.model, repeat, fold);
      const auto model = in_stage("train", [&] { return fit(spec, train); });
      const auto counts = train.class_counts();
      outcomes.push_back(in_stage("evaluate", [&] {
        return evaluate_fold(model, test,
                             {repeat, fold, train.rows(), {counts[0], counts[1], counts[2]}});
      }));
    }
  }
  result.report = merge_reports(outcomes);
  result.report.name = entry.name;

  if (cfg.save_models) {
    const Dataset full = resample_first ? base
                                        : in_stage("resample", [&] {
                                            return resample(data, entry.resample,
                                                            seeds.resample_all(entry.resample));
                                          });
    ModelSpec spec = entry.model;
    spec.seed = seeds.model(entry.model, -1, -1);
    result.final_model = in_stage("train", [&] { return fit(spec, full); });
  }
  return result;
}

/// Featurizes the corpus once per feature set and runs every entry, using up
/// to `workers` threads. Results come back in grid order.
inline std::vector<EntryResult> run_grid(const PipelineConfig& cfg, const Corpus& corpus,
                                         const std::vector<GridEntry>& grid,
                                         std::map<FeatureSet, std::size_t>* sample_counts = nullptr) {
  std::map<FeatureSet, Dataset> datasets;
  in_stage("featurize", [&] {
    for (const auto& e : grid) {
      if (datasets.contains(e.feature_set)) continue;
      auto d = build_dataset(corpus.traces, cfg.window, e.feature_set);
      d.validate();
      if (d.empty()) throw DataError("no samples: every trace is shorter than the windows");
      datasets.emplace(e.feature_set, std::move(d));
    }
    return 0;
  });
  if (sample_counts)
    for (const auto& [fs, d] : datasets) (*sample_counts)[fs] = d.rows();

  std::vector<std::optional<EntryResult>> results(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        results[i] = run_entry(cfg, grid[i], datasets.at(grid[i].feature_set));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_workers = std::min<std::size_t>(
      grid.size(), cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers) : hw);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<EntryResult> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

inline nlohmann::json provenance_of(const PipelineConfig& cfg, const GridEntry& entry,
                                    const Dataset* data = nullptr) {
  nlohmann::json p = {{"config", to_json(cfg)},
                      {"config_hash", config_hash(cfg)},
                      {"entry", to_json(entry)},
                      {"resample_scope", std::string(to_string(cfg.resample_scope))},
                      {"tool_version", LINKQ_VERSION}};
  if (data) {
    const auto c = data->class_counts();
    p["n_samples"] = data->rows();
    p["class_counts"] = {{"bad", c[0]}, {"intermediate", c[1]}, {"good", c[2]}};
  }
  return p;
}

/// Model document plus the featurization needed to apply it to traces.
inline nlohmann::json model_document(const TrainedModel& model, const PipelineConfig& cfg,
                                     FeatureSet fs) {
  auto j = to_json(model);
  j["features"] = {{"feature_set", std::string(to_string(fs))},
                   {"w_history", cfg.window.w_history},
                   {"w_prr", cfg.window.w_prr},
                   {"fill", cfg.fill},
                   {"trace_length", cfg.trace_length},
                   {"error_rssi", cfg.error_policy == ErrorRssiPolicy::lost ? "lost" : "drop_row"}};
  return j;
}

struct RunSummary {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;
  std::vector<EvaluationReport> reports;
  CorpusStats stats;
};

namespace detail {

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Tracks files written by a run and deletes them unless committed.
class OutputTransaction {
 public:
  explicit OutputTransaction(std::filesystem::path root) : root_(std::move(root)) {}
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;
  ~OutputTransaction() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) std::filesystem::remove(*it, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) std::filesystem::remove(*it, ec);
  }

  std::filesystem::path dir(const std::string& sub) {
    auto p = sub.empty() ? root_ : root_ / sub;
    make_dirs(p);
    return p;
  }

  template <class Fn>
  std::filesystem::path write(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    files_.push_back(path);
    fn(out);
    if (!out) throw IoError("error writing '" + path.string() + "'");
    return path;
  }

  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  void make_dirs(const std::filesystem::path& p) {
    if (p.empty() || std::filesystem::exists(p)) return;
    make_dirs(p.parent_path());
    std::filesystem::create_directory(p);
    dirs_.push_back(p);
  }

  std::filesystem::path root_;
  std::vector<std::filesystem::path> files_;
  std::vector<std::filesystem::path> dirs_;
  bool committed_ = false;
};

}  // namespace detail

/// Runs the whole configured experiment and writes reports, plot CSVs,
/// models and a manifest under cfg.output_dir. On failure, files written by
/// this run are removed again.
inline RunSummary run(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  in_stage("config", [&] {
    validate(cfg);
    return 0;
  });
  const auto started = detail::utc_now();
  const auto grid = expand_grid(cfg);
  const auto corpus = in_stage("ingest", [&] { return load_corpus(cfg, log); });

  RunSummary summary;
  summary.output_dir = cfg.output_dir;
  summary.stats = in_stage("ingest", [&] {
    return corpus_stats(corpus.traces, link_labels(corpus.traces));
  });

  std::map<FeatureSet, std::size_t> sample_counts;
  auto results = run_grid(cfg, corpus, grid, &sample_counts);

  detail::OutputTransaction tx(cfg.output_dir);
  in_stage("report", [&] {
    const auto reports_dir = tx.dir("reports");
    const auto plots_dir = tx.dir("plots");
    for (auto& r : results) {
      nlohmann::json prov = provenance_of(cfg, r.entry);
      prov["n_samples"] = sample_counts.at(r.entry.feature_set);
      r.report.provenance = std::move(prov);
      const auto& name = r.entry.name;
      tx.write(reports_dir / (name + ".json"),
               [&](std::ostream& o) { o << to_json(r.report).dump(2) << '\n'; });
      tx.write(plots_dir / (name + "_roc.csv"),
               [&](std::ostream& o) { write_roc_csv(o, r.report.pooled.roc); });
      tx.write(plots_dir / (name + "_bars.csv"),
               [&](std::ostream& o) { write_bars_csv(o, r.report.pooled); });
      if (r.final_model) {
        const auto models_dir = tx.dir("models");
        tx.write(models_dir / (name + ".model.json"), [&](std::ostream& o) {
          o << model_document(*r.final_model, cfg, r.entry.feature_set).dump(2) << '\n';
        });
      }
      summary.reports.push_back(r.report);
    }
    if (cfg.export_folds && cfg.resample_scope == ResampleScope::train) {
      const auto d = build_dataset(corpus.traces, cfg.window, grid.front().feature_set);
      const auto plan = make_fold_plan(d, cfg.cv, StageSeeds{cfg.seed}.folds(cfg.cv, 0));
      tx.write(tx.dir("") / "folds.csv", [&](std::ostream& o) { write_fold_plan_csv(o, plan); });
    }

    nlohmann::json manifest;
    manifest["tool"] = "linkq";
    manifest["tool_version"] = LINKQ_VERSION;
    manifest["config"] = to_json(cfg);
    manifest["config_hash"] = config_hash(cfg);
    auto inputs = nlohmann::json::array();
    for (const auto& c : corpus.checksums) inputs.push_back({{"path", c.path}, {"fnv1a64", c.fnv1a64}});
    manifest["inputs"] = inputs;
    manifest["synthetic_input"] = corpus.synthetic;
    const auto& s = summary.stats;
    manifest["corpus"] = {{"n_traces", s.n_traces},
                          {"n_links", s.n_links},
                          {"n_empty_traces", s.n_empty_traces},
                          {"n_sent", s.n_sent},
                          {"n_received", s.n_received},
                          {"reception_ratio", s.reception_ratio},
                          {"link_class_share",
                           {{"bad", (*s.class_share)[0]},
                            {"intermediate", (*s.class_share)[1]},
                            {"good", (*s.class_share)[2]}}},
                          {"skipped_files", corpus.skipped_files},
                          {"dropped_rows", corpus.dropped_rows}};
    nlohmann::json samples;
    for (const auto& [fs, n] : sample_counts) samples[std::string(to_string(fs))] = n;
    manifest["samples"] = samples;
    auto entries = nlohmann::json::array();
    for (const auto& e : grid) entries.push_back(e.name);
    manifest["entries"] = entries;
    manifest["started_at"] = started;
    manifest["finished_at"] = detail::utc_now();
    tx.write(tx.dir("") / "manifest.json",
             [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    return 0;
  });
  summary.files = tx.files();
  tx.commit();
  return summary;
}

}  // namespace linkq
