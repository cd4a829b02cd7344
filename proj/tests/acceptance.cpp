// Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails. Criteria 9-13 need the real trace-set:
// point LINKQ_RUTGERS_DIR at the raw directory layout or LINKQ_RUTGERS_CSV at
// a canonical CSV export.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "linkq/labeling.hpp"
#include "linkq/metrics.hpp"
#include "linkq/model.hpp"
#include "linkq/pipeline.hpp"
#include "linkq/published.hpp"

using namespace linkq;

namespace {

// Tolerances.
constexpr double kMetricTol = 1e-12;
constexpr double kAucTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kTableIIAccTolPp = 3.0;
constexpr double kTableIIIntF1MinPct = 85.0;
constexpr double kFeatureGainMinRel = 0.40;
constexpr double kTableIIIAccTolPp = 2.0;
constexpr double kNoResampleIntPrecMaxPct = 75.0;
constexpr double kRosIntPrecMinPct = 85.0;
constexpr double kDtreeMlpF1TolPp = 1.0;
constexpr double kReceptionTolPp = 0.01;
constexpr double kSyntheticGainMinPp = 5.0;

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ". " << title << ": " << detail << std::endl;
  if (!pass) ++failures;
}

void skip(int id, const std::string& title, const std::string& why) {
  std::cout << "[SKIP] " << id << ". " << title << ": " << why << std::endl;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<LinkClass> random_labels(Rng& rng, std::size_t n) {
  const double a = rng.uniform(0.05, 0.6), b = rng.uniform(0.02, 0.3);
  std::vector<LinkClass> y(n);
  for (auto& c : y) {
    const double u = rng.uniform();
    c = u < a ? LinkClass::bad : (u < a + b ? LinkClass::intermediate : LinkClass::good);
  }
  return y;
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
  const auto y = random_labels(rng, n);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x[i * d + j] = rng.normal(0.8 * double(index_of(y[i])) * double(j + 1), 1.0);
  return Dataset::from_matrix(std::move(x), d, y);
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const std::vector<std::pair<double, LinkClass>> cases = {
      {0.0, LinkClass::bad},          {0.05, LinkClass::bad},
      {0.1, LinkClass::bad},          {0.1 + 1e-9, LinkClass::intermediate},
      {0.5, LinkClass::intermediate}, {0.9 - 1e-9, LinkClass::intermediate},
      {0.9, LinkClass::good},         {1.0, LinkClass::good}};
  int wrong = 0;
  for (const auto& [p, c] : cases) wrong += label_of(p) != c;
  report(1, "label rule", wrong == 0, std::to_string(cases.size() - wrong) + "/8 PRR values labeled exactly");
}

void criterion_2() {
  Rng rng(derive_seed(1, "acceptance/2"));
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.below(500);
    const auto y = random_labels(rng, n);
    const auto p = random_labels(rng, n);
    const auto cm = confusion(y, p);
    const auto m = class_metrics(cm);
    const auto a = aggregate(cm, m);
    double correct = 0, wr = 0, wp = 0, wf = 0;
    for (std::size_t i = 0; i < n; ++i) correct += y[i] == p[i];
    worst = std::max(worst, std::abs(a.accuracy - correct / n));
    for (auto c : kAllClasses) {
      double tp = 0, pred = 0, act = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += y[i] == c && p[i] == c;
        pred += p[i] == c;
        act += y[i] == c;
      }
      const double prec = pred ? tp / pred : 0, rec = act ? tp / act : 0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
      const auto k = index_of(c);
      worst = std::max({worst, std::abs(m.precision[k] - prec), std::abs(m.recall[k] - rec),
                        std::abs(m.f1[k] - f1)});
      wp += act / n * prec;
      wr += act / n * rec;
      wf += act / n * f1;
    }
    worst = std::max({worst, std::abs(a.weighted_precision - wp), std::abs(a.weighted_recall - wr),
                      std::abs(a.weighted_f1 - wf), std::abs(a.weighted_recall - a.accuracy)});
  }
  report(2, "metric oracle equivalence", worst <= kMetricTol,
         fmt("1000 random confusion matrices, max |diff| %.2e (tol 1e-12), weighted recall == accuracy", worst));
}

void criterion_3() {
  Rng rng(derive_seed(1, "acceptance/3"));
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> s(n);
    std::vector<std::uint8_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = rng.uniform() < 0.5;
      s[i] = rep % 2 ? rng.uniform() : double(rng.below(6)) / 5.0;
    }
    pos[0] = 1;
    pos[1] = 0;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (pos[i] && !pos[j]) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    worst = std::max(worst, std::abs(roc_curve(s, pos).auc - wins / pairs));
  }
  report(3, "AUC oracle", worst <= kAucTol,
         fmt("200 random score sets, max |trapezoid - pairwise| %.2e (tol 1e-9)", worst));
}

void criterion_4() {
  Rng rng(derive_seed(1, "acceptance/4"));
  int bad = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto y = random_labels(rng, 30 + rng.below(500));
    PerClass<std::size_t> counts{};
    for (auto c : y) ++counts[index_of(c)];
    std::size_t hi = 0, lo = y.size();
    for (auto n : counts)
      if (n) hi = std::max(hi, n), lo = std::min(lo, n);
    const auto seed = rng.next();
    const auto ros = resample_indices(y, Resample::ros, seed);
    const auto rus = resample_indices(y, Resample::rus, seed);
    PerClass<std::size_t> cr{}, cu{};
    for (auto i : ros) ++cr[index_of(y[i])];
    for (auto i : rus) ++cu[index_of(y[i])];
    for (std::size_t c = 0; c < 3; ++c) {
      bad += cr[c] != (counts[c] ? hi : 0);
      bad += cu[c] != (counts[c] ? lo : 0);
    }
    std::vector<std::size_t> seen(y.size(), 0);
    for (auto i : ros) ++seen[i];
    bad += std::count(seen.begin(), seen.end(), 0) != 0;  // superset
    std::fill(seen.begin(), seen.end(), 0);
    for (auto i : rus) ++seen[i];
    bad += std::count_if(seen.begin(), seen.end(), [](auto v) { return v > 1; }) != 0;  // subset
    bad += ros != resample_indices(y, Resample::ros, seed);
    bad += rus != resample_indices(y, Resample::rus, seed);
  }
  report(4, "resampling postconditions", bad == 0,
         std::to_string(bad) + " violations over 200 label vectors (ROS to max, RUS to min, super/subset, seeded)");
}

void criterion_5() {
  Rng rng(derive_seed(1, "acceptance/5"));
  double worst = 0;
  int vectors = 0;
  while (vectors < 100) {
    const int k = 2 + static_cast<int>(rng.below(9));
    const auto y = random_labels(rng, 100 + rng.below(900));
    PerClass<std::size_t> total{};
    for (auto c : y) ++total[index_of(c)];
    if (std::any_of(total.begin(), total.end(), [&](auto n) { return n > 0 && n < std::size_t(k); }))
      continue;
    ++vectors;
    const auto plan = stratified_kfold(y, k, rng.next());
    std::vector<PerClass<std::size_t>> per(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < y.size(); ++i) ++per[static_cast<std::size_t>(plan.assignment[i])][index_of(y[i])];
    for (const auto& f : per)
      for (std::size_t c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(double(f[c]) - double(total[c]) / k));
  }
  report(5, "stratification", worst <= 1.0,
         fmt("100 label vectors, max |fold count - proportional| = %.3f (limit 1)", worst));
}

void criterion_6() {
  Rng rng(derive_seed(1, "acceptance/6"));
  int max_depth = 0;
  std::size_t min_node = SIZE_MAX;
  int trees = 0, mismatched = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t dim = 1 + rng.below(4);
    auto d = random_dataset(rng, 50 + rng.below(2000), dim);
    const auto m = fit(ModelSpec::defaults(ModelKind::dtree), d);
    if (!std::holds_alternative<TreeParams>(m.params)) continue;
    const auto& t = std::get<TreeParams>(m.params);
    ++trees;
    max_depth = std::max(max_depth, t.depth());
    std::vector<std::size_t> routed(t.nodes.size(), 0);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      std::size_t n = 0;
      while (true) {
        ++routed[n];
        const auto& node = t.nodes[n];
        if (node.is_leaf()) break;
        n = static_cast<std::size_t>(d.at(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right);
      }
    }
    for (auto c : routed) min_node = std::min(min_node, c);
    // strictly increasing per-feature transform
    for (auto& v : d.x) v = std::round(v * 4) / 4;
    auto tx = d;
    for (auto& v : tx.x) v = std::exp(v / 2.0) + v * v * v;
    const auto ma = fit(ModelSpec::defaults(ModelKind::dtree), d);
    const auto mb = fit(ModelSpec::defaults(ModelKind::dtree), tx);
    for (std::size_t i = 0; i < d.rows(); ++i)
      mismatched += predict(ma, d.row(i)) != predict(mb, tx.row(i));
  }
  const bool pass = max_depth <= 4 && min_node >= 50 && mismatched == 0;
  report(6, "tree constraints", pass,
         "max depth " + std::to_string(max_depth) + " (<= 4), smallest node " + std::to_string(min_node) +
             " samples (>= 50) over " + std::to_string(trees) + " trees; " + std::to_string(mismatched) +
             " predictions changed under monotone transforms");
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), 1e-12);
}

std::vector<double> central(std::vector<double*> params, const std::function<double()>& f) {
  std::vector<double> g;
  for (double* p : params) {
    const double v = *p;
    *p = v + 1e-5;
    const double up = f();
    *p = v - 1e-5;
    const double down = f();
    *p = v;
    g.push_back((up - down) / 2e-5);
  }
  return g;
}

void criterion_7() {
  Rng rng(derive_seed(1, "acceptance/7"));
  double worst_lr = 0, worst_mlp = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + rng.below(4);
    const auto data = random_dataset(rng, 5 + rng.below(20), d);
    auto p = LinearParams::zeros(d);
    for (auto& w : p.w) w = rng.normal();
    for (auto& b : p.b) b = rng.normal();
    const auto obj = logistic_objective(p, data, 1e-3);
    std::vector<double*> ptrs;
    std::vector<double> an;
    for (std::size_t k = 0; k < p.w.size(); ++k) ptrs.push_back(&p.w[k]), an.push_back(obj.grad.w[k]);
    for (std::size_t c = 0; c < 3; ++c) ptrs.push_back(&p.b[c]), an.push_back(obj.grad.b[c]);
    worst_lr = std::max(worst_lr, rel_error(an, central(ptrs, [&] { return logistic_objective(p, data, 1e-3).loss; })));

    const std::size_t h = 2 + rng.below(6);
    auto q = init_mlp(d, h, rng);
    for (auto& b : q.b1) b = rng.normal(0, 0.1);
    std::vector<std::size_t> rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto mo = mlp_objective(q, data, rows);
    ptrs.clear();
    an.clear();
    auto add = [&](std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t k = 0; k < v.size(); ++k) ptrs.push_back(&v[k]), an.push_back(g[k]);
    };
    add(q.w1, mo.grad.w1);
    add(q.b1, mo.grad.b1);
    add(q.w2, mo.grad.w2);
    for (std::size_t c = 0; c < 3; ++c) ptrs.push_back(&q.b2[c]), an.push_back(mo.grad.b2[c]);
    worst_mlp = std::max(worst_mlp, rel_error(an, central(ptrs, [&] { return mlp_objective(q, data, rows).loss; })));
  }
  report(7, "gradient checks", worst_lr <= kGradTol && worst_mlp <= kGradTol,
         fmt("20 instances, max relative error logistic %.2e, mlp %.2e (tol 1e-4)", worst_lr, worst_mlp));
}

void criterion_8() {
  Rng rng(derive_seed(1, "acceptance/8"));
  AlignedTrace t{"t", "a", "b", 0, {}};
  for (int i = 0; i < 300; ++i) t.slots.push_back({rng.uniform() < 0.7, double(rng.below(100))});
  const auto n = build_samples(t, {}, FeatureSet::combo3).size();
  int leaks = 0;
  for (auto set : kAllFeatureSets)
    for (int rep = 0; rep < 50; ++rep) {
      const int anchor = 9 + static_cast<int>(rng.below(281));
      const auto before = window_features(t, anchor, {}, set);
      auto p = t;
      for (int i = 0; i < 300; ++i)
        if (i < anchor - 9 || i > anchor) p.slots[static_cast<std::size_t>(i)] = {rng.uniform() < 0.5, double(rng.below(128))};
      leaks += window_features(p, anchor, {}, set) != before;
    }
  report(8, "windowing", n == 281 && leaks == 0,
         std::to_string(n) + " samples from a 300-slot trace (expected 281); " + std::to_string(leaks) +
             " of 300 perturbations outside the history window changed a feature");
}

// ---------------------------------------------------------------------------

struct Cell {
  double acc, int_prec, int_f1, f1, time;
};

Cell cell(const EvaluationReport& r) {
  const auto& m = r.pooled;
  const auto k = index_of(LinkClass::intermediate);
  return {100 * m.aggregate.accuracy, 100 * m.per_class.precision[k], 100 * m.per_class.f1[k],
          100 * m.aggregate.weighted_f1, m.training_time_seconds};
}

std::map<std::string, Cell> run_cells(PipelineConfig cfg, const Corpus& corpus,
                                      const std::vector<GridEntry>& grid) {
  cfg.grid = grid;
  cfg.save_models = false;
  cfg.workers = 1;  // sequential so training times are comparable
  std::map<std::string, Cell> out;
  for (auto& r : run_grid(cfg, corpus, grid)) out[r.entry.name] = cell(r.report);
  return out;
}

GridEntry entry(ModelKind k, FeatureSet fs, Resample r) {
  return {default_entry_name(k, fs, r), fs, r, ModelSpec::defaults(k)};
}

void rutgers_criteria(const PipelineConfig& base) {
  const auto corpus = load_corpus(base, &std::cerr);
  const auto stats = corpus_stats(corpus.traces);
  auto cfg = base;
  cfg.resample_scope = ResampleScope::all;
  using K = ModelKind;
  using F = FeatureSet;
  using R = Resample;
  const std::vector<GridEntry> grid = {
      entry(K::logistic, F::combo3, R::ros), entry(K::dtree, F::combo3, R::ros),
      entry(K::logistic, F::rssi, R::ros),   entry(K::dtree, F::rssi, R::ros),
      entry(K::logistic, F::combo3, R::none), entry(K::dtree, F::combo3, R::none),
      entry(K::linear_svm, F::combo3, R::ros), entry(K::mlp, F::combo3, R::ros)};
  auto c = run_cells(cfg, corpus, grid);
  const auto& lr = c["logistic-combo3-ros"];
  const auto& dt = c["dtree-combo3-ros"];
  const auto& lr_rssi = c["logistic-rssi-ros"];
  const auto& dt_rssi = c["dtree-rssi-ros"];
  const auto& lr_none = c["logistic-combo3-none"];
  const auto& dt_none = c["dtree-combo3-none"];
  const auto& svm = c["linear_svm-combo3-ros"];
  const auto& mlp = c["mlp-combo3-ros"];

  report(9, "combined features with ROS",
         std::abs(lr.acc - 92.2) <= kTableIIAccTolPp && std::abs(dt.acc - 93.2) <= kTableIIAccTolPp &&
             lr.int_f1 >= kTableIIIntF1MinPct && dt.int_f1 >= kTableIIIntF1MinPct,
         fmt("accuracy logistic %.1f (92.2 +/- 3), dtree %.1f (93.2 +/- 3); intermediate F1 %.1f, %.1f (>= 85)",
             lr.acc, dt.acc, lr.int_f1, dt.int_f1));
  const double gain_lr = lr_rssi.int_f1 > 0 ? lr.int_f1 / lr_rssi.int_f1 - 1 : INFINITY;
  const double gain_dt = dt_rssi.int_f1 > 0 ? dt.int_f1 / dt_rssi.int_f1 - 1 : INFINITY;
  report(10, "feature-selection fairness gain", gain_lr > kFeatureGainMinRel && gain_dt > kFeatureGainMinRel,
         fmt("intermediate F1 rssi -> combo3: logistic +%.0f%%, dtree +%.0f%% relative (> 40%%)", 100 * gain_lr,
             100 * gain_dt));
  report(11, "resampling",
         std::abs(lr_none.acc - 96.8) <= kTableIIIAccTolPp && std::abs(dt_none.acc - 97.0) <= kTableIIIAccTolPp &&
             lr_none.int_prec <= kNoResampleIntPrecMaxPct && dt_none.int_prec <= kNoResampleIntPrecMaxPct &&
             lr.int_prec >= kRosIntPrecMinPct && dt.int_prec >= kRosIntPrecMinPct,
         fmt("no resampling: accuracy %.1f/%.1f (96.8/97.0 +/- 2), intermediate precision %.1f/%.1f (<= 75)",
             lr_none.acc, dt_none.acc, lr_none.int_prec, dt_none.int_prec) +
             fmt("; ROS intermediate precision %.1f/%.1f (>= 85)", lr.int_prec, dt.int_prec));
  report(12, "model ordering",
         dt.time < lr.time && lr.time < svm.time && lr.time < mlp.time && std::abs(dt.f1 - mlp.f1) <= kDtreeMlpF1TolPp,
         fmt("training s: dtree %.2f < logistic %.2f < svm %.2f, mlp %.2f", dt.time, lr.time, svm.time, mlp.time) +
             fmt("; F1 dtree %.1f vs mlp %.1f (within 1)", dt.f1, mlp.f1));

  {
    const double ratio = 100.0 * stats.reception_ratio;
    const bool pass = stats.n_traces == published::kRutgersTraces &&
                      stats.n_empty_traces == published::kRutgersEmptyTraces &&
                      std::abs(ratio - published::kRutgersReceptionRatioPct) <= kReceptionTolPp;
    report(13, "corpus statistics", pass,
           std::to_string(stats.n_traces) + " traces (4060), " + std::to_string(stats.n_empty_traces) +
               " empty (960), reception " + fmt("%.4f%% (63.51 +/- 0.01)", ratio));
  }


  // Same grid with resampling applied to training folds only (diagnostic).
  cfg.resample_scope = ResampleScope::train;
  auto t = run_cells(cfg, corpus, {entry(K::dtree, F::combo3, R::ros), entry(K::logistic, F::combo3, R::ros)});
  std::cout << "       info: train-fold-only ROS intermediate precision logistic "
            << fmt("%.1f, dtree %.1f", t["logistic-combo3-ros"].int_prec, t["dtree-combo3-ros"].int_prec)
            << std::endl;
}

void criterion_14() {
  PipelineConfig cfg;
  cfg.seed = 20240601;
  cfg.input.synthetic.n_traces = 600;
  cfg.input.synthetic.mixture = {0.34, 0.05, 0.61};  // (bad, intermediate, good)
  cfg.resample_scope = ResampleScope::all;
  const auto corpus = load_corpus(cfg);
  using K = ModelKind;
  using F = FeatureSet;
  using R = Resample;
  auto c = run_cells(cfg, corpus,
                     {entry(K::dtree, F::combo3, R::ros), entry(K::dtree, F::rssi, R::ros),
                      entry(K::dtree, F::combo3, R::none)});
  const auto& combo = c["dtree-combo3-ros"];
  const auto& rssi = c["dtree-rssi-ros"];
  const auto& none = c["dtree-combo3-none"];
  const double f1_gain = combo.int_f1 - rssi.int_f1;
  const double prec_gain = combo.int_prec - none.int_prec;
  report(14, "synthetic fallback directions", f1_gain >= kSyntheticGainMinPp && prec_gain >= kSyntheticGainMinPp,
         fmt("dtree intermediate F1 combo3 %.1f vs rssi %.1f (%+.1f pp, >= 5)", combo.int_f1, rssi.int_f1, f1_gain) +
             fmt("; ROS intermediate precision %.1f vs none %.1f (%+.1f pp, >= 5)", combo.int_prec, none.int_prec,
                 prec_gain) +
             " [resampling before the split]");

  cfg.resample_scope = ResampleScope::train;
  auto t = run_cells(cfg, corpus, {entry(K::dtree, F::combo3, R::ros), entry(K::dtree, F::rssi, R::ros)});
  std::cout << "       info: train-fold-only ROS: intermediate F1 combo3 "
            << fmt("%.1f vs rssi %.1f, intermediate precision %.1f vs none %.1f", t["dtree-combo3-ros"].int_f1,
                   t["dtree-rssi-ros"].int_f1, t["dtree-combo3-ros"].int_prec, none.int_prec)
            << std::endl;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> property = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8};
  for (std::size_t i = 0; i < property.size(); ++i) {
    try {
      property[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "property", false, std::string("exception: ") + e.what());
    }
  }

  PipelineConfig rutgers;
  const char* dir = std::getenv("LINKQ_RUTGERS_DIR");
  const char* csv = std::getenv("LINKQ_RUTGERS_CSV");
  if (dir && *dir) {
    rutgers.input.kind = InputKind::raw;
    rutgers.input.path = dir;
  } else if (csv && *csv) {
    rutgers.input.kind = InputKind::csv;
    rutgers.input.path = csv;
  }
  if (rutgers.input.kind == InputKind::synthetic) {
    const std::string why = "trace-set absent (set LINKQ_RUTGERS_DIR or LINKQ_RUTGERS_CSV); covered by 14";
    skip(9, "combined features with ROS", why);
    skip(10, "feature-selection fairness gain", why);
    skip(11, "resampling", why);
    skip(12, "model ordering", why);
    skip(13, "corpus statistics", why);
  } else {
    try {
      rutgers_criteria(rutgers);
    } catch (const std::exception& e) {
      report(9, "trace-set criteria 9-13", false, std::string("exception: ") + e.what());
    }
  }

  try {
    criterion_14();
  } catch (const std::exception& e) {
    report(14, "synthetic fallback directions", false, std::string("exception: ") + e.what());
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "acceptance: all runnable criteria passed" : "acceptance: FAILED")
            << fmt(" (%.1f s)", secs) << std::endl;
  return failures == 0 ? 0 : 1;
}
