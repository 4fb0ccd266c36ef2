// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N]... [--work DIR]

#include "blockprop/error.hpp"
#include "blockprop/events.hpp"
#include "blockprop/explainer.hpp"
#include "blockprop/graph.hpp"
#include "blockprop/io.hpp"
#include "blockprop/labeling.hpp"
#include "blockprop/learner.hpp"
#include "blockprop/metrics.hpp"
#include "blockprop/pipeline.hpp"
#include "blockprop/rng.hpp"
#include "blockprop/synth.hpp"
#include "blockprop/text_metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace blockprop;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using Edges = std::vector<InteractionGraph::Edge>;

InteractionGraph graph_of(std::size_t n, const Edges& edges) {
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(fixture::user(static_cast<int>(i)));
  return {GraphKind::Follows, nodes, edges};
}

Edges random_edges(std::size_t n, double density, std::mt19937_64& rng) {
  Edges e;
  std::bernoulli_distribution keep(density);
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = 0; v < n; ++v)
      if (keep(rng)) e.emplace_back(u, v);
  return e;
}

// ---------------------------------------------------------------------------
// Shared study on the 5,000-user corpus

struct Study {
  RunConfig config;
  GroundTruth truth;
  LabeledTable table;
  double build_seconds = 0;

  [[nodiscard]] LabeledDataset dataset(TargetDefinition d, double q) const {
    return dataset_for(table, d, q, config.excluded());
  }
};

Study& study(const std::string& work) {
  static std::unique_ptr<Study> s;
  if (s) return *s;
  const auto t0 = std::chrono::steady_clock::now();
  s = std::make_unique<Study>();
  s->config.set("out", (fs::path(work) / "corpus").string());
  s->config.set("quantiles", "0.5,0.9,0.99");
  for (const char* cmd : {"synth", "ingest", "features", "label"}) run_command(cmd, s->config);
  s->truth = generate(s->config.scenario()).truth;
  s->table = load_labeled(s->config);
  s->build_seconds = seconds_since(t0);
  return *s;
}

CvResult cv(const Study& s, const LabeledDataset& ds, std::span<const std::size_t> columns) {
  return cross_validate(ds, columns, s.config.boosting(), s.config.cv());
}

CvResult cv(const Study& s, const LabeledDataset& ds) { return cross_validate(ds, s.config.boosting(), s.config.cv()); }

// Reduced protocol for the sweep and ablation criteria.
BoostingParams reduced_params(const Study& s) {
  auto p = s.config.boosting();
  p.n_estimators = 100;
  return p;
}

CvOptions reduced_cv(const Study& s) {
  auto o = s.config.cv();
  o.runs = 3;
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_1(const std::string&) {
  Outcome out;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> level(0, 40);
  std::bernoulli_distribution pos(0.35);
  std::vector<double> s(1000);
  std::vector<int> y(1000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = level(rng) / 8.0;
    y[i] = pos(rng) ? 1 : 0;
  }
  const Eigen::Map<const Eigen::VectorXd> sv(s.data(), static_cast<Eigen::Index>(s.size()));
  Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) yv(static_cast<Eigen::Index>(i)) = y[i];

  const auto t0 = std::chrono::steady_clock::now();
  const double auc = roc_auc(sv, yv);
  const double elapsed = seconds_since(t0);
  const double ref = oracle::pairwise_auc(s, y);
  std::set<double> distinct(s.begin(), s.end());
  out.require(std::abs(auc - ref) <= 1e-9, "auc " + fmt(auc, 6) + " vs oracle " + fmt(ref, 6) + ", |d| " +
                                               sci(std::abs(auc - ref)));
  out.require(distinct.size() < s.size(), std::to_string(s.size() - distinct.size()) + " tied scores");
  out.require(elapsed < 1.0, "time " + sci(elapsed) + " s");
  return out;
}

Outcome criterion_2(const std::string&) {
  Outcome out;
  std::mt19937_64 rng(202);
  double worst = 0, worst_sum = 0;
  for (int g = 0; g < 10; ++g) {
    const auto n = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 50)(rng));
    const double density = std::uniform_real_distribution<double>(0.01, 0.3)(rng);
    const auto edges = random_edges(n, density, rng);
    const auto pr = pagerank(graph_of(n, edges));
    const auto ref = oracle::dense_pagerank(n, edges, 0.85);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(pr[i] - ref[i]));
      sum += pr[i];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  out.require(worst <= 1e-8, "max |pr - oracle| " + sci(worst));
  out.require(worst_sum <= 1e-9, "max |sum - 1| " + sci(worst_sum));
  return out;
}

Outcome criterion_3(const std::string&) {
  Outcome out;
  std::mt19937_64 rng(303);
  int matched = 0;
  std::uint32_t max_core = 0;
  for (int g = 0; g < 10; ++g) {
    const auto n = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 200)(rng));
    const double density = std::uniform_real_distribution<double>(0.005, 0.08)(rng);
    const auto edges = random_edges(n, density, rng);
    const auto core = coreness(graph_of(n, edges));
    const auto ref = oracle::peel_coreness(n, edges);
    if (core == ref) ++matched;
    for (auto c : ref) max_core = std::max(max_core, c);
  }
  out.require(matched == 10, std::to_string(matched) + "/10 graphs exact (max core " + std::to_string(max_core) + ")");
  return out;
}

Outcome criterion_4(const std::string& work) {
  Outcome out;
  // Brute-force equivalence on small trained ensembles.
  std::mt19937_64 rng(404);
  double brute_worst = 0;
  int models = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = std::uniform_int_distribution<int>(1, 4)(rng);
    const int n = 60;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    std::normal_distribution<double> z;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) X(i, j) = std::round(z(rng) * 4) / 4;
      y(i) = X(i, 0) + (p > 1 ? X(i, 1) * X(i, p - 1) : 0) + 0.3 * z(rng);
    }
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    TreeEnsemble m;
    const int depth = std::uniform_int_distribution<int>(1, 3)(rng);
    if (trial % 2 == 0) {
      BoostingParams bp;
      bp.n_estimators = 5;
      bp.max_depth = depth;
      const Eigen::VectorXd labels = (y.array() > 0).cast<double>();
      m = train_classifier(X, labels, bp, static_cast<std::uint64_t>(trial), names);
    } else {
      ForestParams fp;
      fp.n_estimators = 4;
      fp.max_depth = depth;
      fp.min_samples_leaf = 3;
      fp.mtry = p;
      m = train_regressor(X, y, fp, static_cast<std::uint64_t>(trial), names);
    }
    ++models;
    const Eigen::MatrixXd bg = X.topRows(40);
    const auto attr = tree_shap(m, X, &bg);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd ref = oracle::brute_shap(m, X.row(i), bg);
      brute_worst = std::max(brute_worst, (attr.phi.row(i).transpose() - ref).cwiseAbs().maxCoeff());
    }
  }
  out.require(brute_worst <= 1e-8, "brute force max |d| " + sci(brute_worst) + " over " + std::to_string(models) +
                                       " small ensembles");

  // Local accuracy on the acceptance models of the 5,000-user study.
  auto& s = study(work);
  double local_worst = 0;
  std::size_t samples = 0;
  const auto seed = s.config.cv().seed;
  for (auto d : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
    const auto ds = s.dataset(d, 0.9);
    const auto train = undersample_balance(ds, seed);
    const auto model = train_classifier(train, s.config.boosting(), seed);
    const Eigen::MatrixXd X = ds.matrix.values(Eigen::all, ds.feature_columns);
    const Eigen::MatrixXd bg = train.matrix.values(Eigen::all, train.feature_columns);
    const auto attr = tree_shap(model, X, &bg);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      local_worst = std::max(local_worst, std::abs(attr.phi.row(i).sum() + attr.base_value - model.margin(X.row(i))));
    samples += static_cast<std::size_t>(X.rows());
  }
  {
    const auto ds = regression_dataset(s.table.matrix, s.table.targets, TargetDefinition::Normalized, s.config.excluded());
    auto fp = s.config.forest();
    fp.n_estimators = 50;
    const auto [train_rows, test_rows] = train_test_split(ds.rows(), 0.8, seed);
    const auto train = ds.subset(train_rows);
    const auto model = train_regressor(train, fp, seed);
    const Eigen::MatrixXd X = ds.subset(test_rows).matrix.values(Eigen::all, ds.feature_columns);
    const auto attr = tree_shap(model, X);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      local_worst = std::max(local_worst, std::abs(attr.phi.row(i).sum() + attr.base_value - model.margin(X.row(i))));
    samples += static_cast<std::size_t>(X.rows());
  }
  out.require(local_worst <= 1e-6, "local accuracy max |d| " + sci(local_worst) + " over " + std::to_string(samples) +
                                       " samples of 3 models");
  return out;
}

Outcome criterion_5(const std::string&) {
  Outcome out;
  std::mt19937_64 rng(505);
  int violations = 0, uniform_seen = 0, trials = 0;
  for (int trial = 0; trial < 5000; ++trial, ++trials) {
    // Raw categorical sample, counted by category.
    const int k = std::uniform_int_distribution<int>(1, 10)(rng);
    std::vector<int> sample;
    if (trial % 4 == 0) {
      const int per = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int c = 0; c < k; ++c)
        for (int r = 0; r < per; ++r) sample.push_back(c);
      std::shuffle(sample.begin(), sample.end(), rng);
    } else {
      const int n = std::uniform_int_distribution<int>(0, 40)(rng);
      for (int i = 0; i < n; ++i) sample.push_back(std::uniform_int_distribution<int>(0, k - 1)(rng));
    }
    std::map<int, int> counts;
    for (int c : sample) ++counts[c];
    const double h = normalized_entropy(counts);
    bool uniform = counts.size() >= 2;
    for (auto [c, v] : counts) uniform = uniform && v == counts.begin()->second;
    if (uniform) ++uniform_seen;
    bool ok = h >= 0.0 && h <= 1.0;
    if (counts.size() <= 1) ok = ok && h == 0.0;
    else if (uniform) ok = ok && std::abs(h - 1.0) <= 1e-12;
    else ok = ok && h < 1.0 - 1e-12;
    if (!ok) ++violations;
  }
  const bool empty_zero = normalized_entropy(std::map<int, int>{}) == 0.0;
  const bool single_zero = normalized_entropy(std::map<std::string, int>{{"en", 9}}) == 0.0;
  out.require(violations == 0, std::to_string(trials) + " samples, " + std::to_string(uniform_seen) + " uniform, " +
                                   std::to_string(violations) + " violations");
  out.require(empty_zero && single_zero, "empty and single-category samples give 0");
  return out;
}

Outcome criterion_6(const std::string& work) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  auto& s = study(work);
  std::map<TargetDefinition, LabeledDataset> data;
  for (auto d : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
    data[d] = s.dataset(d, 0.9);
    const auto r = cv(s, data[d]);
    out.require(r.mean_auc >= 0.9, std::string(to_string(d)) + " auc " + fmt(r.mean_auc) + " (sd " + fmt(r.std_auc) + ")");
  }
  const double pipeline_seconds = seconds_since(t0);
  for (auto d : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
    auto permuted = data[d];
    std::vector<double> y(permuted.labels.data(), permuted.labels.data() + permuted.labels.size());
    std::shuffle(y.begin(), y.end(), std::mt19937_64(derive_seed(s.config.seed(), {0x7065, 1})));
    permuted.labels = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    const auto r = cv(s, permuted);
    out.require(r.mean_auc >= 0.45 && r.mean_auc <= 0.55, std::string(to_string(d)) + " permuted auc " + fmt(r.mean_auc));
  }
  out.require(pipeline_seconds < 600, "pipeline " + fmt(pipeline_seconds, 1) + " s (corpus " +
                                          fmt(s.build_seconds, 1) + " s, " + std::to_string(s.table.matrix.rows()) +
                                          " users, " + std::to_string(s.config.cv().runs) + "x" +
                                          std::to_string(s.config.cv().folds) + " CV, " +
                                          std::to_string(s.config.boosting().n_estimators) + " trees)");
  return out;
}

Outcome criterion_7(const std::string& work) {
  Outcome out;
  auto& s = study(work);
  const auto params = reduced_params(s);
  const auto options = reduced_cv(s);
  for (auto d : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
    const double lo = cross_validate(s.dataset(d, 0.5), params, options).mean_auc;
    const double hi = cross_validate(s.dataset(d, 0.99), params, options).mean_auc;
    out.require(hi - lo >= 0.05, std::string(to_string(d)) + " auc(0.99) " + fmt(hi) + " - auc(0.5) " + fmt(lo) +
                                     " = " + fmt(100 * (hi - lo), 1) + " p.p.");
  }
  return out;
}

Outcome criterion_8(const std::string& work) {
  Outcome out;
  auto& s = study(work);
  std::vector<LabeledDataset> data = {s.dataset(TargetDefinition::Raw, 0.9),
                                      s.dataset(TargetDefinition::Normalized, 0.9)};
  const auto report = ablate_groups(data, AblationMode::OnlyGroup, reduced_params(s), reduced_cv(s));
  for (const auto& base : report.rows) {
    if (base.experiment != "all") continue;
    for (const auto& row : report.rows) {
      if (row.experiment != "only" || row.definition != base.definition) continue;
      std::string group = row.subset;
      std::transform(group.begin(), group.end(), group.begin(), [](unsigned char ch) { return std::tolower(ch); });
      const auto it = s.truth.signal.find(group);
      const std::string role = it == s.truth.signal.end() ? "unknown" : it->second;
      const std::string label = row.definition + " " + row.subset + " (" + role + ") " + fmt(row.mean_auc);
      if (role == "planted")
        out.require(std::abs(row.mean_auc - base.mean_auc) <= 0.03, label + " vs all " + fmt(base.mean_auc));
      else if (role == "noise")
        out.require(row.mean_auc >= 0.45 && row.mean_auc <= 0.6, label);
      else
        out.detail += "; " + label;
    }
  }
  return out;
}

Outcome criterion_9(const std::string& work) {
  Outcome out;
  auto& s = study(work);
  const auto params = reduced_params(s);
  const auto options = reduced_cv(s);
  const auto seed = options.seed;
  for (auto d : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
    const auto ds = s.dataset(d, 0.9);
    const auto train = undersample_balance(ds, seed);
    const auto model = train_classifier(train, params, seed);
    const Eigen::MatrixXd bg = train.matrix.values(Eigen::all, train.feature_columns);
    const auto attr = tree_shap(model, bg, &bg);
    const auto ranking = aggregate_importance(attr, s.table.matrix.manifest).ranking();

    std::set<std::string> top4(ranking.begin(), ranking.begin() + 4);
    std::size_t planted_hits = 0;
    for (const auto& f : s.truth.planted_features) planted_hits += top4.count(f);

    const std::vector<std::size_t> grid = {4, 8};
    const auto report = ablate_best_worst(ds, ranking, grid, params, options);
    const double all = cross_validate(ds, params, options).mean_auc;
    const auto* top = report.find("top", "4", 0.9);
    const auto* bottom = report.find("bottom", "8", 0.9);
    const std::string name(to_string(d));
    out.require(top && top->mean_auc >= 0.95 * all,
                name + " top-4 " + fmt(top ? top->mean_auc : 0) + " vs all " + fmt(all) + " (" +
                    std::to_string(planted_hits) + "/4 planted in top-4)");
    out.require(bottom && bottom->mean_auc <= 0.65, name + " bottom-8 " + fmt(bottom ? bottom->mean_auc : 1));
  }
  return out;
}

Outcome criterion_10(const std::string& work) {
  Outcome out;
  // MAE on a five-point fixture: |1-1.5| + |2-2| + |3-2| + |4-5| + |5-4.5| = 3, /5.
  Eigen::VectorXd y(5), p(5);
  y << 1, 2, 3, 4, 5;
  p << 1.5, 2, 2, 5, 4.5;
  const double mae = mean_absolute_error(y, p);
  out.require(mae == 0.6, "fixture mae " + fmt(mae, 17) + " == 3/5");
  const auto eval = evaluate_predictions(y, p, 1);
  out.require(eval.mae == 0.6, "evaluate_predictions mae " + fmt(eval.mae, 17));

  RunConfig c;
  c.set("out", (fs::path(work) / "regression").string());
  c.set("synth_users", "15000");
  c.set("synth_extreme_fraction", "0");
  c.set("synth_activity_exponent", "3");
  c.set("synth_activity_cap", "5");
  c.set("synth_activity_coupling", "0.6");
  c.set("synth_target_r2", "0.7");
  c.set("quantiles", "0.9");
  for (const char* cmd : {"synth", "ingest", "features", "label"}) run_command(cmd, c);
  const auto truth = generate(c.scenario()).truth;
  const auto table = load_labeled(c);
  const auto ds = regression_dataset(table.matrix, table.targets, TargetDefinition::Normalized, c.excluded());
  const auto report = evaluate_regression(ds, c.forest(), derive_seed(c.seed(), {0x7267}), 0.8, 20);
  out.require(std::abs(truth.bayes_r2_norm - 0.7) <= 1e-6, "bayes r2 " + fmt(truth.bayes_r2_norm));
  out.require(report.r2 >= 0.5, "forest r2 " + fmt(report.r2) + " on " + std::to_string(report.n_test) +
                                    " held-out users (" + std::to_string(c.forest().n_estimators) + " trees)");
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) h = (h ^ ch) * 1099511628211ull;
  return h;
}

std::map<std::string, std::uint64_t> checksums(const fs::path& dir) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = fnv1a(read_file(e.path().string()));
  return out;
}

Outcome criterion_11(const std::string& work, const std::string& cli) {
  Outcome out;
  const fs::path root = fs::path(work) / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto config = root / "study.conf";
  write_file_atomic(config.string(),
                    "synth_users = 600\nquantiles = 0.5, 0.9\nn_estimators = 40\ncv_runs = 2\ncv_folds = 5\n"
                    "rf_trees = 40\nbest_worst_n = 1, 4, 8\nbeeswarm_quantiles = 0.9\nablation_quantiles = 0.9\n");
  const std::vector<std::string> chain = {"synth", "ingest", "features", "label", "train",
                                          "explain", "ablate", "regress", "report"};
  int failures = 0;
  for (const char* run : {"a", "b"})
    for (const auto& cmd : chain) {
      const std::string line = cli + " --config " + config.string() + " --set out=" + (root / run).string() + " " +
                               cmd + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) ++failures;
    }
  out.require(failures == 0, std::to_string(2 * chain.size()) + " command runs, " + std::to_string(failures) + " failed");
  const auto a = checksums(root / "a");
  const auto b = checksums(root / "b");
  std::uint64_t digest = 1469598103934665603ull;
  for (const auto& [name, h] : a) digest = (digest ^ h) * 1099511628211ull;
  out.require(!a.empty() && a == b, std::to_string(a.size()) + " files, digest " + [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return std::string(buf);
  }() + (a == b ? " on both runs" : " differs"));
  return out;
}

Outcome criterion_12(const std::string&) {
  Outcome out;
  std::mt19937_64 rng(1212);
  const auto events = fixture::random_events(9900, 200, 12);
  std::vector<std::string> lines;
  for (const auto& e : events) lines.push_back(to_ndjson_line(e));
  // 100 malformed lines of assorted shapes at random positions.
  const std::vector<std::string> broken = {
      R"({"id":"x1","kind":"post","action":"create")",
      R"(not json at all)",
      R"([1,2,3])",
      R"({"id":"x2","kind":"post","action":"create","actor":"did:plc:z","ts":"yesterday"})",
      R"({"id":"x3","kind":"teleport","action":"create","actor":"did:plc:z","ts":"2024-03-02T00:00:00Z"})",
      R"({"id":"x4","kind":"like","action":"explode","actor":"did:plc:z","ts":"2024-03-02T00:00:00Z","subject":"did:plc:y"})",
      R"({"kind":"like","action":"create","ts":"2024-03-02T00:00:00Z"})",
      R"("just a string")",
      R"({"id":"x5","kind":"post","action":"create","actor":"did:plc:z","ts":"2024-03-02T00:00:00Z",})",
      R"(null)"};
  for (int i = 0; i < 100; ++i) {
    const auto pos = std::uniform_int_distribution<std::size_t>(0, lines.size())(rng);
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(pos), broken[static_cast<std::size_t>(i) % broken.size()]);
  }
  auto parse = [](const std::vector<std::string>& ls) {
    std::string text;
    for (const auto& l : ls) text += l + "\n";
    std::istringstream in(text);
    return parse_replay(in);
  };
  const auto base = parse(lines);
  out.require(base.stats.lines == 10000, std::to_string(base.stats.lines) + " lines");
  out.require(base.stats.malformed == 100, std::to_string(base.stats.malformed) + " skipped");
  out.require(base.log.size() == 9900, std::to_string(base.log.size()) + " events");
  int identical = 0;
  for (int trial = 0; trial < 3; ++trial) {
    auto shuffled = lines;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto r = parse(shuffled);
    if (r.stats.malformed == 100 &&
        std::equal(base.log.events().begin(), base.log.events().end(), r.log.events().begin(), r.log.events().end()))
      ++identical;
  }
  out.require(identical == 3, std::to_string(identical) + "/3 shuffles give an identical log");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blockprop acceptance suite"};
  std::vector<int> selected;
  std::string work = (fs::temp_directory_path() / "blockprop_acceptance").string();
  std::string cli = BLOCKPROP_CLI;
  app.add_option("--criterion,-c", selected, "criteria to run (default: all)")->check(CLI::Range(1, 12));
  app.add_option("--work", work, "scratch directory");
  app.add_option("--cli", cli, "blockprop executable used by criterion 11");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int i = 1; i <= 12; ++i) selected.push_back(i);
  fs::create_directories(work);

  const std::map<int, std::function<Outcome()>> criteria = {
      {1, [&] { return criterion_1(work); }},   {2, [&] { return criterion_2(work); }},
      {3, [&] { return criterion_3(work); }},   {4, [&] { return criterion_4(work); }},
      {5, [&] { return criterion_5(work); }},   {6, [&] { return criterion_6(work); }},
      {7, [&] { return criterion_7(work); }},   {8, [&] { return criterion_8(work); }},
      {9, [&] { return criterion_9(work); }},   {10, [&] { return criterion_10(work); }},
      {11, [&] { return criterion_11(work, cli); }}, {12, [&] { return criterion_12(work); }}};

  int failed = 0;
  for (int id : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria.at(id)();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    if (!r.pass) ++failed;
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << "  ("
              << fmt(seconds_since(t0), 1) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
