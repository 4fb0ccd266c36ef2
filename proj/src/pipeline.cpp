#include "blockprop/pipeline.hpp"

#include "blockprop/error.hpp"
#include "blockprop/events.hpp"
#include "blockprop/io.hpp"
#include "blockprop/metrics.hpp"
#include "blockprop/model_io.hpp"
#include "blockprop/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace blockprop {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"out", "out"},
      {"replay", ""},
      {"mbfc", ""},
      {"quality", ""},
      {"public_suffixes", ""},
      {"manifest", ""},
      {"window_start", ""},
      {"window_end", ""},
      {"min_posts", "10"},
      {"majority_lang", "en"},
      {"quantiles", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95,0.99,0.995,0.9995"},
      {"definitions", "raw,norm"},
      {"exclude", "times_blocked"},
      {"seed", "42"},
      {"tox_mode", "sidecar"},
      {"jobs", "1"},
      {"n_estimators", "500"},
      {"max_depth", "6"},
      {"learning_rate", "0.1"},
      {"subsample", "1"},
      {"min_child_weight", "1"},
      {"lambda", "1"},
      {"gamma", "0"},
      {"cv_runs", "10"},
      {"cv_folds", "10"},
      {"undersample", "true"},
      {"rf_trees", "500"},
      {"rf_max_depth", "12"},
      {"rf_min_samples_leaf", "5"},
      {"rf_mtry", "0"},
      {"train_ratio", "0.8"},
      {"regression_bins", "20"},
      {"pagerank_damping", "0.85"},
      {"top_n", "10"},
      {"bump_top_k", "8"},
      {"beeswarm_quantiles", "0.1,0.99"},
      {"ablation_quantiles", ""},
      {"best_worst_quantile", "0.9"},
      {"best_worst_n", "1,2,4,8,16,32"},
      {"synth_users", "5000"},
      {"synth_background_ratio", "0.5"},
      {"synth_foreign_ratio", "0.05"},
      {"synth_start", "2024-03-01T00:00:00Z"},
      {"synth_days", "30"},
      {"synth_activity_exponent", "1.5"},
      {"synth_activity_cap", "200"},
      {"synth_activity_coupling", "1"},
      {"synth_toxicity_coupling", "0"},
      {"synth_extreme_fraction", "0.02"},
      {"synth_extreme_boost", "2.5"},
      {"synth_block_base", "8"},
      {"synth_dispersion", "5"},
      {"synth_target_r2", ""},
  };
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// Stable key for a quantile in seeds.
std::uint64_t qkey(double q) { return static_cast<std::uint64_t>(std::llround(q * 1e6)); }

struct Layout {
  std::string root;
  [[nodiscard]] std::string dir(const std::string& stage) const { return root + "/" + stage; }
  [[nodiscard]] std::string file(const std::string& stage, const std::string& name) const {
    return dir(stage) + "/" + name;
  }
};

void require(const std::string& path, const std::string& command) {
  if (!fs::exists(path))
    throw DependencyError("missing '" + path + "'; run `" + command + "` first");
}

class Emitter {
 public:
  Emitter(const RunConfig& config, std::string command)
      : command_(std::move(command)),
        hash_(config.hash()),
        seed_(config.seed()),
        manifest_version_(config.manifest().version()) {}

  void write(const std::string& path, std::string_view content, ojson extra = ojson::object()) const {
    write_file_atomic(path, content);
    ojson meta;
    meta["artifact"] = fs::path(path).filename().string();
    meta["command"] = command_;
    meta["config_hash"] = hash_;
    meta["seed"] = seed_;
    meta["manifest_version"] = manifest_version_;
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    write_file_atomic(path + ".meta.json", meta.dump(1) + "\n");
  }

 private:
  std::string command_;
  std::string hash_;
  std::uint64_t seed_;
  std::string manifest_version_;
};

std::vector<std::string> replay_paths(const RunConfig& c, const Layout& l) {
  if (c.is_set("replay")) return c.list("replay");
  const auto synth = l.file("synth", "replay.ndjson");
  if (!fs::exists(synth))
    throw DependencyError("no replay configured and '" + synth + "' is missing; run `synth` first or set replay");
  return {synth};
}

std::string lookup_path(const RunConfig& c, const Layout& l, const std::string& key, const std::string& synth_name) {
  if (c.is_set(key)) return c.get(key);
  const auto p = l.file("synth", synth_name);
  return fs::exists(p) ? p : std::string{};
}

FeatureManifest stage_manifest(const Layout& l) {
  const auto path = l.file("features", "manifest.tsv");
  require(path, "features");
  return read_manifest_file(path);
}

EventLog load_events(const Layout& l) {
  const auto path = l.file("ingest", "events.ndjson");
  require(path, "ingest");
  return parse_replay_file(path).log;
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  if (q >= 1) return *std::max_element(v.begin(), v.end());
  return empirical_quantile(v, q);
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const DataError&) {
    throw ConfigError("config key '" + key + "' needs a number, got '" + get(key) + "'");
  }
}

int RunConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config key '" + key + "' needs an integer");
  return static_cast<int>(v);
}

std::uint64_t RunConfig::seed() const {
  const auto& s = get("seed");
  std::uint64_t v = 0;
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw ConfigError("seed must be a non-negative integer");
  try {
    v = std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("seed out of range");
  }
  return v;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    try {
      out.push_back(parse_double(item));
    } catch (const DataError&) {
      throw ConfigError("config key '" + key + "' has a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> RunConfig::list(const std::string& key) const { return split(get(key), ','); }

bool RunConfig::flag(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' needs true or false");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "jobs" || k == "out") continue;  // neither changes results
    out += k + "=" + v + "\n";
  }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<TargetDefinition> RunConfig::definitions() const {
  std::vector<TargetDefinition> out;
  for (const auto& d : list("definitions")) {
    auto v = parse_target_definition(d);
    if (!v) throw ConfigError("unknown target definition '" + d + "' (expected raw or norm)");
    if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  }
  if (out.empty()) throw ConfigError("no target definitions configured");
  return out;
}

BoostingParams RunConfig::boosting() const {
  BoostingParams p;
  p.n_estimators = integer("n_estimators");
  p.max_depth = integer("max_depth");
  p.learning_rate = number("learning_rate");
  p.subsample = number("subsample");
  p.min_child_weight = number("min_child_weight");
  p.lambda = number("lambda");
  p.gamma = number("gamma");
  return p;
}

ForestParams RunConfig::forest() const {
  ForestParams p;
  p.n_estimators = integer("rf_trees");
  p.max_depth = integer("rf_max_depth");
  p.min_samples_leaf = integer("rf_min_samples_leaf");
  p.mtry = integer("rf_mtry");
  return p;
}

CvOptions RunConfig::cv() const {
  CvOptions o;
  o.runs = integer("cv_runs");
  o.folds = integer("cv_folds");
  o.undersample = flag("undersample");
  o.jobs = integer("jobs");
  o.seed = derive_seed(seed(), {0x6376ULL});
  return o;
}

ScenarioConfig RunConfig::scenario() const {
  ScenarioConfig s;
  const int users = integer("synth_users");
  if (users < 0) throw ConfigError("synth_users must be non-negative");
  s.n_users = static_cast<std::size_t>(users);
  s.background_ratio = number("synth_background_ratio");
  s.foreign_ratio = number("synth_foreign_ratio");
  s.start = get("synth_start");
  s.days = integer("synth_days");
  s.activity_exponent = number("synth_activity_exponent");
  s.activity_cap = number("synth_activity_cap");
  s.activity_coupling = number("synth_activity_coupling");
  s.toxicity_coupling = number("synth_toxicity_coupling");
  s.extreme_fraction = number("synth_extreme_fraction");
  s.extreme_boost = number("synth_extreme_boost");
  s.block_base = number("synth_block_base");
  s.dispersion = number("synth_dispersion");
  if (is_set("synth_target_r2")) s.target_r2 = number("synth_target_r2");
  s.seed = seed();
  return s;
}

TimeWindow RunConfig::window() const {
  TimeWindow w;
  auto bound = [&](const std::string& key, Timestamp& t) {
    if (!is_set(key)) return;
    auto v = parse_rfc3339(get(key));
    if (!v) throw ConfigError("config key '" + key + "' needs an RFC 3339 timestamp");
    t = *v;
  };
  bound("window_start", w.start);
  bound("window_end", w.end);
  if (!(w.start < w.end)) throw ConfigError("window_start must precede window_end");
  return w;
}

UserFilter RunConfig::filter() const {
  UserFilter f;
  const int m = integer("min_posts");
  if (m < 1) throw ConfigError("min_posts must be at least 1");
  f.min_posts = static_cast<std::size_t>(m);
  f.majority_lang = get("majority_lang");
  return f;
}

FeatureManifest RunConfig::manifest() const {
  if (!is_set("manifest")) return default_manifest();
  return read_manifest_file(get("manifest"));
}

std::set<std::string> RunConfig::excluded() const {
  const auto v = list("exclude");
  return {v.begin(), v.end()};
}

void RunConfig::validate() const {
  for (const auto* key : {"mbfc", "quality", "public_suffixes", "manifest"})
    if (is_set(key) && !fs::exists(get(key))) throw ConfigError("config key '" + std::string(key) + "': no such file '" + get(key) + "'");
  for (const auto& p : list("replay"))
    if (!fs::exists(p)) throw ConfigError("replay file '" + p + "' does not exist");
  (void)seed();
  (void)window();
  (void)filter();
  (void)definitions();
  (void)boosting();
  (void)forest();
  (void)cv();
  (void)scenario();
  for (double q : numbers("quantiles"))
    if (!(q > 0 && q < 1)) throw ConfigError("quantiles must lie in (0,1)");
  for (double q : numbers("beeswarm_quantiles"))
    if (!(q > 0 && q < 1)) throw ConfigError("beeswarm quantiles must lie in (0,1)");
  for (double q : numbers("ablation_quantiles"))
    if (!(q > 0 && q < 1)) throw ConfigError("ablation quantiles must lie in (0,1)");
  for (double n : numbers("best_worst_n"))
    if (!(n >= 1) || n != std::floor(n)) throw ConfigError("best_worst_n entries must be positive integers");
  const auto tm = get("tox_mode");
  if (tm != "sidecar" && tm != "lexicon") throw ConfigError("tox_mode must be sidecar or lexicon");
  if (integer("jobs") < 1) throw ConfigError("jobs must be at least 1");
  const double r = number("train_ratio");
  if (!(r > 0 && r < 1)) throw ConfigError("train_ratio must lie in (0,1)");
  if (integer("regression_bins") < 1) throw ConfigError("regression_bins must be positive");
  if (integer("top_n") < 0 || integer("bump_top_k") < 0) throw ConfigError("top_n and bump_top_k must be non-negative");
  const double d = number("pagerank_damping");
  if (!(d >= 0 && d < 1)) throw ConfigError("pagerank_damping must lie in [0,1)");
}

// ---------------------------------------------------------------------------
// Labeled table

std::string label_column(TargetDefinition d, double q) {
  return "label_" + std::string(to_string(d)) + "_" + format_double(q);
}

LabeledTable load_labeled(const RunConfig& config) {
  const Layout l{config.out_dir()};
  const auto path = l.file("label", "labeled.csv");
  require(path, "label");
  const auto thresholds_path = l.file("label", "thresholds.csv");
  require(thresholds_path, "label");
  const auto manifest = stage_manifest(l);
  auto table = read_csv(path);

  CsvTable features;
  const auto p = manifest.size();
  if (table.header.size() < p + 4) throw DataError("'" + path + "' is missing columns");
  features.header.assign(table.header.begin(), table.header.begin() + static_cast<std::ptrdiff_t>(p + 1));
  for (const auto& row : table.rows) features.rows.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(p + 1));

  LabeledTable out;
  out.matrix = parse_feature_matrix_csv(features, manifest);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  auto column = [&](std::size_t c) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = parse_double(table.rows[static_cast<std::size_t>(i)][c]);
    return v;
  };
  out.targets.users = out.matrix.users;
  out.targets.posts = column(table.column("posts"));
  out.targets.raw = column(table.column("target_raw"));
  out.targets.normalized = column(table.column("target_norm"));
  for (std::size_t c = p + 1; c < table.header.size(); ++c)
    if (table.header[c].rfind("label_", 0) == 0) out.labels[table.header[c]] = column(c);

  const auto th = read_csv(thresholds_path);
  const auto cd = th.column("definition"), cq = th.column("quantile"), cv = th.column("threshold_value"),
             cs = th.column("status");
  for (const auto& row : th.rows) {
    if (row[cs] != "ok") continue;
    auto def = parse_target_definition(row[cd]);
    if (!def) throw DataError("thresholds.csv: unknown definition '" + row[cd] + "'");
    out.thresholds[label_column(*def, parse_double(row[cq]))] = parse_double(row[cv]);
  }
  return out;
}

LabeledDataset dataset_for(const LabeledTable& table, TargetDefinition d, double q, const std::set<std::string>& excluded) {
  const auto name = label_column(d, q);
  auto it = table.labels.find(name);
  if (it == table.labels.end())
    throw DependencyError("labeled table has no column '" + name + "'; run `label` with this quantile");
  LabeledDataset ds;
  ds.matrix = table.matrix;
  ds.targets = table.targets;
  ds.spec = {d, q};
  ds.classification = true;
  ds.labels = it->second;
  ds.threshold_value = table.thresholds.count(name) ? table.thresholds.at(name) : 0.0;
  ds.feature_columns = model_columns(ds.matrix.manifest, excluded);
  return ds;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_synth(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto scenario = c.scenario();
  const auto corpus = generate(scenario);
  const Emitter em(c, "synth");
  ojson extra;
  extra["users"] = scenario.n_users;
  extra["dispersion"] = corpus.truth.dispersion;
  em.write(l.file("synth", "replay.ndjson"), corpus.ndjson, extra);
  em.write(l.file("synth", "ground_truth.json"), ground_truth_json(corpus.truth, scenario));
  em.write(l.file("synth", "mbfc.tsv"), corpus.mbfc_tsv);
  em.write(l.file("synth", "quality.tsv"), corpus.quality_tsv);
}

void cmd_ingest(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto window = c.window();
  std::vector<Event> all;
  ReplayStats stats;
  for (const auto& path : replay_paths(c, l)) {
    auto r = parse_replay_file(path, window);
    stats.lines += r.stats.lines;
    stats.malformed += r.stats.malformed;
    stats.out_of_window += r.stats.out_of_window;
    stats.duplicates += r.stats.duplicates;
    all.insert(all.end(), r.log.events().begin(), r.log.events().end());
  }
  EventLog log(std::move(all), window);
  stats.duplicates += log.duplicates_dropped();

  std::ostringstream nd;
  write_ndjson(log, nd);
  const Emitter em(c, "ingest");
  ojson meta;
  meta["events"] = log.size();
  meta["lines"] = stats.lines;
  meta["malformed"] = stats.malformed;
  meta["out_of_window"] = stats.out_of_window;
  meta["duplicates"] = stats.duplicates;
  em.write(l.file("ingest", "events.ndjson"), nd.str(), meta);

  const auto summary = summarize(log);
  CsvWriter table({"kind", "creates", "deletes"});
  for (std::size_t k = 0; k < kEventKindCount; ++k)
    table.field(to_string(static_cast<EventKind>(k)))
        .field(static_cast<double>(summary.creates[k]))
        .field(static_cast<double>(summary.deletes[k]))
        .end_row();
  table.field("unique_users").field(static_cast<double>(summary.unique_users)).field(0.0).end_row();
  em.write(l.file("ingest", "summary.csv"), table.str(), meta);

  std::vector<std::string> header = {"day"};
  for (std::size_t k = 0; k < kEventKindCount; ++k) header.emplace_back(to_string(static_cast<EventKind>(k)));
  CsvWriter daily(header);
  for (const auto& d : summary.daily) {
    daily.field(format_rfc3339(Timestamp(d.day)).substr(0, 10));
    for (auto v : d.creates) daily.field(static_cast<double>(v));
    daily.end_row();
  }
  em.write(l.file("ingest", "daily.csv"), daily.str());
}

void cmd_features(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto log = load_events(l);
  const auto manifest = c.manifest();
  const EventIndex index(log);
  const auto lookup = DomainLookup::load(lookup_path(c, l, "mbfc", "mbfc.tsv"), lookup_path(c, l, "quality", "quality.tsv"),
                                         c.get("public_suffixes"));
  PageRankOptions pr;
  pr.damping = c.number("pagerank_damping");
  const auto graph = GraphFeatures::compute(log, pr);
  ToxicityOptions tox;
  tox.mode = c.get("tox_mode") == "lexicon" ? ToxicityMode::Lexicon : ToxicityMode::Sidecar;
  BuildInfo info;
  const auto matrix = build_matrix(index, c.filter(), lookup, graph, manifest, tox, &info);

  const Emitter em(c, "features");
  ojson meta;
  meta["users"] = matrix.rows();
  meta["features"] = matrix.cols();
  meta["min_posts"] = c.filter().min_posts;
  meta["majority_lang"] = c.filter().majority_lang;
  meta["window_start"] = c.get("window_start");
  meta["window_end"] = c.get("window_end");
  meta["tox_mode"] = c.get("tox_mode");
  meta["imputed_quality"] = info.imputed_quality;
  meta["quality_imputed_users"] = info.quality_imputed_users;
  em.write(l.file("features", "features.csv"), feature_matrix_csv(matrix), meta);
  std::ostringstream mf;
  write_manifest(manifest, mf);
  em.write(l.file("features", "manifest.tsv"), mf.str());

  // Per-user action count distributions over the selected population.
  CsvWriter dist({"action", "mean", "median", "p90", "max"});
  const std::vector<std::string> actions = {"posts_created",   "replies_authored", "likes_created",
                                            "reposts_created", "follows_created",  "blocks_created"};
  std::vector<double> total(matrix.rows(), 0.0);
  for (const auto& a : actions) {
    if (!manifest.index_of(a)) continue;
    const auto col = matrix.values.col(matrix.column(a));
    std::vector<double> v(col.data(), col.data() + col.size());
    if (a != "replies_authored")
      for (std::size_t i = 0; i < v.size(); ++i) total[i] += v[i];
    const double mean = v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    dist.field(a).field(mean).field(quantile_of(v, 0.5)).field(quantile_of(v, 0.9)).field(quantile_of(v, 1.0)).end_row();
  }
  const double mean_total =
      total.empty() ? 0 : std::accumulate(total.begin(), total.end(), 0.0) / static_cast<double>(total.size());
  dist.field("total_actions")
      .field(mean_total)
      .field(quantile_of(total, 0.5))
      .field(quantile_of(total, 0.9))
      .field(quantile_of(total, 1.0))
      .end_row();
  em.write(l.file("features", "action_distribution.csv"), dist.str());
}

void cmd_label(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto features_path = l.file("features", "features.csv");
  require(features_path, "features");
  const auto manifest = stage_manifest(l);
  const auto matrix = parse_feature_matrix_csv(read_csv(features_path), manifest);
  const auto log = load_events(l);
  const EventIndex index(log);
  const auto targets = compute_targets(matrix, index);
  const auto excluded = c.excluded();

  std::vector<std::string> header = {"user_id"};
  for (const auto& e : manifest.entries()) header.push_back(e.name);
  for (const char* h : {"posts", "target_raw", "target_norm"}) header.emplace_back(h);

  CsvWriter thresholds({"definition", "quantile", "threshold_value", "positives", "negatives", "status"});
  std::vector<Eigen::VectorXd> label_cols;
  for (auto d : c.definitions())
    for (double q : c.numbers("quantiles")) {
      thresholds.field(to_string(d)).field(q);
      try {
        const auto ds = threshold_labels(matrix, targets, {d, q}, excluded);
        header.push_back(label_column(d, q));
        label_cols.push_back(ds.labels);
        const auto pos = static_cast<double>(ds.positives());
        thresholds.field(ds.threshold_value).field(pos).field(static_cast<double>(ds.rows()) - pos).field("ok");
      } catch (const DegenerateThresholdError&) {
        const auto& v = targets.values(d);
        std::vector<double> vals(v.data(), v.data() + v.size());
        thresholds.field(empirical_quantile(vals, q)).field(0.0).field(static_cast<double>(vals.size())).field("degenerate");
      }
      thresholds.end_row();
    }

  CsvWriter table(header);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    table.field(matrix.users[r]);
    for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) table.field(matrix.values(i, j));
    table.field(targets.posts(i)).field(targets.raw(i)).field(targets.normalized(i));
    for (const auto& col : label_cols) table.field(col(i));
    table.end_row();
  }
  const Emitter em(c, "label");
  ojson meta;
  meta["users"] = matrix.rows();
  meta["quantile_rule"] = "order statistic ceil(q*n), positives strictly above";
  meta["excluded_features"] = c.list("exclude");
  em.write(l.file("label", "labeled.csv"), table.str(), meta);
  em.write(l.file("label", "thresholds.csv"), thresholds.str());

  // Block counts against total activity, toxicity and credibility.
  const auto n = static_cast<Eigen::Index>(matrix.rows());
  Eigen::VectorXd log_blocks = (targets.raw.array() + 1).log10();
  std::vector<std::pair<std::string, Eigen::VectorXd>> xs;
  {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
    for (const char* a : {"posts_created", "likes_created", "reposts_created", "follows_created", "blocks_created"})
      if (manifest.index_of(a)) total += matrix.values.col(matrix.column(a));
    xs.emplace_back("total_actions", total);
  }
  if (manifest.index_of("toxicity_mean")) xs.emplace_back("toxicity_mean", matrix.values.col(matrix.column("toxicity_mean")));
  std::vector<Eigen::Index> cred_rows;
  Eigen::VectorXd cred;
  if (manifest.index_of("credibility_low") && manifest.index_of("credibility_medium") && manifest.index_of("credibility_high")) {
    const auto lo = matrix.values.col(matrix.column("credibility_low"));
    const auto me = matrix.values.col(matrix.column("credibility_medium"));
    const auto hi = matrix.values.col(matrix.column("credibility_high"));
    std::vector<double> v;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = lo(i) + me(i) + hi(i);
      if (s <= 0) continue;
      cred_rows.push_back(i);
      v.push_back((me(i) + 2 * hi(i)) / s);
    }
    cred = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  CsvWriter expl({"variable", "n", "pearson", "spearman"});
  CsvWriter bins({"variable", "bin", "x_mean", "log10_blocks_mean", "count"});
  auto describe = [&](const std::string& name, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    expl.field(name).field(static_cast<double>(x.size()));
    if (x.size() > 1) expl.field(pearson(x, y)).field(spearman(x, y));
    else expl.field(0.0).field(0.0);
    expl.end_row();
    if (x.size() == 0) return;
    const auto b = percentile_bins(x, y, 10);
    for (std::size_t k = 0; k < b.size(); ++k)
      bins.field(name).field(static_cast<double>(k)).field(b[k].mean_true).field(b[k].mean_pred).field(static_cast<double>(b[k].count)).end_row();
  };
  for (const auto& [name, x] : xs) describe(name, x, log_blocks);
  if (!cred_rows.empty()) describe("credibility_score", cred, log_blocks(cred_rows));
  em.write(l.file("label", "exploratory.csv"), expl.str());
  em.write(l.file("label", "exploratory_bins.csv"), bins.str());

  std::map<double, std::size_t> hist;
  for (Eigen::Index i = 0; i < n; ++i) ++hist[targets.raw(i)];
  CsvWriter dist({"blocks", "users"});
  for (const auto& [v, cnt] : hist) dist.field(v).field(static_cast<double>(cnt)).end_row();
  em.write(l.file("label", "block_distribution.csv"), dist.str());
}

namespace {

struct TrainedEntry {
  TargetDefinition definition;
  double quantile;
  [[nodiscard]] std::string stem() const { return std::string(to_string(definition)) + "_" + format_double(quantile); }
};

std::vector<TrainedEntry> trained_entries(const Layout& l) {
  const auto path = l.file("train", "cv.csv");
  require(path, "train");
  const auto t = read_csv(path);
  const auto cd = t.column("definition"), cq = t.column("quantile");
  std::vector<TrainedEntry> out;
  for (const auto& row : t.rows) {
    auto d = parse_target_definition(row[cd]);
    if (!d) throw DataError("cv.csv: unknown definition '" + row[cd] + "'");
    out.push_back({*d, parse_double(row[cq])});
  }
  return out;
}

std::vector<std::string> background_users(const std::string& model_path) {
  const auto meta = nlohmann::json::parse(read_file(model_path + ".meta.json"));
  return meta.at("background_users").get<std::vector<std::string>>();
}

FeatureMatrix rows_of(const FeatureMatrix& m, const std::vector<std::string>& users) {
  std::map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < m.users.size(); ++i) pos[m.users[i]] = i;
  std::vector<Eigen::Index> idx;
  for (const auto& u : users) {
    auto it = pos.find(u);
    if (it == pos.end()) throw DataError("background user '" + u + "' is not in the labeled table");
    idx.push_back(static_cast<Eigen::Index>(it->second));
  }
  FeatureMatrix out;
  out.users = users;
  out.manifest = m.manifest;
  out.values = m.values(idx, Eigen::all);
  return out;
}

}  // namespace

void cmd_train(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto table = load_labeled(c);
  const auto params = c.boosting();
  const auto cv = c.cv();
  const auto excluded = c.excluded();
  const Emitter em(c, "train");

  CsvWriter summary({"definition", "quantile", "feature_subset", "n_features", "mean_auc", "std_auc", "runs", "folds",
                     "positives", "threshold_value"});
  CsvWriter runs({"definition", "quantile", "run", "auc"});
  for (auto d : c.definitions())
    for (double q : c.numbers("quantiles")) {
      if (!table.labels.count(label_column(d, q))) continue;  // degenerate threshold
      const auto ds = dataset_for(table, d, q, excluded);
      const auto res = cross_validate(ds, params, cv);
      summary.field(to_string(d)).field(q).field("all").field(static_cast<double>(ds.feature_columns.size()))
          .field(res.mean_auc).field(res.std_auc).field(static_cast<double>(cv.runs)).field(static_cast<double>(cv.folds))
          .field(static_cast<double>(ds.positives())).field(ds.threshold_value).end_row();
      for (std::size_t r = 0; r < res.run_aucs.size(); ++r)
        runs.field(to_string(d)).field(q).field(static_cast<double>(r)).field(res.run_aucs[r]).end_row();

      const auto key = static_cast<std::uint64_t>(d);
      const auto rows = undersample_rows(ds.labels, derive_seed(c.seed(), {0x7472ULL, key, qkey(q)}));
      const auto train_set = ds.subset(rows);
      const auto model = train_classifier(train_set, params, derive_seed(c.seed(), {0x6d64ULL, key, qkey(q)}));
      ojson meta;
      meta["definition"] = to_string(d);
      meta["quantile"] = q;
      meta["threshold_value"] = ds.threshold_value;
      meta["background"] = "balanced training sample";
      meta["background_users"] = train_set.matrix.users;
      const TrainedEntry entry{d, q};
      em.write(l.file("train", "models/" + entry.stem() + ".json"), serialize_model(model), meta);
    }
  ojson meta;
  meta["undersampling"] = "fresh majority undersample per run, before fold split";
  em.write(l.file("train", "cv.csv"), summary.str(), meta);
  em.write(l.file("train", "cv_runs.csv"), runs.str());
}

void cmd_explain(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto entries = trained_entries(l);
  const auto table = load_labeled(c);
  const auto& manifest = table.matrix.manifest;
  const auto beeswarm_q = c.numbers("beeswarm_quantiles");
  const auto top_n = static_cast<std::size_t>(c.integer("top_n"));
  const Emitter em(c, "explain");

  CsvWriter importance({"definition", "quantile", "feature", "group", "mean_abs_phi", "rank"});
  CsvWriter shares({"definition", "quantile", "group", "importance", "share", "members", "degenerate"});
  CsvWriter checks({"definition", "quantile", "samples", "base_value", "max_local_error"});
  std::map<TargetDefinition, std::vector<RankedTable>> ranked;

  for (const auto& e : entries) {
    const auto model_path = l.file("train", "models/" + e.stem() + ".json");
    require(model_path, "train");
    const auto model = load_model(model_path);
    const auto bg = rows_of(table.matrix, background_users(model_path));
    const auto attr = tree_shap(model, bg, &bg);
    const Eigen::VectorXd margin = predict_margin(model, model_inputs(model, bg));
    double worst = 0;
    for (Eigen::Index i = 0; i < margin.size(); ++i)
      worst = std::max(worst, std::abs(attr.phi.row(i).sum() + attr.base_value - margin(i)));
    checks.field(to_string(e.definition)).field(e.quantile).field(static_cast<double>(margin.size()))
        .field(attr.base_value).field(worst).end_row();

    auto rep = aggregate_importance(attr, manifest);
    for (const auto& f : rep.features)
      importance.field(to_string(e.definition)).field(e.quantile).field(f.name).field(to_string(f.group))
          .field(f.mean_abs_phi).field(static_cast<double>(f.rank)).end_row();
    for (const auto& g : rep.groups)
      shares.field(to_string(e.definition)).field(e.quantile).field(to_string(g.group)).field(g.importance)
          .field(g.share).field(static_cast<double>(g.members)).field(rep.degenerate ? "true" : "false").end_row();

    if (std::any_of(beeswarm_q.begin(), beeswarm_q.end(), [&](double q) { return std::abs(q - e.quantile) < 1e-12; })) {
      CsvWriter bees({"feature", "user_id", "phi", "value", "percentile"});
      for (const auto& r : beeswarm_export(attr, bg, top_n))
        bees.field(r.feature).field(r.sample).field(r.phi).field(r.value).field(r.percentile).end_row();
      em.write(l.file("explain", "beeswarm_" + e.stem() + ".csv"), bees.str());
      CsvWriter phi({"user_id", "feature", "phi"});
      for (Eigen::Index i = 0; i < attr.phi.rows(); ++i)
        for (std::size_t j = 0; j < attr.feature_names.size(); ++j)
          phi.field(attr.users[static_cast<std::size_t>(i)]).field(attr.feature_names[j])
              .field(attr.phi(i, static_cast<Eigen::Index>(j))).end_row();
      ojson meta;
      meta["base_value"] = attr.base_value;
      meta["background"] = "balanced training sample";
      em.write(l.file("explain", "attributions_" + e.stem() + ".csv"), phi.str(), meta);
    }
    ranked[e.definition].push_back({format_double(e.quantile), std::move(rep)});
  }
  em.write(l.file("explain", "importance.csv"), importance.str());
  em.write(l.file("explain", "group_shares.csv"), shares.str());
  em.write(l.file("explain", "shap_checks.csv"), checks.str());
  for (const auto& [d, tables] : ranked) {
    CsvWriter bump({"feature", "quantile", "rank"});
    for (const auto& r : bump_table(tables, static_cast<std::size_t>(c.integer("bump_top_k"))))
      bump.field(r.feature).field(r.label).field(static_cast<double>(r.rank)).end_row();
    em.write(l.file("explain", "bump_" + std::string(to_string(d)) + ".csv"), bump.str());
  }
}

void cmd_ablate(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto importance_path = l.file("explain", "importance.csv");
  require(importance_path, "explain");
  const auto table = load_labeled(c);
  const auto excluded = c.excluded();
  const auto params = c.boosting();
  const auto cv = c.cv();
  auto quantiles = c.numbers("ablation_quantiles");
  if (quantiles.empty()) quantiles = c.numbers("quantiles");
  const Emitter em(c, "ablate");

  CsvWriter ablation({"definition", "quantile", "experiment", "feature_subset", "n_features", "mean_auc", "std_auc"});
  auto write_rows = [](CsvWriter& w, const EvalReport& rep) {
    for (const auto& r : rep.rows)
      w.field(r.definition).field(r.quantile).field(r.experiment).field(r.subset)
          .field(static_cast<double>(r.n_features)).field(r.mean_auc).field(r.std_auc).end_row();
  };
  for (auto d : c.definitions()) {
    std::vector<LabeledDataset> datasets;
    for (double q : quantiles)
      if (table.labels.count(label_column(d, q))) datasets.push_back(dataset_for(table, d, q, excluded));
    for (const auto& ds : datasets) {
      const std::span<const LabeledDataset> one(&ds, 1);
      write_rows(ablation, ablate_groups(one, AblationMode::OnlyGroup, params, cv, true));
      write_rows(ablation, ablate_groups(one, AblationMode::AllButGroup, params, cv, false));
    }
  }
  em.write(l.file("ablate", "ablation.csv"), ablation.str());

  const auto imp = read_csv(importance_path);
  const auto cd = imp.column("definition"), cq = imp.column("quantile"), cf = imp.column("feature"), cr = imp.column("rank");
  const double bwq = c.number("best_worst_quantile");
  CsvWriter bw({"definition", "quantile", "experiment", "feature_subset", "n_features", "mean_auc", "std_auc"});
  for (auto d : c.definitions()) {
    if (!table.labels.count(label_column(d, bwq))) continue;
    std::vector<std::pair<double, std::string>> ranking;
    for (const auto& row : imp.rows)
      if (row[cd] == to_string(d) && std::abs(parse_double(row[cq]) - bwq) < 1e-12)
        ranking.emplace_back(parse_double(row[cr]), row[cf]);
    if (ranking.empty())
      throw DependencyError("no importance ranking for " + std::string(to_string(d)) + " at quantile " +
                            format_double(bwq) + "; run `train` and `explain` with that quantile");
    std::sort(ranking.begin(), ranking.end());
    std::vector<std::string> names;
    for (auto& [r, f] : ranking) names.push_back(f);
    std::vector<std::size_t> grid;
    for (double n : c.numbers("best_worst_n"))
      if (static_cast<std::size_t>(n) <= names.size()) grid.push_back(static_cast<std::size_t>(n));
    const auto ds = dataset_for(table, d, bwq, excluded);
    write_rows(bw, ablate_best_worst(ds, names, grid, params, cv));
  }
  em.write(l.file("ablate", "best_worst.csv"), bw.str());
}

void cmd_regress(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const auto table = load_labeled(c);
  const auto excluded = c.excluded();
  const Emitter em(c, "regress");
  CsvWriter summary({"definition", "model", "split", "r2", "mae", "median_true", "n_train", "n_test"});
  CsvWriter bins({"definition", "bin", "mean_true", "mean_pred", "count"});
  const double ratio = c.number("train_ratio");
  for (auto d : c.definitions()) {
    const auto ds = regression_dataset(table.matrix, table.targets, d, excluded);
    const auto rep = evaluate_regression(ds, c.forest(), derive_seed(c.seed(), {0x7267ULL}), ratio,
                                         c.integer("regression_bins"));
    summary.field(to_string(d)).field(rep.model).field(format_double(ratio * 100) + ":" + format_double(100 - ratio * 100))
        .field(rep.r2).field(rep.mae).field(rep.median_true).field(static_cast<double>(rep.n_train))
        .field(static_cast<double>(rep.n_test)).end_row();
    for (std::size_t k = 0; k < rep.bins.size(); ++k)
      bins.field(to_string(d)).field(static_cast<double>(k)).field(rep.bins[k].mean_true).field(rep.bins[k].mean_pred)
          .field(static_cast<double>(rep.bins[k].count)).end_row();
    CsvWriter pred({"user_id", "y_true", "y_pred"});
    for (std::size_t i = 0; i < rep.test_users.size(); ++i)
      pred.field(rep.test_users[i]).field(rep.y_true(static_cast<Eigen::Index>(i))).field(rep.y_pred(static_cast<Eigen::Index>(i))).end_row();
    em.write(l.file("regress", "predictions_" + std::string(to_string(d)) + ".csv"), pred.str());
  }
  em.write(l.file("regress", "regression.csv"), summary.str());
  em.write(l.file("regress", "regression_bins.csv"), bins.str());
}

namespace {

struct Family {
  std::string name;
  std::string stage;
  std::vector<std::string> files;  // exact names; a trailing '*' matches a prefix
  std::string description;
};

const std::vector<Family>& families() {
  static const std::vector<Family> f = {
      {"table1_summary", "ingest", {"summary.csv"}, "per-kind create/delete totals and unique users"},
      {"fig2_daily_actions", "ingest", {"daily.csv"}, "daily create counts per kind"},
      {"fig2_action_distribution", "features", {"action_distribution.csv"}, "per-user action count distribution"},
      {"fig3_exploratory", "label", {"exploratory.csv", "exploratory_bins.csv", "block_distribution.csv"},
       "blocks received against activity, toxicity and credibility"},
      {"fig4_threshold_sweep", "train", {"cv.csv", "cv_runs.csv"}, "cross-validated AUC per definition and quantile"},
      {"fig4_ablation", "ablate", {"ablation.csv"}, "only-group and all-but-group AUC"},
      {"fig5_beeswarm", "explain", {"beeswarm_*"}, "attribution against feature value for the top features"},
      {"fig5_bump", "explain", {"bump_*", "importance.csv"}, "feature ranks across quantiles"},
      {"fig6_group_shares", "explain", {"group_shares.csv"}, "attribution share per feature group"},
      {"fig7_best_worst", "ablate", {"best_worst.csv"}, "AUC on the best and worst n features"},
      {"fig8_regression", "regress", {"regression.csv", "regression_bins.csv"}, "regression scores and binned pairs"},
  };
  return f;
}

std::vector<std::string> resolve(const Layout& l, const Family& fam) {
  std::vector<std::string> out;
  for (const auto& pattern : fam.files) {
    if (pattern.back() != '*') {
      const auto p = l.file(fam.stage, pattern);
      require(p, fam.stage);
      out.push_back(p);
      continue;
    }
    const auto prefix = pattern.substr(0, pattern.size() - 1);
    std::vector<std::string> matched;
    if (fs::exists(l.dir(fam.stage)))
      for (const auto& entry : fs::directory_iterator(l.dir(fam.stage))) {
        const auto name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".csv")
          matched.push_back(entry.path().string());
      }
    std::sort(matched.begin(), matched.end());
    out.insert(out.end(), matched.begin(), matched.end());
  }
  return out;
}

}  // namespace

void cmd_report(const RunConfig& c) {
  const Layout l{c.out_dir()};
  const Emitter em(c, "report");
  ojson index;
  index["config_hash"] = c.hash();
  index["seed"] = c.seed();
  index["manifest_version"] = c.manifest().version();
  ojson fams = ojson::object();
  for (const auto& fam : families()) {
    ojson entry;
    entry["source"] = fam.stage;
    entry["description"] = fam.description;
    ojson files = ojson::array();
    for (const auto& src : resolve(l, fam)) {
      const auto name = fs::path(src).filename().string();
      const auto dest = fam.name + "__" + name;
      const auto content = read_file(src);
      em.write(l.file("report", dest), content, ojson{{"source", fs::relative(src, l.root).generic_string()}});
      ojson f;
      f["file"] = dest;
      f["rows"] = std::count(content.begin(), content.end(), '\n') - 1;
      files.push_back(f);
    }
    entry["files"] = files;
    fams[fam.name] = entry;
  }
  index["families"] = fams;
  write_file_atomic(l.file("report", "index.json"), index.dump(1) + "\n");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"synth",   "ingest", "features", "label",  "train",
                                                 "explain", "ablate", "regress",  "report", "run-all"};
  return names;
}

void run_command(const std::string& name, const RunConfig& c) {
  c.validate();
  if (name == "synth") return cmd_synth(c);
  if (name == "ingest") return cmd_ingest(c);
  if (name == "features") return cmd_features(c);
  if (name == "label") return cmd_label(c);
  if (name == "train") return cmd_train(c);
  if (name == "explain") return cmd_explain(c);
  if (name == "ablate") return cmd_ablate(c);
  if (name == "regress") return cmd_regress(c);
  if (name == "report") return cmd_report(c);
  if (name == "run-all") {
    for (auto* f : {cmd_ingest, cmd_features, cmd_label, cmd_train, cmd_explain, cmd_ablate, cmd_regress, cmd_report})
      f(c);
    return;
  }
  throw ConfigError("unknown command '" + name + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DependencyError*>(&e)) return 3;
  if (dynamic_cast<const DataError*>(&e)) return 4;
  return 1;
}

}  // namespace blockprop
