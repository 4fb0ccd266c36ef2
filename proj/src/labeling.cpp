#include "blockprop/labeling.hpp"

#include "blockprop/error.hpp"
#include "blockprop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockprop {

std::string_view to_string(TargetDefinition d) { return d == TargetDefinition::Raw ? "raw" : "norm"; }

std::optional<TargetDefinition> parse_target_definition(std::string_view s) {
  if (s == "raw") return TargetDefinition::Raw;
  if (s == "norm" || s == "normalized") return TargetDefinition::Normalized;
  return std::nullopt;
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>((labels.array() > 0.5).count());
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.spec = spec;
  out.classification = classification;
  out.threshold_value = threshold_value;
  out.feature_columns = feature_columns;
  out.matrix.manifest = matrix.manifest;
  const std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  out.matrix.values = matrix.values(idx, Eigen::all);
  out.targets.raw = targets.raw(idx);
  out.targets.normalized = targets.normalized(idx);
  out.targets.posts = targets.posts(idx);
  if (labels.size()) out.labels = labels(idx);
  for (auto r : rows) {
    out.matrix.users.push_back(matrix.users[r]);
    out.targets.users.push_back(targets.users[r]);
  }
  return out;
}

const std::set<std::string>& default_excluded_features() {
  static const std::set<std::string> s = {"times_blocked"};
  return s;
}

std::vector<std::size_t> model_columns(const FeatureManifest& manifest, const std::set<std::string>& excluded) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < manifest.size(); ++j)
    if (!excluded.contains(manifest[j].name)) out.push_back(j);
  return out;
}

std::vector<double> default_quantile_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.995, 0.9995};
}

Targets compute_targets(const FeatureMatrix& matrix, const EventIndex& index) {
  Targets t;
  t.users = matrix.users;
  const auto n = static_cast<Eigen::Index>(matrix.users.size());
  t.raw.resize(n);
  t.normalized.resize(n);
  t.posts.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& u = matrix.users[static_cast<std::size_t>(r)];
    double blocks = 0;
    for (auto i : index.as_subject(u)) {
      const auto& e = index.event(i);
      if (e.kind == EventKind::Block && e.action == EventAction::Create && e.actor != u) blocks += 1;
    }
    const auto posts = static_cast<double>(posts_created(index, u));
    if (posts <= 0) throw DataError("user '" + u + "' has no created posts; cannot normalize its block count");
    t.raw(r) = blocks;
    t.posts(r) = posts;
    t.normalized(r) = blocks / posts;
  }
  return t;
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile must lie in (0,1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Guard against q·n landing a hair above an integer through rounding.
  const double pos = q * static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(pos - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

LabeledDataset threshold_labels(const FeatureMatrix& matrix, const Targets& targets, TargetSpec spec,
                                const std::set<std::string>& excluded) {
  if (matrix.users.empty()) throw DataError("cannot threshold an empty target set");
  if (targets.users != matrix.users) throw DataError("targets are not aligned with feature matrix rows");
  const auto& y = targets.values(spec.definition);
  const double thr = empirical_quantile(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), spec.quantile);
  LabeledDataset d;
  d.matrix = matrix;
  d.targets = targets;
  d.spec = spec;
  d.classification = true;
  d.threshold_value = thr;
  d.labels = (y.array() > thr).cast<double>();
  d.feature_columns = model_columns(matrix.manifest, excluded);
  if (d.positives() == 0)
    throw DegenerateThresholdError("quantile " + std::to_string(spec.quantile) + " of " +
                                   std::string(to_string(spec.definition)) + " target leaves no positive users");
  return d;
}

LabeledDataset regression_dataset(const FeatureMatrix& matrix, const Targets& targets, TargetDefinition definition,
                                  const std::set<std::string>& excluded) {
  if (targets.users != matrix.users) throw DataError("targets are not aligned with feature matrix rows");
  LabeledDataset d;
  d.matrix = matrix;
  d.targets = targets;
  d.spec = {definition, 0.0};
  d.classification = false;
  d.feature_columns = model_columns(matrix.manifest, excluded);
  return d;
}

std::vector<std::size_t> undersample_rows(const Eigen::VectorXd& labels, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels(i) > 0.5 ? pos : neg).push_back(static_cast<std::size_t>(i));
  if (pos.empty() || neg.empty()) throw DataError("undersampling needs both classes present");
  auto& major = pos.size() > neg.size() ? pos : neg;
  const auto& minor = pos.size() > neg.size() ? neg : pos;
  Rng rng(seed);
  std::shuffle(major.begin(), major.end(), rng);
  major.resize(minor.size());
  std::vector<std::size_t> rows;
  rows.reserve(2 * minor.size());
  rows.insert(rows.end(), pos.begin(), pos.end());
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

LabeledDataset undersample_balance(const LabeledDataset& data, std::uint64_t seed) {
  if (!data.classification) throw DataError("undersampling applies to classification datasets only");
  const auto rows = undersample_rows(data.labels, seed);
  return data.subset(rows);
}

}  // namespace blockprop
