#include "blockprop/error.hpp"
#include "blockprop/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace blockprop {

std::vector<std::string> ImportanceReport::ranking() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

ImportanceReport aggregate_importance(const AttributionMatrix& attr, const FeatureManifest& manifest) {
  const auto p = attr.feature_names.size();
  std::vector<std::size_t> manifest_pos(p);
  ImportanceReport rep;
  rep.features.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto idx = manifest.index_of(attr.feature_names[j]);
    if (!idx) throw DataError("attributed feature '" + attr.feature_names[j] + "' is not in the manifest");
    manifest_pos[j] = *idx;
    auto& f = rep.features[j];
    f.name = attr.feature_names[j];
    f.group = manifest[*idx].group;
    const auto n = attr.phi.rows();
    f.mean_abs_phi = n > 0 ? attr.phi.col(static_cast<Eigen::Index>(j)).cwiseAbs().sum() / static_cast<double>(n) : 0;
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rep.features[a].mean_abs_phi != rep.features[b].mean_abs_phi)
      return rep.features[a].mean_abs_phi > rep.features[b].mean_abs_phi;
    return manifest_pos[a] < manifest_pos[b];
  });
  std::vector<FeatureImportance> sorted;
  sorted.reserve(p);
  for (std::size_t r = 0; r < p; ++r) {
    sorted.push_back(rep.features[order[r]]);
    sorted.back().rank = r + 1;
  }
  rep.features = std::move(sorted);

  double total = 0;
  for (auto g : kFeatureGroups) {
    GroupShare gs;
    gs.group = g;
    for (const auto& f : rep.features)
      if (f.group == g) gs.importance += f.mean_abs_phi, ++gs.members;
    if (gs.members == 0) continue;
    total += gs.importance;
    rep.groups.push_back(gs);
  }
  rep.degenerate = !(total > 0);
  for (auto& gs : rep.groups)
    gs.share = rep.degenerate ? 1.0 / static_cast<double>(rep.groups.size()) : gs.importance / total;
  return rep;
}

std::vector<BeeswarmRow> beeswarm_export(const AttributionMatrix& attr, const FeatureMatrix& matrix,
                                         std::size_t top_n) {
  std::vector<BeeswarmRow> rows;
  if (top_n == 0 || attr.feature_names.empty()) return rows;
  const auto n = attr.phi.rows();
  if (static_cast<std::size_t>(n) != matrix.rows()) throw DataError("attribution and matrix row counts differ");

  std::vector<std::size_t> order(attr.feature_names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> mean_abs(order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    mean_abs[j] = n > 0 ? attr.phi.col(static_cast<Eigen::Index>(j)).cwiseAbs().mean() : 0;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });
  order.resize(std::min(top_n, order.size()));

  for (auto j : order) {
    const auto& name = attr.feature_names[j];
    const auto col = matrix.values.col(matrix.column(name));
    std::vector<double> sorted(col.data(), col.data() + col.size());
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = col(i);
      const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
      const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
      const double mid = 0.5 * static_cast<double>(lo + hi - 1);
      BeeswarmRow row;
      row.feature = name;
      row.sample = i < static_cast<Eigen::Index>(attr.users.size()) ? attr.users[static_cast<std::size_t>(i)]
                                                                     : matrix.users[static_cast<std::size_t>(i)];
      row.phi = attr.phi(i, static_cast<Eigen::Index>(j));
      row.value = v;
      row.percentile = n > 1 ? mid / static_cast<double>(n - 1) : 0.5;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<BumpRow> bump_table(std::span<const RankedTable> tables, std::size_t top_k) {
  std::vector<std::string> features;
  for (const auto& t : tables)
    for (std::size_t r = 0; r < std::min(top_k, t.report.features.size()); ++r)
      if (std::find(features.begin(), features.end(), t.report.features[r].name) == features.end())
        features.push_back(t.report.features[r].name);
  std::vector<BumpRow> rows;
  for (const auto& f : features)
    for (const auto& t : tables)
      for (const auto& fi : t.report.features)
        if (fi.name == f) {
          rows.push_back({f, t.label, fi.rank});
          break;
        }
  return rows;
}

}  // namespace blockprop
