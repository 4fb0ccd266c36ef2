#include "blockprop/error.hpp"
#include "blockprop/learner.hpp"
#include "blockprop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockprop {

namespace {

struct Pending {
  std::int32_t node;
  int depth;
  std::vector<std::uint32_t> rows;
};

DecisionTree grow_forest_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                              const std::vector<double>& weight, const ForestParams& p, std::size_t mtry, Rng& rng) {
  const auto n_features = static_cast<std::size_t>(X.cols());
  DecisionTree tree;
  std::vector<std::uint32_t> root_rows;
  for (std::uint32_t r = 0; r < weight.size(); ++r)
    if (weight[r] > 0) root_rows.push_back(r);

  auto stats = [&](const std::vector<std::uint32_t>& rows) {
    double w = 0, s = 0;
    for (auto r : rows) w += weight[r], s += weight[r] * y(r);
    return std::pair{w, s};
  };
  const auto [w0, s0] = stats(root_rows);
  std::vector<Pending> stack;
  stack.push_back({tree.add_leaf(s0 / w0, w0), 0, std::move(root_rows)});

  std::vector<std::size_t> features(n_features);
  std::vector<std::pair<double, std::uint32_t>> column;
  const double min_leaf = static_cast<double>(p.min_samples_leaf);

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto node = static_cast<std::size_t>(cur.node);
    const double W = tree.cover[node];
    const double S = tree.value[node] * W;
    if ((p.max_depth > 0 && cur.depth >= p.max_depth) || W < 2 * min_leaf) continue;
    bool constant = true;
    for (auto r : cur.rows)
      if (y(r) != y(cur.rows.front())) {
        constant = false;
        break;
      }
    if (constant) continue;

    // Partial Fisher–Yates draw of mtry features, scanned in index order.
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t k = 0; k < mtry; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n_features - 1);
      std::swap(features[k], features[pick(rng)]);
    }
    std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(mtry));

    double best_gain = 1e-12 * (1 + S * S / W);
    std::int32_t best_feature = -1;
    double best_threshold = 0;
    for (std::size_t k = 0; k < mtry; ++k) {
      const auto j = features[k];
      column.clear();
      for (auto r : cur.rows) column.emplace_back(X(r, static_cast<Eigen::Index>(j)), r);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      double wl = 0, sl = 0;
      for (std::size_t t = 0; t + 1 < column.size(); ++t) {
        const auto r = column[t].second;
        wl += weight[r];
        sl += weight[r] * y(r);
        const double lo = column[t].first, hi = column[t + 1].first;
        if (lo == hi) continue;
        const double wr = W - wl;
        if (wl < min_leaf || wr < min_leaf) continue;
        const double sr = S - sl;
        const double gain = sl * sl / wl + sr * sr / wr - S * S / W;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(j);
          const double mid = lo + (hi - lo) / 2;
          best_threshold = lo < mid ? mid : hi;
        }
      }
    }
    if (best_feature < 0) continue;

    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : cur.rows) (X(r, best_feature) < best_threshold ? left_rows : right_rows).push_back(r);
    const auto [wl, sl] = stats(left_rows);
    const auto [wr, sr] = stats(right_rows);
    const auto l = tree.add_leaf(sl / wl, wl);
    const auto r = tree.add_leaf(sr / wr, wr);
    tree.feature[node] = best_feature;
    tree.threshold[node] = best_threshold;
    tree.left[node] = l;
    tree.right[node] = r;
    stack.push_back({r, cur.depth + 1, std::move(right_rows)});
    stack.push_back({l, cur.depth + 1, std::move(left_rows)});
  }
  return tree;
}

}  // namespace

TreeEnsemble train_regressor(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                             const ForestParams& params, std::uint64_t seed, std::vector<std::string> feature_names) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0) throw DataError("cannot train a regressor on an empty dataset");
  if (static_cast<std::size_t>(y.size()) != n) throw DataError("targets and rows differ in length");
  if (params.n_estimators < 1 || params.min_samples_leaf < 1 || params.max_depth < 0 || params.mtry < 0)
    throw ConfigError("invalid forest parameters");
  if (X.cols() == 0) throw DataError("cannot train a regressor without features");

  TreeEnsemble model;
  model.mode = EnsembleMode::BaggedRegressor;
  model.forest = params;
  model.seed = seed;
  model.base_score = y.mean();
  if (feature_names.empty())
    for (Eigen::Index j = 0; j < X.cols(); ++j) feature_names.push_back("f" + std::to_string(j));
  model.feature_names = std::move(feature_names);

  const auto p = static_cast<std::size_t>(X.cols());
  std::size_t mtry = params.mtry > 0 ? static_cast<std::size_t>(params.mtry)
                                     : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))));
  mtry = std::clamp<std::size_t>(mtry, 1, p);

  std::vector<double> weight(n);
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng rng(derive_seed(seed, {0x666f72ULL, static_cast<std::uint64_t>(t)}));
    if (params.bootstrap) {
      std::fill(weight.begin(), weight.end(), 0.0);
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) weight[draw(rng)] += 1;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    model.trees.push_back(grow_forest_tree(X, y, weight, params, mtry, rng));
  }
  return model;
}

TreeEnsemble train_regressor(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed) {
  std::vector<Eigen::Index> cols(data.feature_columns.begin(), data.feature_columns.end());
  std::vector<std::string> names;
  for (auto c : data.feature_columns) names.push_back(data.matrix.manifest[c].name);
  return train_regressor(data.matrix.values(Eigen::all, cols), data.target(), params, seed, std::move(names));
}

}  // namespace blockprop
