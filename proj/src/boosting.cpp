#include "blockprop/error.hpp"
#include "blockprop/learner.hpp"
#include "blockprop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockprop {

namespace {

// Minimum loss reduction worth a split, as in the reference library.
constexpr double kMinLossChange = 1e-6;

struct GradPair {
  double g = 0;
  double h = 0;
};

/// Rows of every column ordered by value; built once per training call.
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::vector<double>> values;
  std::vector<std::size_t> usable;  // non-constant columns
};

SortedColumns presort(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  SortedColumns sc;
  sc.rows.resize(p);
  sc.values.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    auto& r = sc.rows[j];
    r.resize(n);
    std::iota(r.begin(), r.end(), 0u);
    const auto col = X.col(static_cast<Eigen::Index>(j));
    std::stable_sort(r.begin(), r.end(), [&](std::uint32_t a, std::uint32_t b) { return col(a) < col(b); });
    auto& v = sc.values[j];
    v.resize(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = col(r[t]);
    if (n > 1 && v.front() < v.back()) sc.usable.push_back(j);
  }
  return sc;
}

double split_point(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2;
  return lo < mid ? mid : hi;
}

struct ScanState {
  double g = 0, h = 0;
  double last = 0;
  bool seen = false;
};

struct BestSplit {
  double gain = 0;
  std::int32_t feature = -1;
  double threshold = 0;
};

/// Level-wise exact greedy growth. `node_of[r] < 0` excludes row r.
DecisionTree grow_boosted_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const SortedColumns& sc,
                               const std::vector<GradPair>& gh, std::vector<std::int32_t>& node_of,
                               const BoostingParams& p) {
  const auto n = node_of.size();
  DecisionTree tree;
  std::vector<double> G, H;
  auto new_node = [&](double g, double h, double c) {
    G.push_back(g);
    H.push_back(h);
    return tree.add_leaf(0.0, c);
  };

  {
    double g = 0, h = 0, c = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (node_of[r] >= 0) g += gh[r].g, h += gh[r].h, c += 1;
    new_node(g, h, c);
  }

  std::vector<std::int32_t> frontier = {0};
  std::vector<std::int32_t> slot_of;
  std::vector<ScanState> state;
  std::vector<BestSplit> best;
  std::vector<double> parent_term;
  // Per-row gradient, hessian and active slot, refreshed every level.
  struct RowSlot {
    double g, h;
    std::int32_t slot;
  };
  std::vector<RowSlot> row_slot(n);

  for (int depth = 0; depth < p.max_depth && !frontier.empty(); ++depth) {
    slot_of.assign(tree.size(), -1);
    std::vector<std::int32_t> active;
    for (auto k : frontier)
      if (H[static_cast<std::size_t>(k)] >= 2 * p.min_child_weight && tree.cover[static_cast<std::size_t>(k)] >= 2) {
        slot_of[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(active.size());
        active.push_back(k);
      }
    if (active.empty()) break;
    best.assign(active.size(), BestSplit{});
    parent_term.resize(active.size());
    for (std::size_t s = 0; s < active.size(); ++s) {
      const auto k = static_cast<std::size_t>(active[s]);
      best[s].gain = 2 * (p.gamma + kMinLossChange);
      parent_term[s] = G[k] * G[k] / (H[k] + p.lambda);
    }
    for (std::size_t r = 0; r < n; ++r)
      row_slot[r] = {gh[r].g, gh[r].h, node_of[r] < 0 ? -1 : slot_of[static_cast<std::size_t>(node_of[r])]};

    for (const auto j : sc.usable) {
      state.assign(active.size(), ScanState{});
      const auto& rows = sc.rows[j];
      const auto& vals = sc.values[j];
      for (std::size_t t = 0; t < n; ++t) {
        const auto& rs = row_slot[rows[t]];
        if (rs.slot < 0) continue;
        const auto s = static_cast<std::size_t>(rs.slot);
        auto& st = state[s];
        const double v = vals[t];
        if (st.seen && v != st.last && st.h >= p.min_child_weight) {
          const auto node = static_cast<std::size_t>(active[s]);
          const double gl = st.g, hl = st.h;
          const double gr = G[node] - gl, hr = H[node] - hl;
          if (hr >= p.min_child_weight) {
            const double gain = gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) - parent_term[s];
            auto& b = best[s];
            if (gain > b.gain) {
              b.gain = gain;
              b.feature = static_cast<std::int32_t>(j);
              b.threshold = split_point(st.last, v);
            }
          }
        }
        st.g += rs.g;
        st.h += rs.h;
        st.last = v;
        st.seen = true;
      }
    }

    // Materialize children, then route rows.
    std::vector<std::int32_t> next;
    std::vector<std::int32_t> left_of(tree.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) {
      if (best[s].feature < 0) continue;
      const auto k = static_cast<std::size_t>(active[s]);
      const auto l = new_node(0, 0, 0);
      const auto r = new_node(0, 0, 0);
      tree.feature[k] = best[s].feature;
      tree.threshold[k] = best[s].threshold;
      tree.left[k] = l;
      tree.right[k] = r;
      left_of[k] = l;
      next.push_back(l);
      next.push_back(r);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const auto k = node_of[r];
      if (k < 0) continue;
      const auto node = static_cast<std::size_t>(k);
      if (node >= left_of.size() || left_of[node] < 0) continue;
      const bool go_left = X(static_cast<Eigen::Index>(r), tree.feature[node]) < tree.threshold[node];
      const auto child = go_left ? tree.left[node] : tree.right[node];
      node_of[r] = child;
      const auto c = static_cast<std::size_t>(child);
      G[c] += gh[r].g;
      H[c] += gh[r].h;
      tree.cover[c] += 1;
    }
    frontier = std::move(next);
  }

  for (std::size_t k = 0; k < tree.size(); ++k) tree.value[k] = -G[k] / (H[k] + p.lambda) * p.learning_rate;
  return tree;
}

enum class Loss { Logistic, Squared };

void validate(const BoostingParams& p) {
  if (p.n_estimators < 0 || p.max_depth < 0 || !(p.learning_rate > 0) || !(p.subsample > 0 && p.subsample <= 1) ||
      p.min_child_weight < 0 || p.lambda < 0 || p.gamma < 0)
    throw ConfigError("invalid boosting parameters");
}

std::vector<std::string> default_names(std::vector<std::string> names, Eigen::Index p) {
  if (names.empty())
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
  if (static_cast<Eigen::Index>(names.size()) != p) throw DataError("feature name count does not match columns");
  return names;
}

TreeEnsemble boost(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const BoostingParams& params, std::uint64_t seed, std::vector<std::string> names, Loss loss,
                   std::vector<double>* loss_trace) {
  validate(params);
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0) throw DataError("cannot train on an empty dataset");
  if (static_cast<std::size_t>(y.size()) != n) throw DataError("targets and rows differ in length");

  TreeEnsemble model;
  model.mode = loss == Loss::Logistic ? EnsembleMode::BoostedClassifier : EnsembleMode::BoostedRegressor;
  model.boosting = params;
  model.seed = seed;
  model.feature_names = default_names(std::move(names), X.cols());

  if (loss == Loss::Logistic) {
    const double prior = std::clamp(y.mean(), 1e-6, 1 - 1e-6);
    model.base_score = std::log(prior / (1 - prior));
  } else {
    model.base_score = y.mean();
  }

  const auto sc = presort(X);
  std::vector<double> margin(n, model.base_score);
  std::vector<GradPair> gh(n);
  std::vector<std::int32_t> node_of(n);
  Rng rng(derive_seed(seed, {0x6b6f6f73ULL}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto record_loss = [&] {
    if (!loss_trace) return;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = margin[i];
      // log(1 + e^m) − y·m, evaluated stably
      total += (m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m))) - y(static_cast<Eigen::Index>(i)) * m;
    }
    loss_trace->push_back(total / static_cast<double>(n));
  };
  record_loss();

  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = y(static_cast<Eigen::Index>(i));
      if (loss == Loss::Logistic) {
        const double pr = sigmoid(margin[i]);
        gh[i] = {pr - yi, std::max(pr * (1 - pr), 1e-16)};
      } else {
        gh[i] = {margin[i] - yi, 1.0};
      }
    }
    for (std::size_t i = 0; i < n; ++i) node_of[i] = (params.subsample >= 1.0 || unif(rng) < params.subsample) ? 0 : -1;
    auto tree = grow_boosted_tree(X, sc, gh, node_of, params);
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(X.row(static_cast<Eigen::Index>(i)));
    model.trees.push_back(std::move(tree));
    record_loss();
  }
  return model;
}

}  // namespace

TreeEnsemble train_classifier(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                              const BoostingParams& params, std::uint64_t seed, std::vector<std::string> feature_names) {
  const auto pos = (y.array() > 0.5).count();
  if (pos < 1 || pos == y.size()) throw DataError("classifier training needs both classes present");
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) throw DataError("classifier labels must be 0 or 1");
  return boost(X, y, params, seed, std::move(feature_names), Loss::Logistic, nullptr);
}

TreeEnsemble train_classifier(const LabeledDataset& data, const BoostingParams& params, std::uint64_t seed) {
  if (!data.classification) throw DataError("dataset has no class labels");
  std::vector<Eigen::Index> cols(data.feature_columns.begin(), data.feature_columns.end());
  std::vector<std::string> names;
  for (auto c : data.feature_columns) names.push_back(data.matrix.manifest[c].name);
  return train_classifier(data.matrix.values(Eigen::all, cols), data.labels, params, seed, std::move(names));
}

TreeEnsemble train_boosted_regressor(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXd>& y, const BoostingParams& params,
                                     std::uint64_t seed, std::vector<std::string> feature_names) {
  return boost(X, y, params, seed, std::move(feature_names), Loss::Squared, nullptr);
}

std::vector<double> boosting_loss_trace(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        const Eigen::Ref<const Eigen::VectorXd>& y, const BoostingParams& params,
                                        std::uint64_t seed) {
  std::vector<double> trace;
  boost(X, y, params, seed, {}, Loss::Logistic, &trace);
  return trace;
}

}  // namespace blockprop
