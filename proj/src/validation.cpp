#include "blockprop/error.hpp"
#include "blockprop/learner.hpp"
#include "blockprop/metrics.hpp"
#include "blockprop/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace blockprop {

namespace {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index owns
/// its output slot, so results do not depend on the worker count.
template <typename Body>
void parallel_for(std::size_t count, int jobs, Body body) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CvResult cross_validate(const LabeledDataset& data, std::span<const std::size_t> columns, const BoostingParams& params,
                        const CvOptions& options) {
  if (!data.classification) throw DataError("cross-validation needs class labels");
  if (options.runs < 1 || options.folds < 2) throw ConfigError("cross-validation needs runs ≥ 1 and folds ≥ 2");
  if (columns.empty()) throw DataError("cross-validation needs at least one feature column");
  const std::vector<Eigen::Index> cols(columns.begin(), columns.end());
  std::vector<std::string> names;
  for (auto c : columns) names.push_back(data.matrix.manifest[c].name);

  CvResult result;
  for (int run = 0; run < options.runs; ++run) {
    const auto run_seed = derive_seed(options.seed, {0x7275ULL, static_cast<std::uint64_t>(run)});
    std::vector<std::size_t> rows(data.rows());
    if (options.undersample) rows = undersample_rows(data.labels, derive_seed(run_seed, {1}));
    else std::iota(rows.begin(), rows.end(), std::size_t{0});

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < rows.size(); ++i)
      (data.labels(static_cast<Eigen::Index>(rows[i])) > 0.5 ? pos : neg).push_back(i);
    const auto k = static_cast<std::size_t>(options.folds);
    if (pos.size() < k || neg.size() < k)
      throw DataError("cross-validation needs at least " + std::to_string(k) + " samples per class, have " +
                      std::to_string(pos.size()) + " positive / " + std::to_string(neg.size()) + " negative");

    Rng rng(derive_seed(run_seed, {2}));
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::vector<std::size_t> fold_of(rows.size());
    for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % k;
    for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % k;

    const std::vector<Eigen::Index> sample(rows.begin(), rows.end());
    const Eigen::MatrixXd X = data.matrix.values(sample, cols);
    const Eigen::VectorXd y = data.labels(sample);
    Eigen::VectorXd oof(static_cast<Eigen::Index>(rows.size()));

    parallel_for(k, options.jobs, [&](std::size_t f) {
      std::vector<Eigen::Index> train, test;
      for (std::size_t i = 0; i < rows.size(); ++i) (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
      const auto model = train_classifier(X(train, Eigen::all), y(train), params,
                                          derive_seed(run_seed, {3, static_cast<std::uint64_t>(f)}), names);
      const Eigen::VectorXd scores = predict(model, X(test, Eigen::all));
      for (std::size_t t = 0; t < test.size(); ++t) oof(test[t]) = scores(static_cast<Eigen::Index>(t));
    });
    result.run_aucs.push_back(roc_auc(oof, y));
  }
  const auto n = static_cast<double>(result.run_aucs.size());
  result.mean_auc = std::accumulate(result.run_aucs.begin(), result.run_aucs.end(), 0.0) / n;
  double ss = 0;
  for (double a : result.run_aucs) ss += (a - result.mean_auc) * (a - result.mean_auc);
  result.std_auc = std::sqrt(ss / n);
  return result;
}

CvResult cross_validate(const LabeledDataset& data, const BoostingParams& params, const CvOptions& options) {
  return cross_validate(data, data.feature_columns, params, options);
}

std::vector<BinnedPair> percentile_bins(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                        const Eigen::Ref<const Eigen::VectorXd>& y_pred, int bins) {
  const auto n = static_cast<std::size_t>(y_true.size());
  if (bins < 1) throw ConfigError("bin count must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return y_true(static_cast<Eigen::Index>(a)) < y_true(static_cast<Eigen::Index>(b));
  });
  const auto b = std::min(static_cast<std::size_t>(bins), n);
  std::vector<BinnedPair> out;
  for (std::size_t k = 0; k < b; ++k) {
    const auto lo = k * n / b, hi = (k + 1) * n / b;
    BinnedPair bp;
    for (std::size_t i = lo; i < hi; ++i) {
      bp.mean_true += y_true(static_cast<Eigen::Index>(order[i]));
      bp.mean_pred += y_pred(static_cast<Eigen::Index>(order[i]));
    }
    bp.count = hi - lo;
    bp.mean_true /= static_cast<double>(bp.count);
    bp.mean_pred /= static_cast<double>(bp.count);
    out.push_back(bp);
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t n, double train_ratio,
                                                                               std::uint64_t seed) {
  if (!(train_ratio > 0 && train_ratio < 1)) throw ConfigError("train ratio must lie in (0,1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x73706cULL}));
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

RegressionReport evaluate_predictions(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                      const Eigen::Ref<const Eigen::VectorXd>& y_pred, int bins) {
  if (y_true.size() != y_pred.size()) throw DataError("prediction and truth lengths differ");
  RegressionReport rep;
  rep.n_test = static_cast<std::size_t>(y_true.size());
  rep.y_true = y_true;
  rep.y_pred = y_pred;
  if (rep.n_test == 0) return rep;
  rep.r2 = r_squared(y_true, y_pred);
  rep.mae = mean_absolute_error(y_true, y_pred);
  std::vector<double> sorted(y_true.data(), y_true.data() + y_true.size());
  std::sort(sorted.begin(), sorted.end());
  const auto m = sorted.size();
  rep.median_true = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  rep.bins = percentile_bins(y_true, y_pred, bins);
  return rep;
}

RegressionReport evaluate_regression(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed,
                                     double train_ratio, int bins) {
  if (data.rows() < 2) throw DataError("regression evaluation needs at least two users");
  const auto [train, test] = train_test_split(data.rows(), train_ratio, seed);
  const auto train_set = data.subset(train);
  const auto test_set = data.subset(test);
  const auto model = train_regressor(train_set, params, derive_seed(seed, {0x726567ULL}));
  const Eigen::VectorXd pred = predict(model, test_set.matrix);
  auto rep = evaluate_predictions(test_set.target(), pred, bins);
  rep.model = "random_forest";
  rep.n_train = train.size();
  rep.test_users = test_set.matrix.users;
  return rep;
}

}  // namespace blockprop
