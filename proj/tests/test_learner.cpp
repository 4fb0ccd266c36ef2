#include "blockprop/error.hpp"
#include "blockprop/learner.hpp"
#include "blockprop/metrics.hpp"
#include "blockprop/model_io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace blockprop;

namespace {

struct Toy {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Toy separable(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Toy t{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    t.X(i, 0) = z(rng);
    t.X(i, 1) = z(rng);
    t.y(i) = t.X(i, 0) + t.X(i, 1) > 0 ? 1 : 0;
  }
  return t;
}

/// Walks every tree from the root and sums leaves.
double walk(const TreeEnsemble& m, const Eigen::RowVectorXd& x) {
  double s = 0;
  for (const auto& t : m.trees) {
    int n = 0;
    while (t.feature[static_cast<std::size_t>(n)] >= 0) {
      const auto k = static_cast<std::size_t>(n);
      n = x(t.feature[k]) < t.threshold[k] ? t.left[k] : t.right[k];
    }
    s += t.value[static_cast<std::size_t>(n)];
  }
  return m.bagged() ? s / static_cast<double>(m.trees.size()) : m.base_score + s;
}

LabeledDataset dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  LabeledDataset d;
  d.matrix.values = X;
  std::vector<FeatureEntry> entries;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    entries.push_back({"f" + std::to_string(j), j == 0 ? FeatureGroup::Action : FeatureGroup::Posts, ""});
  entries.push_back({"g_dummy", FeatureGroup::Derived, ""});
  entries.push_back({"h_dummy", FeatureGroup::Domain, ""});
  entries.push_back({"i_dummy", FeatureGroup::Graph, ""});
  d.matrix.manifest = FeatureManifest(entries, "toy");
  d.matrix.values.conservativeResize(X.rows(), X.cols() + 3);
  d.matrix.values.rightCols(3).setZero();
  for (Eigen::Index i = 0; i < X.rows(); ++i) d.matrix.users.push_back("u" + std::to_string(i));
  d.labels = y;
  d.targets.users = d.matrix.users;
  d.targets.raw = y;
  d.targets.normalized = y;
  d.targets.posts = Eigen::VectorXd::Ones(X.rows());
  for (std::size_t j = 0; j < static_cast<std::size_t>(X.cols()); ++j) d.feature_columns.push_back(j);
  return d;
}

}  // namespace

TEST_CASE("roc auc") {
  CHECK(roc_auc(Eigen::Vector2d(0.9, 0.1), Eigen::Vector2d(1, 0)) == 1.0);
  CHECK(roc_auc(Eigen::VectorXd::Constant(6, 0.3), (Eigen::VectorXd(6) << 1, 0, 1, 0, 0, 1).finished()) == 0.5);
  CHECK_THROWS_AS(roc_auc(Eigen::Vector2d(0.9, 0.1), Eigen::Vector2d(1, 1)), DataError);
}

TEST_CASE("property: roc auc against the pair loop, monotone invariance and reflection") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 300)(rng);
    const int levels = std::uniform_int_distribution<int>(2, 40)(rng);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, levels)(rng) / 7.0;
      y[static_cast<std::size_t>(i)] = std::bernoulli_distribution(0.3)(rng);
    }
    y[0] = 1;
    y[1] = 0;
    Eigen::Map<Eigen::VectorXd> sv(s.data(), n);
    const Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXi>(y.data(), n).cast<double>();
    const double auc = roc_auc(sv, yv);
    CHECK(std::abs(auc - oracle::pairwise_auc(s, y)) < 1e-12);
    const Eigen::VectorXd transformed = sv.unaryExpr([](double v) { return 3 * std::exp(v) + 1; });
    CHECK(roc_auc(transformed, yv) == doctest::Approx(auc).epsilon(1e-14));
  }
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(50, 0, 1);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) y(i) = (i * 7 % 3) == 0;
  CHECK(roc_auc(s, y) + roc_auc(-s, y) == doctest::Approx(1.0));
}

TEST_CASE("regression metrics") {
  Eigen::VectorXd y(5), p(5);
  y << 1, 2, 3, 4, 5;
  p << 1, 2, 3, 4, 10;
  CHECK(mean_absolute_error(y, p) == 1.0);
  CHECK(r_squared(y, p) == -1.5);
  CHECK(r_squared(y, y) == 1.0);
  CHECK(mean_absolute_error(y, y) == 0.0);
  CHECK(r_squared(y, Eigen::VectorXd::Constant(5, 3.0)) == 0.0);
  const auto rep = evaluate_predictions(y, p, 5);
  CHECK(rep.mae == 1.0);
  CHECK(rep.r2 == -1.5);
  CHECK(rep.median_true == 3);
  CHECK(rep.bins.size() == 5);
}

TEST_CASE("boosted classifier") {
  const auto toy = separable(200, 1);
  BoostingParams p;
  p.n_estimators = 50;
  const auto m = train_classifier(toy.X, toy.y, p, 7);
  const Eigen::VectorXd prob = predict(m, toy.X);
  CHECK(roc_auc(prob, toy.y) == 1.0);
  CHECK((prob.array() > 0).all());
  CHECK((prob.array() < 1).all());
  for (Eigen::Index i = 0; i < toy.X.rows(); ++i) CHECK(predict_margin(m, toy.X)(i) == doctest::Approx(walk(m, toy.X.row(i))).epsilon(1e-12));
  CHECK(train_classifier(toy.X, toy.y, p, 7) == m);

  const auto trace = boosting_loss_trace(toy.X, toy.y, p, 7);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);

  TreeEnsemble empty;
  empty.feature_names = {"a", "b"};
  empty.base_score = 0.4;
  CHECK(predict(empty, toy.X).isApproxToConstant(sigmoid(0.4)));
  TreeEnsemble stump;
  stump.feature_names = {"a", "b"};
  stump.trees.emplace_back();
  stump.trees[0].add_leaf(0.7, 1);
  CHECK(predict(stump, toy.X).isApproxToConstant(sigmoid(0.7)));
}

TEST_CASE("model serialization round trips exactly") {
  const auto toy = separable(120, 2);
  BoostingParams p;
  p.n_estimators = 10;
  p.learning_rate = 0.3;
  const auto m = train_classifier(toy.X, toy.y, p, 1, {"a", "b"});
  CHECK(parse_model(serialize_model(m)) == m);
  ForestParams fp;
  fp.n_estimators = 5;
  const auto r = train_regressor(toy.X, toy.X.col(0), fp, 4, {"a", "b"});
  CHECK(parse_model(serialize_model(r)) == r);
  CHECK_THROWS_AS(parse_model("{\"mode\":\"nope\"}"), DataError);
}

TEST_CASE("cross validation") {
  std::mt19937_64 rng(5);
  const auto toy = separable(400, 3);
  BoostingParams p;
  p.n_estimators = 20;
  CvOptions o;
  o.runs = 3;
  o.folds = 5;
  o.seed = 9;
  const auto good = cross_validate(dataset(toy.X, toy.y), p, o);
  CHECK(good.mean_auc >= 0.95);
  CHECK(good.run_aucs.size() == 3);
  const auto again = cross_validate(dataset(toy.X, toy.y), p, o);
  CHECK(again.mean_auc == good.mean_auc);
  CHECK(again.std_auc == good.std_auc);

  Eigen::VectorXd shuffled = toy.y;
  std::shuffle(shuffled.data(), shuffled.data() + shuffled.size(), rng);
  Eigen::MatrixXd noise = Eigen::MatrixXd::NullaryExpr(400, 2, [&] { return std::normal_distribution<double>()(rng); });
  const auto chance = cross_validate(dataset(noise, shuffled), p, o);
  CHECK(chance.mean_auc >= 0.4);
  CHECK(chance.mean_auc <= 0.6);

  Eigen::VectorXd few = Eigen::VectorXd::Zero(400);
  few.head(3).setOnes();
  CHECK_THROWS_AS(cross_validate(dataset(toy.X, few), p, o), DataError);
}

TEST_CASE("random forest regressor") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  const int n = 600;
  Eigen::MatrixXd X(n, 5);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) X(i, j) = z(rng);
    y(i) = 2 * X(i, 0) + std::tanh(X(i, 1)) + 0.5 * z(rng);
  }
  ForestParams fp;
  fp.n_estimators = 60;
  fp.max_depth = 8;
  fp.mtry = 2;

  CHECK(predict(train_regressor(X, Eigen::VectorXd::Constant(n, 3.5), fp, 1), X).isApproxToConstant(3.5));
  ForestParams deep = fp;
  deep.min_samples_leaf = 1;
  deep.max_depth = 30;
  deep.mtry = 5;
  deep.bootstrap = false;
  deep.n_estimators = 3;
  CHECK(r_squared(X.col(0), predict(train_regressor(X, X.col(0), deep, 1), X)) >= 0.99);
  CHECK_THROWS_AS(train_regressor(Eigen::MatrixXd(0, 5), Eigen::VectorXd(0), fp, 1), DataError);

  const auto [train, test] = train_test_split(static_cast<std::size_t>(n), 0.8, 3);
  CHECK(train.size() == 480);
  CHECK(test.size() == 120);
  std::vector<Eigen::Index> tr(train.begin(), train.end()), te(test.begin(), test.end());
  const Eigen::MatrixXd Xtr = X(tr, Eigen::all), Xte = X(te, Eigen::all);
  const Eigen::VectorXd ytr = y(tr), yte = y(te);

  const auto model = train_regressor(Xtr, ytr, fp, 11);
  CHECK(train_regressor(Xtr, ytr, fp, 11) == model);
  const double r2 = r_squared(yte, predict(model, Xte));

  oracle::ReferenceForest ref(fp.n_estimators, fp.max_depth, fp.min_samples_leaf, fp.mtry, 99);
  ref.fit(Xtr, ytr);
  Eigen::VectorXd ref_pred(Xte.rows());
  for (Eigen::Index i = 0; i < Xte.rows(); ++i) ref_pred(i) = ref.predict(Xte.row(i));
  const double ref_r2 = r_squared(yte, ref_pred);
  CHECK(std::abs(r2 - ref_r2) <= 0.1);
  CHECK(r2 > 0.6);
}
