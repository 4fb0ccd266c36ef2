#include "blockprop/error.hpp"
#include "blockprop/labeling.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <random>

using namespace blockprop;

namespace {

/// Matrix with a single Action column and targets set directly.
std::pair<FeatureMatrix, Targets> table(const std::vector<double>& raw, const std::vector<double>& posts) {
  FeatureMatrix m;
  m.manifest = default_manifest();
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(raw.size()), 81);
  Targets t;
  t.raw.resize(static_cast<Eigen::Index>(raw.size()));
  t.posts.resize(t.raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    m.users.push_back(fixture::user(static_cast<int>(i)));
    t.raw(static_cast<Eigen::Index>(i)) = raw[i];
    t.posts(static_cast<Eigen::Index>(i)) = posts[i];
    m.values(static_cast<Eigen::Index>(i), m.column("posts_created")) = posts[i];
    m.values(static_cast<Eigen::Index>(i), m.column("times_blocked")) = raw[i];
  }
  t.users = m.users;
  t.normalized = t.raw.cwiseQuotient(t.posts);
  return {m, t};
}

}  // namespace

TEST_CASE("targets from the event log") {
  std::vector<Event> ev;
  for (int i = 0; i < 10; ++i) ev.push_back(fixture::post("p" + std::to_string(i), "did:a", fixture::at(0, i), "x"));
  for (int i = 0; i < 10; ++i) ev.push_back(fixture::post("q" + std::to_string(i), "did:b", fixture::at(0, i), "x"));
  for (int i = 0; i < 5; ++i)
    ev.push_back(fixture::make("b" + std::to_string(i), EventKind::Block, EventAction::Create, fixture::user(i), fixture::at(1, i), "did:a"));
  const EventLog log(ev, {});
  const EventIndex index(log);
  const auto m = build_matrix(index, {}, {}, GraphFeatures::compute(log), default_manifest());
  const auto t = compute_targets(m, index);
  CHECK(t.raw(0) == 5);
  CHECK(t.normalized(0) == 0.5);
  CHECK(t.raw(1) == 0);
  CHECK(t.normalized(1) == 0);
  CHECK((t.normalized.cwiseProduct(t.posts) - t.raw).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quantile thresholds") {
  std::vector<double> raw(100), posts(100, 10);
  for (int i = 0; i < 100; ++i) raw[static_cast<std::size_t>(i)] = i + 1;
  auto [m, t] = table(raw, posts);
  const auto ds = threshold_labels(m, t, {TargetDefinition::Raw, 0.9});
  CHECK(ds.threshold_value == 90);
  CHECK(ds.positives() == 10);
  CHECK(std::find(ds.feature_columns.begin(), ds.feature_columns.end(), *default_manifest().index_of("times_blocked")) ==
        ds.feature_columns.end());
  CHECK(ds.feature_columns.size() == 80);

  CHECK(empirical_quantile(std::vector<double>{3, 1, 2}, 0.5) == 2);
  CHECK(empirical_quantile(std::vector<double>{1, 2, 3, 4}, 0.5) == 2);
  CHECK(empirical_quantile(std::vector<double>{1, 2, 3, 4}, 0.51) == 3);

  auto [flat_m, flat_t] = table(std::vector<double>(20, 4.0), std::vector<double>(20, 10.0));
  CHECK_THROWS_AS(threshold_labels(flat_m, flat_t, {TargetDefinition::Raw, 0.5}), DegenerateThresholdError);
}

TEST_CASE("property: labels are monotone in the quantile and the grid is covered") {
  std::mt19937_64 rng(41);
  std::negative_binomial_distribution<int> nb(1, 0.2);
  std::uniform_int_distribution<int> posts(10, 60);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> raw(300), p(300);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = nb(rng), p[i] = posts(rng);
    auto [m, t] = table(raw, p);
    for (auto def : {TargetDefinition::Raw, TargetDefinition::Normalized}) {
      Eigen::VectorXd previous = Eigen::VectorXd::Ones(300);
      for (double q : default_quantile_grid()) {
        try {
          const auto ds = threshold_labels(m, t, {def, q});
          CHECK((ds.labels.array() <= previous.array()).all());
          CHECK(ds.positives() > 0);
          previous = ds.labels;
        } catch (const DegenerateThresholdError&) {
          previous.setZero();
        }
      }
    }
  }
  CHECK(default_quantile_grid().size() == 13);
}

TEST_CASE("undersampling") {
  Eigen::VectorXd labels = Eigen::VectorXd::Zero(110);
  labels.tail(10).setOnes();
  const auto rows = undersample_rows(labels, 5);
  CHECK(rows.size() == 20);
  double pos = 0;
  for (auto r : rows) pos += labels(static_cast<Eigen::Index>(r));
  CHECK(pos == 10);
  CHECK(std::is_sorted(rows.begin(), rows.end()));
  CHECK(undersample_rows(labels, 5) == rows);
  CHECK(undersample_rows(labels, 6) != rows);

  Eigen::VectorXd balanced(6);
  balanced << 0, 1, 0, 1, 0, 1;
  CHECK(undersample_rows(balanced, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(undersample_rows(Eigen::VectorXd::Zero(5), 1), DataError);
}
