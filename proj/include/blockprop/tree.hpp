#pragma once

#include "blockprop/features.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blockprop {

/// Flattened binary tree. Node 0 is the root; `feature[i] < 0` marks a leaf.
/// Rows with x[feature] < threshold go left.
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> value;  // leaf output; internal nodes keep their would-be leaf value
  std::vector<double> cover;  // training weight reaching the node

  [[nodiscard]] std::size_t size() const { return feature.size(); }
  [[nodiscard]] bool is_leaf(std::size_t i) const { return feature[i] < 0; }
  [[nodiscard]] int depth() const;

  template <typename Row>
  [[nodiscard]] double predict(const Row& x) const {
    std::size_t i = 0;
    while (feature[i] >= 0) i = static_cast<std::size_t>(x(feature[i]) < threshold[i] ? left[i] : right[i]);
    return value[i];
  }

  /// Appends a leaf and returns its index.
  std::int32_t add_leaf(double v, double c);
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

enum class EnsembleMode : std::uint8_t { BoostedClassifier, BoostedRegressor, BaggedRegressor };

std::string_view to_string(EnsembleMode m);
std::optional<EnsembleMode> parse_ensemble_mode(std::string_view s);

struct BoostingParams {
  int n_estimators = 500;
  int max_depth = 6;
  double learning_rate = 0.1;
  double subsample = 1.0;
  double min_child_weight = 1.0;
  double lambda = 1.0;  // L2 on leaf weights
  double gamma = 0.0;   // minimum loss reduction
  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

struct ForestParams {
  int n_estimators = 500;
  int max_depth = 12;
  int min_samples_leaf = 5;
  int mtry = 0;  // features tried per split; 0 = floor(sqrt(p))
  bool bootstrap = true;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Margin = base_score + Σ trees (boosted) or mean of trees (bagged).
/// Classifier scores are sigmoid(margin).
struct TreeEnsemble {
  EnsembleMode mode = EnsembleMode::BoostedClassifier;
  double base_score = 0;
  std::vector<DecisionTree> trees;
  std::vector<std::string> feature_names;  // column order expected by predict
  BoostingParams boosting;
  ForestParams forest;
  std::uint64_t seed = 0;

  [[nodiscard]] bool bagged() const { return mode == EnsembleMode::BaggedRegressor; }

  template <typename Row>
  [[nodiscard]] double margin(const Row& x) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    if (bagged()) return trees.empty() ? base_score : s / static_cast<double>(trees.size());
    return base_score + s;
  }
  friend bool operator==(const TreeEnsemble&, const TreeEnsemble&) = default;
};

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

Eigen::VectorXd predict_margin(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Probabilities for classifiers, values for regressors. X columns must be in
/// `model.feature_names` order.
Eigen::VectorXd predict(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Selects the model's columns from the matrix by name; DataError on mismatch.
Eigen::VectorXd predict(const TreeEnsemble& model, const FeatureMatrix& matrix);
Eigen::MatrixXd model_inputs(const TreeEnsemble& model, const FeatureMatrix& matrix);

}  // namespace blockprop
