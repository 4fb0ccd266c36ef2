#include "blockprop/tree.hpp"

#include "blockprop/error.hpp"

#include <algorithm>
#include <functional>

namespace blockprop {

int DecisionTree::depth() const {
  if (feature.empty()) return 0;
  std::function<int(std::size_t)> walk = [&](std::size_t i) -> int {
    if (feature[i] < 0) return 0;
    return 1 + std::max(walk(static_cast<std::size_t>(left[i])), walk(static_cast<std::size_t>(right[i])));
  };
  return walk(0);
}

std::int32_t DecisionTree::add_leaf(double v, double c) {
  feature.push_back(-1);
  threshold.push_back(0);
  left.push_back(-1);
  right.push_back(-1);
  value.push_back(v);
  cover.push_back(c);
  return static_cast<std::int32_t>(feature.size() - 1);
}

std::string_view to_string(EnsembleMode m) {
  switch (m) {
    case EnsembleMode::BoostedClassifier: return "boosted_classifier";
    case EnsembleMode::BoostedRegressor: return "boosted_regressor";
    case EnsembleMode::BaggedRegressor: return "bagged_regressor";
  }
  return "";
}

std::optional<EnsembleMode> parse_ensemble_mode(std::string_view s) {
  for (auto m : {EnsembleMode::BoostedClassifier, EnsembleMode::BoostedRegressor, EnsembleMode::BaggedRegressor})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Eigen::VectorXd predict_margin(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (static_cast<std::size_t>(X.cols()) != model.feature_names.size())
    throw DataError("input has " + std::to_string(X.cols()) + " columns, model expects " +
                    std::to_string(model.feature_names.size()));
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = model.margin(X.row(r));
  return out;
}

Eigen::VectorXd predict(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  Eigen::VectorXd m = predict_margin(model, X);
  if (model.mode == EnsembleMode::BoostedClassifier) m = m.unaryExpr([](double v) { return sigmoid(v); });
  return m;
}

Eigen::MatrixXd model_inputs(const TreeEnsemble& model, const FeatureMatrix& matrix) {
  std::vector<Eigen::Index> cols;
  cols.reserve(model.feature_names.size());
  for (const auto& name : model.feature_names) {
    auto idx = matrix.manifest.index_of(name);
    if (!idx) throw DataError("matrix lacks model feature '" + name + "'");
    cols.push_back(static_cast<Eigen::Index>(*idx));
  }
  return matrix.values(Eigen::all, cols);
}

Eigen::VectorXd predict(const TreeEnsemble& model, const FeatureMatrix& matrix) {
  return predict(model, model_inputs(model, matrix));
}

}  // namespace blockprop
