#include "blockprop/error.hpp"
#include "blockprop/explainer.hpp"

#include <vector>

namespace blockprop {

namespace {

struct PathElement {
  std::int32_t feature = -1;
  double zero = 0;
  double one = 0;
  double weight = 0;
};

void extend(PathElement* path, int depth, double zero, double one, std::int32_t feature) {
  path[depth] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one * path[i].weight * (i + 1) / (depth + 1);
    path[i].weight = zero * path[i].weight * (depth - i) / (depth + 1);
  }
}

void unwind(PathElement* path, int depth, int idx) {
  const double one = path[idx].one, zero = path[idx].zero;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].weight * zero * (depth - i) / (depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = idx; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero = path[i + 1].zero;
    path[i].one = path[i + 1].one;
  }
}

double unwound_sum(const PathElement* path, int depth, int idx) {
  const double one = path[idx].one, zero = path[idx].zero;
  double next = path[depth].weight, total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * (depth - i) / (depth + 1);
    } else {
      total += path[i].weight / zero * (depth + 1) / (depth - i);
    }
  }
  return total;
}

template <typename Row>
class ShapWalker {
 public:
  ShapWalker(const DecisionTree& tree, const Row& x, double scale, double* phi)
      : tree_(tree), x_(x), scale_(scale), phi_(phi) {
    const auto d = static_cast<std::size_t>(tree.depth()) + 2;
    arena_.resize(d * (d + 1) / 2 + d);
  }

  void run() { recurse(0, arena_.data(), 0, 1, 1, -1); }

 private:
  // `path` holds depth+1 elements of the parent; the child copy starts after it.
  void recurse(std::size_t node, PathElement* parent, int depth, double zero, double one, std::int32_t feature) {
    PathElement* path = parent + depth;
    std::copy(parent, parent + depth, path);
    extend(path, depth, zero, one, feature);

    if (tree_.is_leaf(node)) {
      const double v = tree_.value[node] * scale_;
      for (int i = 1; i <= depth; ++i)
        phi_[path[i].feature] += unwound_sum(path, depth, i) * (path[i].one - path[i].zero) * v;
      return;
    }
    const auto f = tree_.feature[node];
    const bool go_left = x_(f) < tree_.threshold[node];
    const auto hot = static_cast<std::size_t>(go_left ? tree_.left[node] : tree_.right[node]);
    const auto cold = static_cast<std::size_t>(go_left ? tree_.right[node] : tree_.left[node]);

    double in_zero = 1, in_one = 1;
    for (int k = 1; k <= depth; ++k)
      if (path[k].feature == f) {
        in_zero = path[k].zero;
        in_one = path[k].one;
        unwind(path, depth, k);
        --depth;
        break;
      }
    const double c = tree_.cover[node];
    const double hot_zero = c > 0 ? tree_.cover[hot] / c * in_zero : 0;
    const double cold_zero = c > 0 ? tree_.cover[cold] / c * in_zero : 0;
    // A branch with both fractions zero contributes nothing.
    if (hot_zero != 0 || in_one != 0) recurse(hot, path, depth + 1, hot_zero, in_one, f);
    if (cold_zero != 0) recurse(cold, path, depth + 1, cold_zero, 0, f);
  }

  const DecisionTree& tree_;
  const Row& x_;
  double scale_;
  double* phi_;
  std::vector<PathElement> arena_;
};

}  // namespace

DecisionTree recount_covers(const DecisionTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& background) {
  DecisionTree out = tree;
  out.cover.assign(tree.size(), 0.0);
  for (Eigen::Index r = 0; r < background.rows(); ++r) {
    std::size_t i = 0;
    out.cover[0] += 1;
    while (!out.is_leaf(i)) {
      i = static_cast<std::size_t>(background(r, out.feature[i]) < out.threshold[i] ? out.left[i] : out.right[i]);
      out.cover[i] += 1;
    }
  }
  return out;
}

double expected_value(const DecisionTree& tree) {
  if (tree.size() == 0 || tree.cover[0] <= 0) return 0;
  double s = 0;
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (tree.is_leaf(i)) s += tree.value[i] * tree.cover[i];
  return s / tree.cover[0];
}

AttributionMatrix tree_shap(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::MatrixXd* background) {
  const auto p = static_cast<Eigen::Index>(model.feature_names.size());
  if (X.cols() != p) throw DataError("attribution input has " + std::to_string(X.cols()) + " columns, model expects " +
                                     std::to_string(p));
  if (background && background->cols() != p) throw DataError("background columns do not match the model");
  if (background && background->rows() == 0) throw DataError("background set is empty");

  AttributionMatrix out;
  out.feature_names = model.feature_names;
  out.phi = Eigen::MatrixXd::Zero(X.rows(), p);
  const double scale = model.bagged() && !model.trees.empty() ? 1.0 / static_cast<double>(model.trees.size()) : 1.0;
  double base = model.bagged() && !model.trees.empty() ? 0.0 : model.base_score;

  // Row-major scratch keeps each sample's φ contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi =
      Eigen::MatrixXd::Zero(X.rows(), p);
  for (const auto& original : model.trees) {
    const DecisionTree tree = background ? recount_covers(original, *background) : original;
    base += expected_value(tree) * scale;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const auto row = X.row(r);
      ShapWalker<decltype(row)> walker(tree, row, scale, phi.row(r).data());
      walker.run();
    }
  }
  out.phi = phi;
  out.base_value = base;
  return out;
}

AttributionMatrix tree_shap(const TreeEnsemble& model, const FeatureMatrix& matrix, const FeatureMatrix* background) {
  if (background && !(background->manifest == matrix.manifest))
    throw DataError("background manifest differs from the explained matrix");
  const Eigen::MatrixXd X = model_inputs(model, matrix);
  AttributionMatrix out;
  if (background) {
    const Eigen::MatrixXd B = model_inputs(model, *background);
    out = tree_shap(model, X, &B);
  } else {
    out = tree_shap(model, X, nullptr);
  }
  out.users = matrix.users;
  return out;
}

}  // namespace blockprop
