#include "blockprop/model_io.hpp"

#include "blockprop/error.hpp"
#include "blockprop/io.hpp"

#include <json.hpp>

namespace blockprop {

using nlohmann::ordered_json;

std::string serialize_model(const TreeEnsemble& model) {
  ordered_json j;
  j["format"] = "blockprop-tree-ensemble";
  j["version"] = 1;
  j["mode"] = to_string(model.mode);
  j["base_score"] = model.base_score;
  j["seed"] = model.seed;
  j["feature_names"] = model.feature_names;
  j["boosting"] = {{"n_estimators", model.boosting.n_estimators}, {"max_depth", model.boosting.max_depth},
                   {"learning_rate", model.boosting.learning_rate}, {"subsample", model.boosting.subsample},
                   {"min_child_weight", model.boosting.min_child_weight}, {"lambda", model.boosting.lambda},
                   {"gamma", model.boosting.gamma}};
  j["forest"] = {{"n_estimators", model.forest.n_estimators}, {"max_depth", model.forest.max_depth},
                 {"min_samples_leaf", model.forest.min_samples_leaf}, {"mtry", model.forest.mtry},
                 {"bootstrap", model.forest.bootstrap}};
  auto trees = ordered_json::array();
  for (const auto& t : model.trees) {
    trees.push_back({{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left},
                     {"right", t.right}, {"value", t.value}, {"cover", t.cover}});
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

TreeEnsemble parse_model(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.at("format") != "blockprop-tree-ensemble") throw DataError("not a tree-ensemble document");
    TreeEnsemble m;
    auto mode = parse_ensemble_mode(j.at("mode").get<std::string>());
    if (!mode) throw DataError("unknown ensemble mode");
    m.mode = *mode;
    m.base_score = j.at("base_score").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& b = j.at("boosting");
    m.boosting = {b.at("n_estimators"), b.at("max_depth"), b.at("learning_rate"), b.at("subsample"),
                  b.at("min_child_weight"), b.at("lambda"), b.at("gamma")};
    const auto& f = j.at("forest");
    m.forest = {f.at("n_estimators"), f.at("max_depth"), f.at("min_samples_leaf"), f.at("mtry"), f.at("bootstrap")};
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      tree.feature = t.at("feature").get<std::vector<std::int32_t>>();
      tree.threshold = t.at("threshold").get<std::vector<double>>();
      tree.left = t.at("left").get<std::vector<std::int32_t>>();
      tree.right = t.at("right").get<std::vector<std::int32_t>>();
      tree.value = t.at("value").get<std::vector<double>>();
      tree.cover = t.at("cover").get<std::vector<double>>();
      const auto n = tree.feature.size();
      if (n == 0 || tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
          tree.value.size() != n || tree.cover.size() != n)
        throw DataError("tree node arrays have inconsistent lengths");
      for (std::size_t i = 0; i < n; ++i) {
        if (tree.feature[i] < 0) continue;
        if (static_cast<std::size_t>(tree.feature[i]) >= m.feature_names.size() || tree.left[i] <= static_cast<std::int32_t>(i) ||
            tree.right[i] <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(tree.left[i]) >= n ||
            static_cast<std::size_t>(tree.right[i]) >= n)
          throw DataError("tree node " + std::to_string(i) + " references an invalid child or feature");
      }
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
}

void save_model(const TreeEnsemble& model, const std::string& path) { write_file_atomic(path, serialize_model(model)); }

TreeEnsemble load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace blockprop
