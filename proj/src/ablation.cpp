#include "blockprop/error.hpp"
#include "blockprop/explainer.hpp"

#include <algorithm>
#include <cmath>

namespace blockprop {

std::string_view to_string(AblationMode m) { return m == AblationMode::OnlyGroup ? "only" : "all_but"; }

const EvalRow* EvalReport::find(std::string_view experiment, std::string_view subset, double quantile) const {
  for (const auto& r : rows)
    if (r.experiment == experiment && r.subset == subset && std::abs(r.quantile - quantile) < 1e-12) return &r;
  return nullptr;
}

namespace {

EvalRow evaluate(const LabeledDataset& data, std::span<const std::size_t> columns, std::string experiment,
                 std::string subset, const BoostingParams& params, const CvOptions& options) {
  const auto cv = cross_validate(data, columns, params, options);
  return {std::string(to_string(data.spec.definition)), data.spec.quantile, std::move(experiment), std::move(subset),
          columns.size(), cv.mean_auc, cv.std_auc};
}

}  // namespace

EvalReport ablate_groups(std::span<const LabeledDataset> datasets, AblationMode mode, const BoostingParams& params,
                         const CvOptions& options, bool include_baseline) {
  EvalReport rep;
  for (const auto& data : datasets) {
    if (include_baseline) rep.rows.push_back(evaluate(data, data.feature_columns, "all", "all", params, options));
    for (auto g : kFeatureGroups) {
      std::vector<std::size_t> cols;
      for (auto c : data.feature_columns)
        if ((data.matrix.manifest[c].group == g) == (mode == AblationMode::OnlyGroup)) cols.push_back(c);
      if (cols.empty()) continue;
      rep.rows.push_back(evaluate(data, cols, std::string(to_string(mode)), std::string(to_string(g)), params, options));
    }
  }
  return rep;
}

EvalReport ablate_best_worst(const LabeledDataset& data, std::span<const std::string> ranking,
                             std::span<const std::size_t> n_grid, const BoostingParams& params,
                             const CvOptions& options) {
  std::vector<std::size_t> ranked;
  for (const auto& name : ranking) {
    const auto idx = data.matrix.manifest.index_of(name);
    if (!idx || std::find(data.feature_columns.begin(), data.feature_columns.end(), *idx) == data.feature_columns.end())
      throw DataError("ranked feature '" + name + "' is not a model input");
    ranked.push_back(*idx);
  }
  if (ranked.size() != data.feature_columns.size()) throw DataError("ranking must cover every model input");

  EvalReport rep;
  for (auto n : n_grid) {
    if (n == 0 || n > ranked.size()) throw ConfigError("best/worst n must lie in [1, " + std::to_string(ranked.size()) + "]");
    std::vector<std::size_t> top(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<std::size_t> bottom(ranked.end() - static_cast<std::ptrdiff_t>(n), ranked.end());
    std::sort(top.begin(), top.end());
    std::sort(bottom.begin(), bottom.end());
    rep.rows.push_back(evaluate(data, top, "top", std::to_string(n), params, options));
    rep.rows.push_back(evaluate(data, bottom, "bottom", std::to_string(n), params, options));
  }
  return rep;
}

}  // namespace blockprop
