#pragma once

#include "blockprop/learner.hpp"
#include "blockprop/tree.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace blockprop {

/// Per-sample Shapley values of the model margin. For every row,
/// phi.row(i).sum() + base_value equals the margin.
struct AttributionMatrix {
  std::vector<std::string> users;          // may be empty for raw matrices
  std::vector<std::string> feature_names;  // model input order
  Eigen::MatrixXd phi;                     // samples × features
  double base_value = 0;
};

/// Path-dependent TreeSHAP. Node covers come from training unless a
/// background matrix is given, in which case they are recounted by routing its
/// rows, and base_value becomes the mean background margin.
AttributionMatrix tree_shap(const TreeEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::MatrixXd* background = nullptr);

/// Columns are taken by model feature name; DataError when the matrix or the
/// background lacks one of them or their manifests differ.
AttributionMatrix tree_shap(const TreeEnsemble& model, const FeatureMatrix& matrix,
                            const FeatureMatrix* background = nullptr);

/// Covers recounted from `background` rows (same column order as the model).
DecisionTree recount_covers(const DecisionTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& background);

/// Σ leaf value × cover / root cover.
double expected_value(const DecisionTree& tree);

struct FeatureImportance {
  std::string name;
  FeatureGroup group = FeatureGroup::Action;
  double mean_abs_phi = 0;
  std::size_t rank = 0;  // 1 = most important
};

struct GroupShare {
  FeatureGroup group = FeatureGroup::Action;
  double importance = 0;  // sum of member mean |φ|
  double share = 0;
  std::size_t members = 0;
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;  // descending; ties by manifest order
  std::vector<GroupShare> groups;           // groups with at least one attributed feature, manifest group order
  bool degenerate = false;                  // all attributions zero; shares uniform

  [[nodiscard]] std::vector<std::string> ranking() const;
};

ImportanceReport aggregate_importance(const AttributionMatrix& attr, const FeatureManifest& manifest);

struct BeeswarmRow {
  std::string feature;
  std::string sample;
  double phi = 0;
  double value = 0;
  double percentile = 0;  // mid-rank of value within the feature, in [0,1]
};

/// Rows for the top_n features by mean |φ|, feature-major then sample order.
std::vector<BeeswarmRow> beeswarm_export(const AttributionMatrix& attr, const FeatureMatrix& matrix,
                                         std::size_t top_n = 10);

struct RankedTable {
  std::string label;  // e.g. "raw@0.9"
  ImportanceReport report;
};

struct BumpRow {
  std::string feature;
  std::string label;
  std::size_t rank = 0;
};

/// Union of each table's top_k features with its rank in every table.
std::vector<BumpRow> bump_table(std::span<const RankedTable> tables, std::size_t top_k = 8);

enum class AblationMode : std::uint8_t { OnlyGroup, AllButGroup };

std::string_view to_string(AblationMode m);

struct EvalRow {
  std::string definition;
  double quantile = 0;
  std::string experiment;  // all, only, all_but, top, bottom
  std::string subset;      // group name or n
  std::size_t n_features = 0;
  double mean_auc = 0;
  double std_auc = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  [[nodiscard]] const EvalRow* find(std::string_view experiment, std::string_view subset, double quantile) const;
};

/// Per dataset: the all-features baseline (optional) plus one CV per group.
EvalReport ablate_groups(std::span<const LabeledDataset> datasets, AblationMode mode, const BoostingParams& params,
                         const CvOptions& options, bool include_baseline = true);

/// Top-n and bottom-n features of `ranking` (most important first) for each n.
EvalReport ablate_best_worst(const LabeledDataset& data, std::span<const std::string> ranking,
                             std::span<const std::size_t> n_grid, const BoostingParams& params,
                             const CvOptions& options);

}  // namespace blockprop
