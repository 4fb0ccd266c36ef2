#pragma once

#include "blockprop/features.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace blockprop {

enum class TargetDefinition : std::uint8_t { Raw, Normalized };

std::string_view to_string(TargetDefinition d);  // "raw" / "norm"
std::optional<TargetDefinition> parse_target_definition(std::string_view s);

struct TargetSpec {
  TargetDefinition definition = TargetDefinition::Raw;
  double quantile = 0.9;  // classification only
};

/// Per-user targets aligned with FeatureMatrix rows.
struct Targets {
  std::vector<std::string> users;
  Eigen::VectorXd raw;         // block-create events received
  Eigen::VectorXd normalized;  // raw / posts_created
  Eigen::VectorXd posts;       // posts_created

  [[nodiscard]] const Eigen::VectorXd& values(TargetDefinition d) const {
    return d == TargetDefinition::Raw ? raw : normalized;
  }
};

struct LabeledDataset {
  FeatureMatrix matrix;
  Targets targets;
  TargetSpec spec;
  bool classification = true;
  Eigen::VectorXd labels;    // {0,1}; empty for regression
  double threshold_value = 0;
  std::vector<std::size_t> feature_columns;  // model inputs (manifest indices)

  [[nodiscard]] std::size_t rows() const { return matrix.users.size(); }
  [[nodiscard]] const Eigen::VectorXd& target() const { return targets.values(spec.definition); }
  [[nodiscard]] std::size_t positives() const;
  [[nodiscard]] LabeledDataset subset(std::span<const std::size_t> rows) const;
};

/// Features never used as model inputs; `times_blocked` is the raw target itself.
const std::set<std::string>& default_excluded_features();

std::vector<std::size_t> model_columns(const FeatureManifest& manifest, const std::set<std::string>& excluded);

/// Configured quantile grid: 0.1..0.9 step 0.1, then 0.95, 0.99, 0.995, 0.9995.
std::vector<double> default_quantile_grid();

Targets compute_targets(const FeatureMatrix& matrix, const EventIndex& index);

/// Inverse-ECDF order statistic: the ceil(q·n)-th smallest value (1-based).
double empirical_quantile(std::span<const double> values, double q);

/// Labels users whose target is strictly greater than the quantile value.
/// Throws DegenerateThresholdError when nobody lies above it.
LabeledDataset threshold_labels(const FeatureMatrix& matrix, const Targets& targets, TargetSpec spec,
                                const std::set<std::string>& excluded = default_excluded_features());

LabeledDataset regression_dataset(const FeatureMatrix& matrix, const Targets& targets, TargetDefinition definition,
                                  const std::set<std::string>& excluded = default_excluded_features());

/// Row indices (sorted) of a class-balanced subsample: the majority class is
/// reduced uniformly at random to the minority size.
std::vector<std::size_t> undersample_rows(const Eigen::VectorXd& labels, std::uint64_t seed);

LabeledDataset undersample_balance(const LabeledDataset& data, std::uint64_t seed);

}  // namespace blockprop
