#pragma once

#include "blockprop/explainer.hpp"
#include "blockprop/features.hpp"
#include "blockprop/labeling.hpp"
#include "blockprop/synth.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace blockprop {

/// Flat key/value run configuration. Every key has a default; unknown keys
/// are rejected.
class RunConfig {
 public:
  RunConfig();

  /// `key = value` lines; '#' starts a comment.
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  [[nodiscard]] const std::string& get(const std::string& key) const;
  [[nodiscard]] bool is_set(const std::string& key) const { return !get(key).empty(); }

  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] int integer(const std::string& key) const;
  [[nodiscard]] std::uint64_t seed() const;
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> list(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;

  /// Sorted `key=value` lines, without `jobs` and `out`.
  [[nodiscard]] std::string canonical() const;
  /// FNV-1a 64 of canonical(), hex.
  [[nodiscard]] std::string hash() const;

  [[nodiscard]] std::string out_dir() const { return get("out"); }
  [[nodiscard]] std::vector<TargetDefinition> definitions() const;
  [[nodiscard]] BoostingParams boosting() const;
  [[nodiscard]] ForestParams forest() const;
  [[nodiscard]] CvOptions cv() const;
  [[nodiscard]] ScenarioConfig scenario() const;
  [[nodiscard]] TimeWindow window() const;
  [[nodiscard]] UserFilter filter() const;
  [[nodiscard]] FeatureManifest manifest() const;
  [[nodiscard]] std::set<std::string> excluded() const;

  /// Checks value syntax and that configured input paths exist.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Subcommands in pipeline order.
const std::vector<std::string>& command_names();

/// Runs one subcommand; "run-all" chains ingest..report. Throws ConfigError,
/// DependencyError or DataError.
void run_command(const std::string& name, const RunConfig& config);

void cmd_synth(const RunConfig& config);
void cmd_ingest(const RunConfig& config);
void cmd_features(const RunConfig& config);
void cmd_label(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_explain(const RunConfig& config);
void cmd_ablate(const RunConfig& config);
void cmd_regress(const RunConfig& config);
void cmd_report(const RunConfig& config);

/// Process exit status for an exception thrown by run_command.
int exit_code_for(const std::exception& e);

/// Labeled table written by `label`, read back as datasets.
struct LabeledTable {
  FeatureMatrix matrix;
  Targets targets;
  std::map<std::string, Eigen::VectorXd> labels;  // column name -> {0,1}
  std::map<std::string, double> thresholds;       // column name -> threshold value
};

std::string label_column(TargetDefinition d, double q);
LabeledTable load_labeled(const RunConfig& config);
LabeledDataset dataset_for(const LabeledTable& table, TargetDefinition d, double q, const std::set<std::string>& excluded);

}  // namespace blockprop
