#pragma once

#include "blockprop/labeling.hpp"
#include "blockprop/tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blockprop {

/// Gradient-boosted trees with logistic loss and Newton leaf weights. Splits
/// are exact: midpoints between consecutive distinct values, ties in gain
/// resolved toward the lower feature index, then the lower threshold.
TreeEnsemble train_classifier(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                              const BoostingParams& params, std::uint64_t seed,
                              std::vector<std::string> feature_names = {});

/// Uses `data.feature_columns` as inputs.
TreeEnsemble train_classifier(const LabeledDataset& data, const BoostingParams& params, std::uint64_t seed);

/// Boosted trees with squared loss (optional second regressor).
TreeEnsemble train_boosted_regressor(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXd>& y, const BoostingParams& params,
                                     std::uint64_t seed, std::vector<std::string> feature_names = {});

/// Random forest: bootstrap rows per tree, `mtry` candidate features per split,
/// variance-reduction splits, leaves hold the in-bag mean.
TreeEnsemble train_regressor(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                             const ForestParams& params, std::uint64_t seed, std::vector<std::string> feature_names = {});

TreeEnsemble train_regressor(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed);

/// Per-round training loss (mean logistic loss) recorded while boosting; used
/// to check that every added tree does not increase training loss.
std::vector<double> boosting_loss_trace(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        const Eigen::Ref<const Eigen::VectorXd>& y, const BoostingParams& params,
                                        std::uint64_t seed);

struct CvOptions {
  int runs = 10;
  int folds = 10;
  std::uint64_t seed = 0;
  bool undersample = true;
  int jobs = 1;
};

struct CvResult {
  double mean_auc = 0;
  double std_auc = 0;  // population std over runs
  std::vector<double> run_aucs;
};

/// Each run draws a fresh undersample, splits it into label-stratified folds
/// and computes one AUC on the pooled out-of-fold scores.
CvResult cross_validate(const LabeledDataset& data, std::span<const std::size_t> columns, const BoostingParams& params,
                        const CvOptions& options);

CvResult cross_validate(const LabeledDataset& data, const BoostingParams& params, const CvOptions& options);

struct BinnedPair {
  double mean_true = 0;
  double mean_pred = 0;
  std::size_t count = 0;
};

/// Equal-count bins over the true values (sorted ascending).
std::vector<BinnedPair> percentile_bins(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                        const Eigen::Ref<const Eigen::VectorXd>& y_pred, int bins);

struct RegressionReport {
  std::string model;  // "random_forest" or an external label
  double r2 = 0;
  double mae = 0;
  double median_true = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<BinnedPair> bins;
  std::vector<std::string> test_users;
  Eigen::VectorXd y_true;
  Eigen::VectorXd y_pred;
};

/// Seeded shuffle split; returns (train rows, test rows), each sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t n, double train_ratio,
                                                                               std::uint64_t seed);

/// Scores given predictions against the truth (R², MAE, bins, median).
RegressionReport evaluate_predictions(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                      const Eigen::Ref<const Eigen::VectorXd>& y_pred, int bins);

/// Trains a random forest on a seeded split and scores it on the held-out part.
RegressionReport evaluate_regression(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed,
                                     double train_ratio = 0.8, int bins = 20);

}  // namespace blockprop
