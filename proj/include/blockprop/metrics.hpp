#pragma once

#include "blockprop/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace blockprop {

/// Mann–Whitney U / (n_pos · n_neg) with tied scores contributing ½.
template <typename Scores, typename Labels>
double roc_auc(const Eigen::DenseBase<Scores>& scores, const Eigen::DenseBase<Labels>& labels) {
  const Eigen::Index n = scores.size();
  if (labels.size() != n) throw DataError("roc_auc: scores and labels differ in length");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });

  double pos_rank_sum = 0;
  double n_pos = 0;
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j < n && scores(order[j]) == scores(order[i])) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (Eigen::Index k = i; k < j; ++k) {
      if (labels(order[k]) > 0.5) {
        pos_rank_sum += midrank;
        n_pos += 1;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc needs both classes present");
  return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg);
}

/// 1 − SS_res / SS_tot.
template <typename A, typename B>
double r_squared(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_hat) {
  const double mean = y.mean();
  const double ss_res = (y - y_hat).squaredNorm();
  const double ss_tot = (y.array() - mean).matrix().squaredNorm();
  if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

template <typename A, typename B>
double mean_absolute_error(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_hat) {
  if (y.size() == 0) return 0.0;
  return (y - y_hat).cwiseAbs().mean();
}

template <typename A, typename B>
double pearson(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  const auto xc = (x.array() - x.mean());
  const auto yc = (y.array() - y.mean());
  const double den = std::sqrt((xc * xc).sum() * (yc * yc).sum());
  return den == 0 ? 0.0 : (xc * yc).sum() / den;
}

/// 1-based ranks with ties sharing their mean rank.
template <typename A>
Eigen::VectorXd midranks(const Eigen::MatrixBase<A>& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j < n && x(order[j]) == x(order[i])) ++j;
    for (Eigen::Index k = i; k < j; ++k) r(order[k]) = 0.5 * static_cast<double>(i + 1 + j);
    i = j;
  }
  return r;
}

template <typename A, typename B>
double spearman(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  return pearson(midranks(x), midranks(y));
}

}  // namespace blockprop
