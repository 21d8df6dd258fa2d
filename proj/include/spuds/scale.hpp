// Data-driven scaling parameter: sigma = s(X) * n^(-1/(2d+3)), with s the
// square root of the mean of the top d' covariance eigenvalues and d' the
// Kaiser estimate of intrinsic dimension (capped at 20).
#pragma once

#include <cmath>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"

namespace spuds {

struct ScaleReport {
  int intrinsic_dim = 0;
  double s_value = 0.0;
  double sigma = 0.0;
  std::vector<double> covariance_eigenvalues;  // length d, descending
  std::vector<int> constant_features;          // excluded from the correlation matrix
};

namespace detail {

inline Eigen::MatrixXd covariance_matrix(const DataMatrix& X) {
  const Eigen::Index n = X.n();
  RowMatrixXd centered = X.values;
  const Eigen::RowVectorXd mean = X.values.colwise().mean();
  centered.rowwise() -= mean;
  return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

// Constant features are detected on the raw column (max == min), which is
// exact where a variance test is not.
inline std::vector<int> find_constant_features(const DataMatrix& X) {
  std::vector<int> constant;
  for (Eigen::Index j = 0; j < X.dim(); ++j)
    if (X.values.col(j).maxCoeff() == X.values.col(j).minCoeff())
      constant.push_back(static_cast<int>(j));
  return constant;
}

}  // namespace detail

// Count of correlation-matrix eigenvalues >= 1, clamped to [1, min(d, 20)].
// Zero-variance features are excluded from the correlation matrix; if every
// feature is constant the criterion is undefined.
inline int kaiser_intrinsic_dim(const DataMatrix& X) {
  if (X.n() < 2) throw EmptyData("kaiser_intrinsic_dim requires n >= 2");
  const std::vector<int> constant = detail::find_constant_features(X);
  const Eigen::Index d = X.dim();
  const Eigen::Index d_eff = d - static_cast<Eigen::Index>(constant.size());
  if (d_eff == 0) throw DegenerateData("all features are constant");

  DataMatrix reduced;
  if (constant.empty()) {
    reduced.values = X.values;
  } else {
    reduced.values.resize(X.n(), d_eff);
    Eigen::Index out = 0;
    std::size_t ci = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (ci < constant.size() && constant[ci] == static_cast<int>(j)) { ++ci; continue; }
      reduced.values.col(out++) = X.values.col(j);
    }
  }

  Eigen::MatrixXd corr = detail::covariance_matrix(reduced);
  for (Eigen::Index i = 0; i < corr.rows(); ++i)
    for (Eigen::Index j = 0; j < corr.cols(); ++j)
      if (i != j) corr(i, j) /= std::sqrt(corr(i, i) * corr(j, j));
  corr.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr, Eigen::EigenvaluesOnly);
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] >= 1.0) ++count;

  count = std::min(count, 20);
  count = std::min<int>(count, static_cast<int>(d));
  return std::max(count, 1);
}

inline ScaleReport compute_sigma(const DataMatrix& X) {
  if (X.n() < 2) throw EmptyData("compute_sigma requires n >= 2");
  ScaleReport report;
  report.constant_features = detail::find_constant_features(X);
  report.intrinsic_dim = kaiser_intrinsic_dim(X);

  const Eigen::MatrixXd cov = detail::covariance_matrix(X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  report.covariance_eigenvalues.assign(es.eigenvalues().data(),
                                       es.eigenvalues().data() + es.eigenvalues().size());
  std::reverse(report.covariance_eigenvalues.begin(), report.covariance_eigenvalues.end());

  double top_sum = 0.0;
  for (int i = 0; i < report.intrinsic_dim; ++i) top_sum += report.covariance_eigenvalues[i];
  report.s_value = std::sqrt(top_sum / report.intrinsic_dim);

  const double n = static_cast<double>(X.n());
  const double d = static_cast<double>(X.dim());  // ambient dimension in the exponent
  report.sigma = report.s_value * std::pow(n, -1.0 / (2.0 * d + 3.0));
  return report;
}

}  // namespace spuds
