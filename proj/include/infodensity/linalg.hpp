#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "infodensity/error.hpp"

namespace infodensity {

using Index = Eigen::Index;

/// Pairwise (cascade) summation. Result depends only on the order of `values`.
[[nodiscard]] inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBase = 16;
  if (values.size() <= kBase) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Pivot threshold below which a Cholesky factorization is rejected:
/// dimension * machine epsilon * largest diagonal entry.
[[nodiscard]] inline double pivot_threshold(const Eigen::MatrixXd& a) {
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  return static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * max_diag;
}

/// Cholesky factorization that enforces the pivot threshold and reports the
/// first failing pivot (zero-based) on rejection.
[[nodiscard]] inline Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& a,
                                                                 const std::string& what) {
  const double threshold = pivot_threshold(a);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto diag = llt.matrixLLT().diagonal();
    for (Index i = 0; i < diag.size(); ++i) {
      if (!(diag(i) * diag(i) > threshold)) {
        ok = false;
        break;
      }
    }
  }
  if (ok) return llt;

  // Failure path: redo the factorization by hand to locate the pivot.
  const Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) throw NotPositiveDefiniteError(static_cast<long>(j), pivot, what);
    l(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  // Eigen rejected a matrix the scalar loop accepts: report the smallest pivot.
  Index worst = 0;
  l.diagonal().minCoeff(&worst);
  throw NotPositiveDefiniteError(static_cast<long>(worst), l(worst, worst) * l(worst, worst), what);
}

/// ln|A| from its Cholesky factor, 2 * sum(ln L_ii).
[[nodiscard]] inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Largest |A - A^T| entry relative to the largest |A| entry.
[[nodiscard]] inline double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// tr(A^l) by repeated multiplication. Used as the brute-force reference for
/// the spectral and loop-enumeration paths.
[[nodiscard]] inline double trace_of_power(const Eigen::MatrixXd& a, int l) {
  if (l <= 0) return static_cast<double>(a.rows());
  Eigen::MatrixXd p = a;
  for (int k = 1; k < l; ++k) p = (p * a).eval();
  return p.trace();
}

[[nodiscard]] inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int l) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int k = 0; k < l; ++k) p = (p * a).eval();
  return p;
}

}  // namespace infodensity
