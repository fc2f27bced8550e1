#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/info_measures.hpp"
#include "infodensity/model.hpp"

namespace infodensity {

/// N = 2 view of a GaussianModel with its blocks and both regression
/// matrices cached. Gamma_{1|2} = Sigma_12 Sigma_22^{-1}, Gamma_{2|1} = Sigma_21 Sigma_11^{-1}.
class TwoBlockModel {
 public:
  explicit TwoBlockModel(GaussianModel model) : model_(std::move(model)) {
    if (model_.block_count() != 2) {
      throw Error(ErrorCode::BadPartition, "two-block operations need exactly 2 blocks, got " +
                                               std::to_string(model_.block_count()));
    }
    s11_ = model_.block(0, 0);
    s12_ = model_.block(0, 1);
    s21_ = s12_.transpose();
    s22_ = model_.block(1, 1);
    g12_ = regression_block(model_, 0, 1);
    g21_ = regression_block(model_, 1, 0);
  }

  [[nodiscard]] const GaussianModel& model() const noexcept { return model_; }
  [[nodiscard]] const Eigen::MatrixXd& sigma11() const noexcept { return s11_; }
  [[nodiscard]] const Eigen::MatrixXd& sigma12() const noexcept { return s12_; }
  [[nodiscard]] const Eigen::MatrixXd& sigma21() const noexcept { return s21_; }
  [[nodiscard]] const Eigen::MatrixXd& sigma22() const noexcept { return s22_; }
  [[nodiscard]] const Eigen::MatrixXd& gamma12() const noexcept { return g12_; }
  [[nodiscard]] const Eigen::MatrixXd& gamma21() const noexcept { return g21_; }

  /// chi_l = Gamma_{1|2} Gamma_{2|1} ... (l alternating factors, Gamma_{1|2} first).
  [[nodiscard]] Eigen::MatrixXd chi(int l) const { return alternating_product(g12_, g21_, l); }
  /// upsilon_l = Gamma_{2|1} Gamma_{1|2} ... (l alternating factors, Gamma_{2|1} first).
  [[nodiscard]] Eigen::MatrixXd upsilon(int l) const { return alternating_product(g21_, g12_, l); }

 private:
  static Eigen::MatrixXd alternating_product(const Eigen::MatrixXd& first, const Eigen::MatrixXd& second,
                                             int l) {
    if (l < 1) throw Error(ErrorCode::InvalidParameter, "product length must be >= 1");
    // Build from the right: the last factor is `first` when l is odd.
    Eigen::MatrixXd p = (l % 2 == 1) ? first : second;
    for (int k = l - 2; k >= 0; --k) p = ((k % 2 == 0) ? first : second) * p;
    return p;
  }

  GaussianModel model_;
  Eigen::MatrixXd s11_, s12_, s21_, s22_, g12_, g21_;
};

/// tr(Gamma^l) for N = 2: zero for odd l, 2 tr[(Gamma_{1|2} Gamma_{2|1})^{l/2}] for even l.
[[nodiscard]] inline double two_block_trace(const TwoBlockModel& model, int l) {
  if (l < 1) throw Error(ErrorCode::InvalidParameter, "trace order must be >= 1");
  if (l % 2 == 1) return 0.0;
  const Eigen::MatrixXd g = model.gamma12() * model.gamma21();
  return 2.0 * trace_of_power(g, l / 2);
}

/// Squared canonical correlations r_1^2 >= ... >= r_k^2, k = min(n_1, n_2).
struct CanonicalSpectrum {
  std::vector<double> squared;

  [[nodiscard]] double sum() const { return pairwise_sum(squared); }
};

inline constexpr double kCanonicalClampThreshold = 1e-12;

/// Eigenvalues of L^{-1} Sigma_12 Sigma_22^{-1} Sigma_21 L^{-T} with L the
/// Cholesky factor of Sigma_11 (similar to Sigma_11^{-1} Sigma_12 Sigma_22^{-1} Sigma_21).
[[nodiscard]] inline CanonicalSpectrum canonical_correlations(const TwoBlockModel& model) {
  const auto& llt11 = model.model().block_cholesky(0);
  const auto& llt22 = model.model().block_cholesky(1);
  const Eigen::MatrixXd a = llt11.matrixL().solve(model.sigma12());  // L^{-1} Sigma_12
  Eigen::MatrixXd m = a * llt22.solve(a.transpose());
  m = (0.5 * (m + m.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);

  std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  for (double& v : values) {
    if (v < kCanonicalClampThreshold) v = 0.0;
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::min(model.sigma11().rows(), model.sigma22().rows()));
  values.resize(k);
  return {std::move(values)};
}

/// Squared multiple correlation of the scalar first block on the second block.
[[nodiscard]] inline double multiple_correlation(const TwoBlockModel& model) {
  if (model.sigma11().rows() != 1) {
    throw Error(ErrorCode::BlockNotScalar, "multiple correlation needs a 1-dimensional first block");
  }
  const Eigen::MatrixXd s12 = model.sigma12();
  const double explained = (s12 * model.model().block_cholesky(1).solve(s12.transpose()))(0, 0);
  return explained / model.sigma11()(0, 0);
}

/// CGF of i_d for two scalar variables with correlation rho:
/// -(t/2) ln(1 - rho^2) - 1/2 ln(1 - t^2 rho^2).
[[nodiscard]] inline double scalar_pair_cgf(double rho, double t) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "|rho| must be < 1, got " + std::to_string(rho));
  }
  const double r2 = rho * rho;
  if (r2 > 0.0) {
    const double bound = 1.0 / std::abs(rho);
    if (!(std::abs(t) < bound)) throw OutOfDomainError(t, -bound, bound);
  }
  return -0.5 * t * std::log1p(-r2) - 0.5 * std::log1p(-t * t * r2);
}

}  // namespace infodensity
