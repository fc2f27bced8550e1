#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/info_measures.hpp"
#include "infodensity/model.hpp"

namespace infodensity {

/// Unit-diagonal correlation matrix with constant off-diagonal rho, scalar
/// partition. Valid for -1/(d-1) < rho < 1.
class HomogeneousModel {
 public:
  HomogeneousModel(Index d, double rho) : d_(d), rho_(rho) {
    if (d < 2) throw Error(ErrorCode::InvalidParameter, "homogeneous model needs d >= 2");
    const double lower = -1.0 / static_cast<double>(d - 1);
    if (!(rho > lower && rho < 1.0)) {
      throw Error(ErrorCode::InvalidParameter, "rho = " + std::to_string(rho) + " is outside (" +
                                                   std::to_string(lower) + ", 1) for d = " +
                                                   std::to_string(d));
    }
  }

  [[nodiscard]] Index dimension() const noexcept { return d_; }
  [[nodiscard]] double rho() const noexcept { return rho_; }

 private:
  Index d_;
  double rho_;
};

/// The raw d x d matrix, without any validity check.
[[nodiscard]] inline Eigen::MatrixXd homogeneous_matrix(Index d, double rho) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(d, d, rho);
  r.diagonal().setOnes();
  return r;
}

[[nodiscard]] inline GaussianModel homogeneous_covariance(const HomogeneousModel& hm) {
  const Index d = hm.dimension();
  return validate_model(Eigen::VectorXd::Zero(d), homogeneous_matrix(d, hm.rho()),
                        Partition::scalar(d).block_sizes());
}

/// E(i_d) = -1/2 { (d-1) ln(1-rho) + ln[1+(d-1)rho] }.
[[nodiscard]] inline double homogeneous_mean(const HomogeneousModel& hm) {
  const double m = static_cast<double>(hm.dimension() - 1);
  return -0.5 * (m * std::log1p(-hm.rho()) + std::log1p(m * hm.rho()));
}

namespace detail {

/// Signed log-magnitude of kappa_l = (l-1)!/2 rho^l [(d-1)^l + (-1)^l (d-1)].
struct SignedLog {
  double log_mag = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

[[nodiscard]] inline SignedLog homogeneous_cumulant_log(Index d, double rho, int l) {
  const double m = static_cast<double>(d - 1);
  if (rho == 0.0) return {};
  // bracket = m [m^{l-1} + (-1)^l] = m^l [1 + (-1)^l m^{1-l}]
  const double correction = ((l % 2 == 0) ? 1.0 : -1.0) * std::exp((1 - l) * std::log(m));
  if (correction == -1.0) return {};  // d = 2, odd l
  const double log_bracket = l * std::log(m) + std::log1p(correction);
  SignedLog out;
  out.log_mag = std::lgamma(static_cast<double>(l)) - std::numbers::ln2 + l * std::log(std::abs(rho)) + log_bracket;
  out.sign = (rho < 0.0 && l % 2 == 1) ? -1 : 1;
  return out;
}

}  // namespace detail

/// Closed-form kappa_l for l >= 2, evaluated in log space with sign tracking.
[[nodiscard]] inline double homogeneous_cumulant(const HomogeneousModel& hm, int l) {
  if (l < 2) throw Error(ErrorCode::InvalidParameter, "closed-form cumulant needs l >= 2");
  const auto v = detail::homogeneous_cumulant_log(hm.dimension(), hm.rho(), l);
  if (v.sign == 0) return 0.0;
  if (v.log_mag > std::log(std::numeric_limits<double>::max())) throw OverflowError(l);
  return v.sign * std::exp(v.log_mag);
}

/// Gamma^l = rho^l [ (-1)^l I + ((d-1)^l - (-1)^l)/d U ], U the all-ones matrix.
[[nodiscard]] inline Eigen::MatrixXd homogeneous_gamma_power(const HomogeneousModel& hm, int l) {
  if (l < 1) throw Error(ErrorCode::InvalidParameter, "power must be >= 1");
  const Index d = hm.dimension();
  const double dd = static_cast<double>(d);
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;
  const double rl = std::pow(hm.rho(), l);
  const double u_coeff = rl * (std::pow(dd - 1.0, l) - sign) / dd;
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(d, d, u_coeff);
  g.diagonal().array() += rl * sign;
  return g;
}

/// kappa_l / kappa_2^{l/2}, the l-th cumulant of the standardized density.
[[nodiscard]] inline double standardized_cumulant(const HomogeneousModel& hm, int l) {
  if (hm.rho() == 0.0) throw Error(ErrorCode::ZeroVariance, "rho = 0 gives Var(i_d) = 0");
  if (l < 2) throw Error(ErrorCode::InvalidParameter, "standardized cumulant needs l >= 2");
  if (l == 2) return 1.0;
  const auto num = detail::homogeneous_cumulant_log(hm.dimension(), hm.rho(), l);
  if (num.sign == 0) return 0.0;
  const auto den = detail::homogeneous_cumulant_log(hm.dimension(), hm.rho(), 2);
  return num.sign * std::exp(num.log_mag - 0.5 * l * den.log_mag);
}

/// Large-d limit of the standardized cumulant, 2^{l/2-1} (l-1)!.
[[nodiscard]] inline double standardized_cumulant_limit(int l) {
  return std::exp((0.5 * l - 1.0) * std::numbers::ln2 + std::lgamma(static_cast<double>(l)));
}

struct NormalityRow {
  int order;
  double standardized;
  double limit;
};

/// Rows l = 3..max_order. Nonzero limits mean i_d is not asymptotically normal.
[[nodiscard]] inline std::vector<NormalityRow> normality_diagnostic(const HomogeneousModel& hm, int max_order) {
  if (max_order < 3) throw Error(ErrorCode::InvalidParameter, "max order must be >= 3");
  std::vector<NormalityRow> rows;
  for (int l = 3; l <= max_order; ++l) {
    rows.push_back({l, standardized_cumulant(hm, l), standardized_cumulant_limit(l)});
  }
  return rows;
}

}  // namespace infodensity
