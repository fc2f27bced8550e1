#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/linalg.hpp"
#include "infodensity/model.hpp"

namespace infodensity {

/// kappa_1..kappa_L of the multiinformation density, in nats^l.
struct CumulantSequence {
  std::vector<double> values;

  [[nodiscard]] int order() const noexcept { return static_cast<int>(values.size()); }
  /// One-based access: at(1) is the mean.
  [[nodiscard]] double at(int l) const { return values.at(static_cast<std::size_t>(l - 1)); }
};

/// Open interval (lower, upper) of t on which the CGF is finite.
struct CgfDomain {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool contains(double t) const noexcept { return t > lower && t < upper; }
  [[nodiscard]] double half_width() const noexcept { return std::min(-lower, upper); }
};

namespace detail {

/// True when every covariance entry outside the diagonal blocks is exactly zero.
[[nodiscard]] inline bool cross_blocks_zero(const GaussianModel& model) {
  const Partition& p = model.partition();
  for (Index m = 0; m < p.block_count(); ++m) {
    for (Index n = m + 1; n < p.block_count(); ++n) {
      if (!model.block(m, n).isZero(0.0)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// I(X_1; ...; X_N) = 1/2 (sum_n ln|Sigma_nn| - ln|Sigma|), from Cholesky factors.
/// Exactly 0 when the blocks are uncorrelated.
[[nodiscard]] inline double multiinformation(const GaussianModel& model) {
  if (detail::cross_blocks_zero(model)) return 0.0;
  double blocks = 0.0;
  for (Index n = 0; n < model.block_count(); ++n) blocks += log_det(model.block_cholesky(n));
  return std::max(0.0, 0.5 * (blocks - log_det(model.cholesky())));
}

/// -1/2 ln|I_d + Gamma| = -1/2 sum_i ln(1 + lambda_i).
[[nodiscard]] inline double multiinformation_from_gamma(const GammaMatrix& gamma) {
  const auto& eig = gamma.eigenvalues();
  std::vector<double> logs(static_cast<std::size_t>(eig.size()));
  for (Index i = 0; i < eig.size(); ++i) {
    if (!(eig(i) > -1.0)) {
      throw Error(ErrorCode::EigenvalueOutOfRange,
                  "Gamma eigenvalue " + std::to_string(eig(i)) + " is not greater than -1");
    }
    logs[static_cast<std::size_t>(i)] = std::log1p(eig(i));
  }
  return -0.5 * pairwise_sum(logs);
}

/// i_d(x) = I + 1/2 (x - mu)^T Phi (x - mu).
[[nodiscard]] inline double density_at(const GaussianModel& model, const PhiMatrix& phi, double mi,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point has length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(model.dimension()));
  }
  const Eigen::VectorXd c = x - model.mean();
  return mi + 0.5 * c.dot(phi.matrix() * c);
}

[[nodiscard]] inline double density_at(const GaussianModel& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  return density_at(model, compute_phi(model), multiinformation(model), x);
}

/// ln f(x) - sum_n ln f_n(x_n) evaluated from Gaussian log-densities. This is
/// the definition of i_d and serves as the independent check of `density_at`.
[[nodiscard]] inline double density_at_direct(const GaussianModel& model,
                                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point has length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(model.dimension()));
  }
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  auto log_pdf = [](const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& c) {
    const Eigen::VectorXd z = llt.matrixL().solve(c);
    return -0.5 * (static_cast<double>(c.size()) * kLog2Pi + log_det(llt) + z.squaredNorm());
  };
  const Eigen::VectorXd c = x - model.mean();
  double value = log_pdf(model.cholesky(), c);
  const Partition& p = model.partition();
  for (Index n = 0; n < p.block_count(); ++n) {
    value -= log_pdf(model.block_cholesky(n), c.segment(p.offset(n), p.size(n)));
  }
  return value;
}

/// Maximal open interval where every 1 - t lambda_i > 0.
[[nodiscard]] inline CgfDomain cgf_domain(const GammaMatrix& gamma) {
  CgfDomain dom;
  const double lmax = gamma.max_eigenvalue();
  const double lmin = gamma.min_eigenvalue();
  if (lmax > 0.0) dom.upper = 1.0 / lmax;
  if (lmin < 0.0) dom.lower = 1.0 / lmin;
  return dom;
}

/// Smallest 1 - t lambda accepted by `cgf`. Closer to the pole the value is
/// dominated by rounding in the eigenvalues, so such t count as outside.
inline constexpr double kCgfPoleMargin = 1e-12;

/// t I - 1/2 sum_i ln(1 - t lambda_i); the spectral form of t I - 1/2 ln|I - t Gamma|.
[[nodiscard]] inline double cgf(const GammaMatrix& gamma, double mi, double t) {
  const CgfDomain dom = cgf_domain(gamma);
  if (!dom.contains(t)) throw OutOfDomainError(t, dom.lower, dom.upper);
  if (t == 0.0) return 0.0;
  const auto& eig = gamma.eigenvalues();
  std::vector<double> logs(static_cast<std::size_t>(eig.size()));
  for (Index i = 0; i < eig.size(); ++i) {
    if (1.0 - t * eig(i) <= kCgfPoleMargin) throw OutOfDomainError(t, dom.lower, dom.upper);
    logs[static_cast<std::size_t>(i)] = std::log1p(-t * eig(i));
  }
  return t * mi - 0.5 * pairwise_sum(logs);
}

[[nodiscard]] inline double cgf(const GaussianModel& model, double t) {
  return cgf(compute_gamma(model), multiinformation(model), t);
}

namespace detail {

/// ln((l-1)!), exact table below 21 and lgamma above.
[[nodiscard]] inline double log_factorial_of_predecessor(int l) {
  if (l <= 21) {
    double f = 1.0;
    for (int k = 2; k < l; ++k) f *= k;
    return std::log(f);
  }
  return std::lgamma(static_cast<double>(l));
}

[[nodiscard]] inline double factorial_of_predecessor(int l) {
  double f = 1.0;
  for (int k = 2; k < l; ++k) f *= k;
  return f;
}

}  // namespace detail

/// Cumulants of j_d = i_d - I: kappa_1 = 0 and kappa_l = (l-1)!/2 sum_i lambda_i^l.
/// Orders above 20 are assembled in log space; an order whose magnitude
/// bound (l-1)! sum |lambda_i|^l leaves the double range raises OverflowError.
[[nodiscard]] inline CumulantSequence centered_cumulants(const GammaMatrix& gamma, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidParameter, "cumulant order must be >= 1");
  const auto& eig = gamma.eigenvalues();
  const double scale = eig.size() ? eig.cwiseAbs().maxCoeff() : 0.0;
  const double log_max = std::log(std::numeric_limits<double>::max());

  CumulantSequence out;
  out.values.assign(static_cast<std::size_t>(order), 0.0);
  if (scale == 0.0) return out;

  std::vector<double> terms(static_cast<std::size_t>(eig.size()));
  std::vector<double> abs_terms(terms.size());
  for (int l = 2; l <= order; ++l) {
    // sum lambda^l = scale^l * sum (lambda/scale)^l, the inner sum is O(d).
    for (Index i = 0; i < eig.size(); ++i) {
      const double r = std::pow(eig(i) / scale, l);
      terms[static_cast<std::size_t>(i)] = r;
      abs_terms[static_cast<std::size_t>(i)] = std::abs(r);
    }
    const double inner = pairwise_sum(terms);
    const double inner_abs = pairwise_sum(abs_terms);
    const double log_bound =
        detail::log_factorial_of_predecessor(l) + l * std::log(scale) + std::log(inner_abs);
    if (log_bound > log_max) throw OverflowError(l);

    double value;
    if (l <= 20) {
      value = 0.5 * detail::factorial_of_predecessor(l) * std::pow(scale, l) * inner;
    } else if (inner == 0.0) {
      value = 0.0;
    } else {
      const double log_mag = detail::log_factorial_of_predecessor(l) - std::numbers::ln2 +
                             l * std::log(scale) + std::log(std::abs(inner));
      value = std::copysign(std::exp(log_mag), inner);
    }
    out.values[static_cast<std::size_t>(l - 1)] = value;
  }
  return out;
}

[[nodiscard]] inline CumulantSequence cumulants(const GammaMatrix& gamma, double mi, int order) {
  CumulantSequence out = centered_cumulants(gamma, order);
  out.values[0] += mi;
  return out;
}

[[nodiscard]] inline CumulantSequence cumulants(const GaussianModel& model, int order) {
  return cumulants(compute_gamma(model), multiinformation(model), order);
}

/// Var(i_d) as the block sum over m < n of tr(Sigma_mn Sigma_nn^{-1} Sigma_nm Sigma_mm^{-1}).
[[nodiscard]] inline double variance(const GaussianModel& model) {
  const Index count = model.block_count();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(count * (count - 1) / 2));
  for (Index m = 0; m < count; ++m) {
    for (Index n = m + 1; n < count; ++n) {
      const Eigen::MatrixXd g_mn = regression_block(model, m, n);  // Sigma_mn Sigma_nn^{-1}
      const Eigen::MatrixXd g_nm = regression_block(model, n, m);  // Sigma_nm Sigma_mm^{-1}
      terms.push_back((g_mn * g_nm).trace());
    }
  }
  return pairwise_sum(terms);
}

namespace detail {

/// Fornberg weights for the `derivative`-th derivative at 0 on the integer
/// nodes -half..half (unit spacing).
[[nodiscard]] inline std::vector<double> central_weights(int derivative, int half) {
  const int count = 2 * half + 1;
  std::vector<double> nodes(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) nodes[static_cast<std::size_t>(k)] = k - half;
  // c[j][m]: weight of node j for derivative m.
  std::vector<std::vector<double>> c(static_cast<std::size_t>(count),
                                     std::vector<double>(static_cast<std::size_t>(derivative + 1), 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < count; ++i) {
    const int mn = std::min(i, derivative);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) w[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)][derivative];
  return w;
}

/// Half-width of the fourth-order-accurate central stencil for a derivative.
[[nodiscard]] constexpr int stencil_half_width(int derivative) noexcept {
  return (derivative + 1) / 2 + 1;
}

}  // namespace detail

/// Default finite-difference step: 1e-3 * min(1, domain half-width).
[[nodiscard]] inline double default_fd_step(const CgfDomain& domain) {
  return 1e-3 * std::min(1.0, domain.half_width());
}

/// Central finite-difference estimates of the first `order` derivatives of
/// the CGF at t = 0 (order <= 6). Test oracle only.
[[nodiscard]] inline CumulantSequence cgf_numeric_cumulants(const GaussianModel& model, int order,
                                                            double step) {
  if (order < 1 || order > 6) {
    throw Error(ErrorCode::InvalidParameter, "finite-difference order must be in [1, 6]");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidParameter, "step must be positive");
  const GammaMatrix gamma = compute_gamma(model);
  const double mi = multiinformation(model);
  const CgfDomain dom = cgf_domain(gamma);
  const int reach = detail::stencil_half_width(order);
  for (double t : {-reach * step, reach * step}) {
    if (!dom.contains(t)) throw OutOfDomainError(t, dom.lower, dom.upper);
  }

  std::vector<double> f(static_cast<std::size_t>(2 * reach + 1));
  for (int k = -reach; k <= reach; ++k) f[static_cast<std::size_t>(k + reach)] = cgf(gamma, mi, k * step);

  CumulantSequence out;
  for (int l = 1; l <= order; ++l) {
    const int half = detail::stencil_half_width(l);
    const auto w = detail::central_weights(l, half);
    // Symmetric pairs first so that exact (anti)symmetry of f cancels exactly.
    double acc = w[static_cast<std::size_t>(half)] * f[static_cast<std::size_t>(reach)];
    for (int k = 1; k <= half; ++k) {
      const double plus = f[static_cast<std::size_t>(reach + k)];
      const double minus = f[static_cast<std::size_t>(reach - k)];
      const double wp = w[static_cast<std::size_t>(half + k)];
      acc += (l % 2 == 0) ? wp * (plus + minus) : wp * (plus - minus);
    }
    out.values.push_back(acc / std::pow(step, l));
  }
  return out;
}

}  // namespace infodensity
