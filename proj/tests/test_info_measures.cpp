#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "infodensity/info_measures.hpp"
#include "support/random_models.hpp"

using namespace infodensity;
using infodensity::testing::mat;
using infodensity::testing::near_rel;

namespace {

GaussianModel scalar_pair(double rho) { return validate_model(mat({{1.0, rho}, {rho, 1.0}}), {1, 1}); }

GaussianModel homogeneous3() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(3, 3, 0.5);
  s.diagonal().setOnes();
  return validate_model(s, {1, 1, 1});
}

// ln|det(I - t Gamma)| through an LU factorization of the nonsymmetric matrix.
double lu_log_det_i_minus_t_gamma(const GammaMatrix& g, double t) {
  const Index d = g.dimension();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(d, d) - t * g.matrix());
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

constexpr double kPairMi = 0.14384103622589045;  // -1/2 ln(0.75)
constexpr double kHomogMi = 0.34657359027997264; // 1/2 ln 2

}  // namespace

TEST(Multiinformation, Examples) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(multiinformation(infodensity::testing::random_block_diagonal_model(rng, 5)), 0.0);
  EXPECT_NEAR(multiinformation(scalar_pair(0.5)), kPairMi, 1e-15);
  EXPECT_NEAR(multiinformation(homogeneous3()), kHomogMi, 1e-15);
}

TEST(Multiinformation, FromGammaMatchesLogDet) {
  EXPECT_EQ(multiinformation_from_gamma(compute_gamma(validate_model(Eigen::MatrixXd::Identity(3, 3), {1, 2}))), 0.0);
  EXPECT_NEAR(multiinformation_from_gamma(compute_gamma(scalar_pair(0.5))), kPairMi, 1e-15);
  EXPECT_NEAR(multiinformation_from_gamma(compute_gamma(homogeneous3())), kHomogMi, 1e-14);

  std::mt19937_64 rng(77);
  for (int i = 0; i < 30; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 10);
    EXPECT_NEAR(multiinformation_from_gamma(compute_gamma(m)), multiinformation(m), 1e-9);
  }
}

TEST(Multiinformation, FromGammaRejectsEigenvalueAtMinusOne) {
  const GammaMatrix bad(Eigen::MatrixXd::Zero(2, 2), Partition({1, 1}), Eigen::Vector2d(-1.0, 1.0));
  try {
    (void)multiinformation_from_gamma(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EigenvalueOutOfRange);
  }
}

TEST(DensityAt, Examples) {
  const auto m = validate_model(Eigen::Vector3d(1.0, -2.0, 0.5), mat({{2, 0.3, 0.1}, {0.3, 1, 0.2}, {0.1, 0.2, 1.5}}), {1, 2});
  EXPECT_NEAR(density_at(m, m.mean()), multiinformation(m), 1e-15);

  EXPECT_NEAR(density_at(scalar_pair(0.5), Eigen::Vector2d(1.0, 1.0)), kPairMi + 1.0 / 3.0, 1e-14);

  try {
    (void)density_at(m, Eigen::Vector2d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(DensityAt, AgreesWithDirectLogDensities) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    const auto phi = compute_phi(m);
    const double mi = multiinformation(m);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd x = m.mean() + infodensity::testing::random_vector(rng, m.dimension(), 2.0);
      EXPECT_NEAR(density_at(m, phi, mi, x), density_at_direct(m, x), 1e-9);
    }
  }
}

TEST(CgfDomain, Examples) {
  const auto zero = cgf_domain(compute_gamma(validate_model(Eigen::MatrixXd::Identity(2, 2), {1, 1})));
  EXPECT_TRUE(std::isinf(zero.lower) && zero.lower < 0);
  EXPECT_TRUE(std::isinf(zero.upper) && zero.upper > 0);

  const auto pair = cgf_domain(compute_gamma(scalar_pair(0.5)));
  EXPECT_NEAR(pair.lower, -2.0, 1e-14);
  EXPECT_NEAR(pair.upper, 2.0, 1e-14);

  const auto homog = cgf_domain(compute_gamma(homogeneous3()));
  EXPECT_NEAR(homog.lower, -2.0, 1e-13);
  EXPECT_NEAR(homog.upper, 1.0, 1e-13);
}

TEST(Cgf, Examples) {
  std::mt19937_64 rng(8);
  EXPECT_EQ(cgf(infodensity::testing::random_model(rng, 2, 6), 0.0), 0.0);
  EXPECT_NEAR(cgf(scalar_pair(0.5), 1.0), 0.28768207245178090, 1e-14);
  try {
    (void)cgf(scalar_pair(0.5), 2.0);
    FAIL();
  } catch (const OutOfDomainError& e) {
    EXPECT_EQ(e.t(), 2.0);
    EXPECT_NEAR(e.upper(), 2.0, 1e-14);
  }
  EXPECT_THROW((void)cgf(scalar_pair(0.5), -2.5), OutOfDomainError);
}

TEST(Cgf, SpectralPathMatchesLuLogDeterminant) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> frac(-0.95, 0.95);
  for (int i = 0; i < 20; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    const auto g = compute_gamma(m);
    const double mi = multiinformation(m);
    const auto dom = cgf_domain(g);
    for (int k = 0; k < 10; ++k) {
      const double f = frac(rng);
      const double t = f > 0 ? f * std::min(dom.upper, 10.0) : -f * std::max(dom.lower, -10.0);
      EXPECT_NEAR(cgf(g, mi, t), t * mi - 0.5 * lu_log_det_i_minus_t_gamma(g, t), 1e-9);
    }
  }
}

TEST(Cumulants, Examples) {
  const auto id = cumulants(validate_model(Eigen::MatrixXd::Identity(4, 4), {2, 2}), 6);
  for (double v : id.values) EXPECT_EQ(v, 0.0);

  const auto pair = cumulants(scalar_pair(0.5), 5);
  EXPECT_NEAR(pair.at(1), kPairMi, 1e-15);
  EXPECT_NEAR(pair.at(2), 0.25, 1e-14);
  EXPECT_NEAR(pair.at(3), 0.0, 1e-15);
  EXPECT_NEAR(pair.at(4), 0.375, 1e-14);
  EXPECT_NEAR(pair.at(5), 0.0, 1e-14);

  const auto homog = cumulants(homogeneous3(), 3);
  EXPECT_NEAR(homog.at(2), 0.75, 1e-14);
  EXPECT_NEAR(homog.at(3), 0.75, 1e-14);
}

TEST(Cumulants, EigenvaluePathMatchesMatrixPowers) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    const auto g = compute_gamma(m);
    const auto k = cumulants(g, multiinformation(m), 8);
    EXPECT_GE(k.at(2), 0.0);
    Eigen::MatrixXd power = g.matrix();
    double fact = 1.0;
    for (int l = 2; l <= 8; ++l) {
      power = (power * g.matrix()).eval();
      fact *= (l - 1);
      EXPECT_TRUE(near_rel(k.at(l), 0.5 * fact * power.trace(), 1e-9)) << "l=" << l;
    }
  }
}

TEST(Cumulants, ShiftRelationOnlyTouchesOrderOne) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 7);
    const auto g = compute_gamma(m);
    const double mi = multiinformation(m);
    const auto id = cumulants(g, mi, 6);
    const auto jd = centered_cumulants(g, 6);
    EXPECT_EQ(jd.at(1), 0.0);
    EXPECT_EQ(id.at(1), mi + jd.at(1));
    for (int l = 2; l <= 6; ++l) EXPECT_EQ(id.at(l), jd.at(l));
  }
}

TEST(Cumulants, HighOrdersUseLogSpaceAndReportOverflow) {
  // kappa_l = (l-1)! |rho|^l for even l.
  const auto k = cumulants(scalar_pair(0.5), 30);
  for (int l : {22, 26, 30}) {
    const double expected = std::exp(std::lgamma(static_cast<double>(l)) + l * std::log(0.5));
    EXPECT_TRUE(near_rel(k.at(l), expected, 1e-11)) << l;
  }
  EXPECT_EQ(k.at(25), 0.0);

  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(50, 50, 0.9);
  s.diagonal().setOnes();
  const auto big = validate_model(s, Partition::scalar(50).block_sizes());
  try {
    (void)cumulants(big, 200);
    FAIL();
  } catch (const OverflowError& e) {
    EXPECT_GT(e.order(), 20);
    EXPECT_LT(e.order(), 171);
    // The order before the failing one is still representable.
    EXPECT_NO_THROW((void)cumulants(big, e.order() - 1));
  }
}

TEST(Variance, Examples) {
  const auto three = validate_model(mat({{1, 0.3, 0.1}, {0.3, 1, 0.2}, {0.1, 0.2, 1}}), {1, 1, 1});
  EXPECT_NEAR(variance(three), 0.14, 1e-15);
  std::mt19937_64 rng(2);
  EXPECT_EQ(variance(infodensity::testing::random_block_diagonal_model(rng, 6)), 0.0);
  EXPECT_NEAR(variance(scalar_pair(0.5)), 0.25, 1e-15);
}

TEST(Variance, BlockSumEqualsHalfTraceOfGammaSquared) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 30; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 10);
    const auto g = compute_gamma(m);
    EXPECT_NEAR(variance(m), 0.5 * (g.matrix() * g.matrix()).trace(), 1e-10);
    EXPECT_NEAR(variance(m), cumulants(m, 2).at(2), 1e-10);
  }
}

TEST(Independence, BlockDiagonalModelsAreNull) {
  std::mt19937_64 rng(100);
  for (int i = 0; i < 10; ++i) {
    const auto m = infodensity::testing::random_block_diagonal_model(rng, 7);
    EXPECT_EQ(multiinformation(m), 0.0);
    EXPECT_EQ(variance(m), 0.0);
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd x = infodensity::testing::random_vector(rng, 7, 3.0);
      EXPECT_LT(std::abs(density_at(m, x)), 1e-10);
    }
  }
}

TEST(Independence, AnyCrossCovarianceMakesMeasuresPositive) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 20; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    EXPECT_GT(multiinformation(m), 0.0);
    EXPECT_GT(variance(m), 0.0);
  }
  // A single tiny cross term.
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(0, 2) = s(2, 0) = 1e-3;
  const auto m = validate_model(s, {1, 1, 1});
  EXPECT_GT(multiinformation(m), 0.0);
  EXPECT_GT(variance(m), 0.0);
}

TEST(VarianceIrrelevance, RescalingLeavesCgfAndCumulants) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int i = 0; i < 10; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    Eigen::VectorXd s(m.dimension());
    for (Index k = 0; k < s.size(); ++k) s(k) = scale(rng);
    const auto r = validate_model(m.mean(), s.asDiagonal() * m.covariance() * s.asDiagonal(),
                                  m.partition().block_sizes());
    const auto dom = cgf_domain(compute_gamma(m));
    for (int k = -4; k <= 4; ++k) {
      const double t = k > 0 ? 0.2 * k * std::min(dom.upper, 5.0) : -0.2 * k * std::max(dom.lower, -5.0);
      EXPECT_NEAR(cgf(m, t), cgf(r, t), 1e-9);
    }
    const auto a = cumulants(m, 6);
    const auto b = cumulants(r, 6);
    for (int l = 1; l <= 6; ++l) EXPECT_TRUE(near_rel(a.at(l), b.at(l), 1e-9));
  }
}

TEST(Cgf, TaylorSeriesConsistency) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 6);
    const auto g = compute_gamma(m);
    const double mi = multiinformation(m);
    const double radius = 0.9 / g.eigenvalues().cwiseAbs().maxCoeff();
    const auto k = cumulants(g, mi, 40);
    for (double f : {-0.5, -0.25, 0.3, 0.5}) {
      const double t = f * radius;
      double series = 0.0;
      double tl_over_lfact = t;  // t^l / l!
      for (int l = 2; l <= 40; ++l) {
        tl_over_lfact *= t / l;
        series += k.at(l) * tl_over_lfact;
      }
      EXPECT_NEAR(cgf(g, mi, t) - t * mi, series, 1e-8) << "t=" << t;
    }
  }
}

TEST(FiniteDifference, Examples) {
  const auto zero = cgf_numeric_cumulants(validate_model(Eigen::MatrixXd::Identity(3, 3), {1, 2}), 4, 1e-3);
  for (int l = 2; l <= 4; ++l) EXPECT_NEAR(zero.at(l), 0.0, 1e-6);

  EXPECT_NEAR(cgf_numeric_cumulants(scalar_pair(0.5), 2, 1e-3).at(2), 0.25, 1e-6);
  EXPECT_NEAR(cgf_numeric_cumulants(homogeneous3(), 3, 1e-2).at(3), 0.75, 1e-4);
}

TEST(FiniteDifference, StencilMustStayInsideDomain) {
  EXPECT_THROW((void)cgf_numeric_cumulants(scalar_pair(0.5), 4, 0.7), OutOfDomainError);
  EXPECT_THROW((void)cgf_numeric_cumulants(scalar_pair(0.5), 7, 1e-3), Error);
}

TEST(FiniteDifference, DefaultStepAndRandomModels) {
  std::mt19937_64 rng(55);
  for (int i = 0; i < 10; ++i) {
    const auto m = infodensity::testing::random_model(rng, 2, 8);
    const auto g = compute_gamma(m);
    const double h = default_fd_step(cgf_domain(g));
    const auto fd = cgf_numeric_cumulants(m, 3, h);
    const auto k = cumulants(g, multiinformation(m), 3);
    EXPECT_NEAR(fd.at(1), k.at(1), 1e-6);
    EXPECT_NEAR(fd.at(2), k.at(2), 1e-6);
    EXPECT_NEAR(fd.at(3), k.at(3), 1e-4);
  }
}

TEST(FiniteDifference, WeightsReproducePolynomialDerivatives) {
  // Independent check of the stencil: derivatives of t^p at 0 are p! delta.
  for (int l = 1; l <= 6; ++l) {
    const int half = detail::stencil_half_width(l);
    const auto w = detail::central_weights(l, half);
    double fact = 1.0;
    for (int k = 2; k <= l; ++k) fact *= k;
    for (int p = 0; p <= 2 * half; ++p) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) acc += w[static_cast<std::size_t>(k + half)] * std::pow(k, p);
      EXPECT_NEAR(acc, p == l ? fact : 0.0, 1e-9 * fact) << "l=" << l << " p=" << p;
    }
  }
}
