#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "infodensity/two_block.hpp"
#include "support/random_models.hpp"

using namespace infodensity;
using infodensity::testing::mat;
using infodensity::testing::near_rel;

namespace {

GaussianModel random_two_block(std::mt19937_64& rng, Index max_size = 4) {
  std::uniform_int_distribution<Index> size(1, max_size);
  const Index n1 = size(rng);
  const Index n2 = size(rng);
  return validate_model(infodensity::testing::random_vector(rng, n1 + n2),
                        infodensity::testing::random_covariance(rng, n1 + n2), {n1, n2});
}

TwoBlockModel one_by_two() {
  return TwoBlockModel(validate_model(mat({{1, 0.3, 0.4}, {0.3, 1, 0}, {0.4, 0, 1}}), {1, 2}));
}

}  // namespace

TEST(TwoBlockModel, RequiresTwoBlocks) {
  try {
    TwoBlockModel tb(validate_model(Eigen::MatrixXd::Identity(3, 3), {1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadPartition);
  }
}

TEST(TwoBlockModel, GammaPowersHaveAlternatingBlockStructure) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    const TwoBlockModel tb(random_two_block(rng));
    const auto g = compute_gamma(tb.model());
    const Index n1 = tb.sigma11().rows();
    const Index n2 = tb.sigma22().rows();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n1 + n2, n1 + n2);
    for (int l = 1; l <= 6; ++l) {
      power = (power * g.matrix()).eval();
      if (l % 2 == 1) {
        EXPECT_LE(power.topLeftCorner(n1, n1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_TRUE(power.topRightCorner(n1, n2).isApprox(tb.chi(l), 1e-10));
        EXPECT_TRUE(power.bottomLeftCorner(n2, n1).isApprox(tb.upsilon(l), 1e-10));
      } else {
        EXPECT_TRUE(power.topLeftCorner(n1, n1).isApprox(tb.chi(l), 1e-10));
        EXPECT_TRUE(power.bottomRightCorner(n2, n2).isApprox(tb.upsilon(l), 1e-10));
        // chi/upsilon duality (cyclic trace).
        EXPECT_NEAR(tb.chi(l).trace(), tb.upsilon(l).trace(), 1e-10);
      }
      if (l >= 2) {
        EXPECT_TRUE(tb.chi(l).isApprox(tb.gamma12() * tb.upsilon(l - 1), 1e-12));
        EXPECT_TRUE(tb.upsilon(l).isApprox(tb.gamma21() * tb.chi(l - 1), 1e-12));
      }
    }
  }
}

TEST(TwoBlockTrace, Examples) {
  std::mt19937_64 rng(1);
  const TwoBlockModel any(random_two_block(rng));
  EXPECT_EQ(two_block_trace(any, 3), 0.0);

  const TwoBlockModel pair(validate_model(mat({{1, 0.5}, {0.5, 1}}), {1, 1}));
  EXPECT_NEAR(two_block_trace(pair, 2), 0.5, 1e-15);

  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  s(0, 1) = s(1, 0) = 0.4;
  s(2, 3) = s(3, 2) = -0.2;
  const TwoBlockModel bd(validate_model(s, {2, 2}));
  for (int l = 1; l <= 6; ++l) EXPECT_EQ(two_block_trace(bd, l), 0.0);
}

TEST(TwoBlockTrace, MatchesGeneralPath) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const TwoBlockModel tb(random_two_block(rng));
    const auto g = compute_gamma(tb.model());
    for (int l = 1; l <= 8; ++l) {
      EXPECT_TRUE(near_rel(two_block_trace(tb, l), trace_of_power(g.matrix(), l), 1e-9)) << l;
    }
  }
}

TEST(CanonicalCorrelations, Examples) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(5, 5);
  s(0, 1) = s(1, 0) = 0.4;
  const auto bd = canonical_correlations(TwoBlockModel(validate_model(s, {2, 3})));
  ASSERT_EQ(bd.squared.size(), 2u);
  for (double r : bd.squared) EXPECT_EQ(r, 0.0);

  const auto pair = canonical_correlations(TwoBlockModel(validate_model(mat({{1, -0.7}, {-0.7, 1}}), {1, 1})));
  ASSERT_EQ(pair.squared.size(), 1u);
  EXPECT_NEAR(pair.squared[0], 0.49, 1e-15);

  const auto tb = one_by_two();
  const auto cc = canonical_correlations(tb);
  ASSERT_EQ(cc.squared.size(), 1u);
  EXPECT_NEAR(cc.squared[0], 0.25, 1e-15);
  EXPECT_NEAR(cc.sum(), variance(tb.model()), 1e-15);
}

TEST(CanonicalCorrelations, SumEqualsVarianceAndSpectrumIsOrdered) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 20; ++i) {
    const TwoBlockModel tb(random_two_block(rng));
    const auto cc = canonical_correlations(tb);
    EXPECT_EQ(cc.squared.size(),
              static_cast<std::size_t>(std::min(tb.sigma11().rows(), tb.sigma22().rows())));
    for (std::size_t k = 0; k < cc.squared.size(); ++k) {
      EXPECT_GE(cc.squared[k], 0.0);
      EXPECT_LT(cc.squared[k], 1.0);
      if (k > 0) {
        EXPECT_GE(cc.squared[k - 1], cc.squared[k]);
      }
    }
    EXPECT_NEAR(cc.sum(), variance(tb.model()), 1e-9);
  }
}

TEST(MultipleCorrelation, Examples) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(1, 2) = s(2, 1) = 0.5;
  EXPECT_EQ(multiple_correlation(TwoBlockModel(validate_model(s, {1, 2}))), 0.0);

  const auto tb = one_by_two();
  const double r2 = multiple_correlation(tb);
  EXPECT_NEAR(r2, 0.25, 1e-15);
  const auto k = cumulants(tb.model(), 4);
  EXPECT_NEAR(k.at(2), 0.25, 1e-14);
  EXPECT_NEAR(k.at(4), 0.375, 1e-14);

  EXPECT_NEAR(multiple_correlation(TwoBlockModel(validate_model(mat({{1, 0.6}, {0.6, 1}}), {1, 1}))), 0.36, 1e-15);

  try {
    (void)multiple_correlation(TwoBlockModel(validate_model(Eigen::MatrixXd::Identity(4, 4), {2, 2})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BlockNotScalar);
  }
}

TEST(MultipleCorrelation, CumulantsFollowClosedForm) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 20; ++i) {
    std::uniform_int_distribution<Index> size(1, 5);
    const Index n2 = size(rng);
    const TwoBlockModel tb(validate_model(infodensity::testing::random_covariance(rng, 1 + n2), {1, n2}));
    const double r2 = multiple_correlation(tb);
    const auto k = cumulants(tb.model(), 8);
    double fact = 1.0;
    for (int l = 2; l <= 8; ++l) {
      fact *= (l - 1);
      if (l % 2 == 0) {
        EXPECT_TRUE(near_rel(k.at(l), fact * std::pow(r2, l / 2), 1e-9)) << l;
      } else {
        EXPECT_LT(std::abs(k.at(l)), 1e-9 * std::max(1.0, std::pow(k.at(2), l / 2.0)));
      }
    }
  }
}

TEST(OddCumulants, VanishForTwoBlocks) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_two_block(rng);
    const auto k = cumulants(m, 7);
    for (int l : {3, 5, 7}) EXPECT_LT(std::abs(k.at(l)), 1e-9 * std::max(1.0, std::pow(k.at(2), l / 2.0)));
  }
}

TEST(ScalarPairCgf, Examples) {
  for (double t : {-3.0, 0.0, 1.0, 17.0}) EXPECT_EQ(scalar_pair_cgf(0.0, t), 0.0);
  EXPECT_NEAR(scalar_pair_cgf(0.5, 1.0), 0.28768207245178090, 1e-15);
  EXPECT_THROW((void)scalar_pair_cgf(0.5, 2.0), OutOfDomainError);
  EXPECT_THROW((void)scalar_pair_cgf(1.0, 0.0), Error);
}

TEST(ScalarPairCgf, MatchesGeneralCgf) {
  for (double rho : {-0.8, -0.3, 0.1, 0.5, 0.9}) {
    const auto m = validate_model(mat({{1, rho}, {rho, 1}}), {1, 1});
    const double bound = 1.0 / std::abs(rho);
    for (int k = -9; k <= 9; ++k) {
      const double t = 0.1 * k * bound;
      EXPECT_NEAR(scalar_pair_cgf(rho, t), cgf(m, t), 1e-12);
    }
  }
}
