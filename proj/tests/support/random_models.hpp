#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

#include "infodensity/model.hpp"

namespace infodensity::testing {

/// Random block sizes summing to d with at least `min_blocks` blocks, each at most `max_size`.
inline std::vector<Index> random_partition(std::mt19937_64& rng, Index d, Index min_blocks = 2,
                                           Index max_size = 1 << 20) {
  for (;;) {
    std::vector<Index> sizes;
    Index left = d;
    while (left > 0) {
      std::uniform_int_distribution<Index> pick(1, std::min(left, max_size));
      const Index s = pick(rng);
      sizes.push_back(s);
      left -= s;
    }
    if (static_cast<Index>(sizes.size()) >= min_blocks) return sizes;
  }
}

/// A A^T / d + ridge * I with unequal coordinate scales; well conditioned.
inline Eigen::MatrixXd random_covariance(std::mt19937_64& rng, Index d, double ridge = 0.3) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  Eigen::MatrixXd a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(d);
  s.diagonal().array() += ridge;
  Eigen::VectorXd dscale(d);
  for (Index i = 0; i < d; ++i) dscale(i) = scale(rng);
  s = dscale.asDiagonal() * s * dscale.asDiagonal();
  return 0.5 * (s + s.transpose());
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Index d, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(d);
  for (Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

/// Random model with dimension in [min_d, max_d] and a random partition.
inline GaussianModel random_model(std::mt19937_64& rng, Index min_d, Index max_d, Index min_blocks = 2,
                                  Index max_block = 1 << 20) {
  std::uniform_int_distribution<Index> dim(min_d, max_d);
  const Index d = dim(rng);
  auto sizes = random_partition(rng, d, min_blocks, max_block);
  return validate_model(random_vector(rng, d), random_covariance(rng, d), sizes);
}

/// Model whose covariance is block diagonal under a random partition.
inline GaussianModel random_block_diagonal_model(std::mt19937_64& rng, Index d) {
  auto sizes = random_partition(rng, d);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  Index off = 0;
  for (Index n : sizes) {
    s.block(off, off, n, n) = random_covariance(rng, n);
    off += n;
  }
  return validate_model(random_vector(rng, d), s, sizes);
}

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline bool near_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace infodensity::testing
