#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/linalg.hpp"

namespace infodensity {

/// Split of {0, ..., d-1} into N >= 2 contiguous blocks. Block indices are
/// zero-based throughout the library.
class Partition {
 public:
  explicit Partition(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
    if (sizes_.size() < 2) {
      throw Error(ErrorCode::BadPartition,
                  "a partition needs at least 2 blocks, got " + std::to_string(sizes_.size()));
    }
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t b = 0; b < sizes_.size(); ++b) {
      if (sizes_[b] < 1) {
        throw Error(ErrorCode::BadPartition, "block " + std::to_string(b) + " has size " +
                                                 std::to_string(sizes_[b]) + "; sizes must be >= 1");
      }
      offsets_.push_back(offsets_.back() + sizes_[b]);
    }
  }

  /// d blocks of size one.
  [[nodiscard]] static Partition scalar(Index d) {
    return Partition(std::vector<Index>(static_cast<std::size_t>(std::max<Index>(d, 0)), 1));
  }

  [[nodiscard]] Index block_count() const noexcept { return static_cast<Index>(sizes_.size()); }
  [[nodiscard]] Index dimension() const noexcept { return offsets_.back(); }
  [[nodiscard]] Index size(Index block) const { return sizes_.at(static_cast<std::size_t>(block)); }
  [[nodiscard]] Index offset(Index block) const { return offsets_.at(static_cast<std::size_t>(block)); }
  [[nodiscard]] const std::vector<Index>& block_sizes() const noexcept { return sizes_; }

  [[nodiscard]] bool all_scalar() const noexcept {
    return std::all_of(sizes_.begin(), sizes_.end(), [](Index s) { return s == 1; });
  }

  friend bool operator==(const Partition& a, const Partition& b) { return a.sizes_ == b.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

class GaussianModel;

GaussianModel validate_model(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                             std::vector<Index> block_sizes);

/// Validated multivariate normal model N(mean, covariance) with a block
/// partition. Immutable; only `validate_model` constructs it, so every
/// instance has a symmetric positive definite covariance and positive
/// definite diagonal blocks.
class GaussianModel {
 public:
  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  [[nodiscard]] const Partition& partition() const noexcept { return partition_; }
  [[nodiscard]] Index dimension() const noexcept { return cov_.rows(); }
  [[nodiscard]] Index block_count() const noexcept { return partition_.block_count(); }

  /// Covariance block Sigma_mn.
  [[nodiscard]] Eigen::Block<const Eigen::MatrixXd> block(Index m, Index n) const {
    return cov_.block(partition_.offset(m), partition_.offset(n), partition_.size(m),
                      partition_.size(n));
  }

  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& cholesky() const noexcept { return llt_; }

  /// Cholesky factorization of the diagonal block Sigma_nn.
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& block_cholesky(Index n) const {
    return block_llt_.at(static_cast<std::size_t>(n));
  }

 private:
  GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd cov, Partition partition,
                Eigen::LLT<Eigen::MatrixXd> llt, std::vector<Eigen::LLT<Eigen::MatrixXd>> block_llt)
      : mean_(std::move(mean)),
        cov_(std::move(cov)),
        partition_(std::move(partition)),
        llt_(std::move(llt)),
        block_llt_(std::move(block_llt)) {}

  friend GaussianModel validate_model(Eigen::VectorXd, Eigen::MatrixXd, std::vector<Index>);

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Partition partition_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> block_llt_;
};

inline constexpr double kSymmetryTolerance = 1e-8;

/// Checks shapes, partition, symmetry (relative tolerance 1e-8, then exact
/// symmetrization) and positive definiteness of the covariance and of every
/// diagonal block.
inline GaussianModel validate_model(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                    std::vector<Index> block_sizes) {
  if (covariance.rows() != covariance.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "covariance is " + std::to_string(covariance.rows()) + "x" +
                    std::to_string(covariance.cols()) + ", expected a square matrix");
  }
  const Index d = covariance.rows();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "covariance is empty");
  if (mean.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "mean has length " + std::to_string(mean.size()) +
                                                  " but covariance is " + std::to_string(d) + "x" +
                                                  std::to_string(d));
  }
  Partition partition(std::move(block_sizes));
  if (partition.dimension() != d) {
    throw Error(ErrorCode::BadPartition, "block sizes sum to " +
                                             std::to_string(partition.dimension()) +
                                             " but the dimension is " + std::to_string(d));
  }
  if (!covariance.allFinite() || !mean.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "mean and covariance must be finite");
  }
  const double asym = relative_asymmetry(covariance);
  if (asym > kSymmetryTolerance) {
    throw Error(ErrorCode::NotSymmetric,
                "relative asymmetry " + std::to_string(asym) + " exceeds 1e-8");
  }
  covariance = (0.5 * (covariance + covariance.transpose())).eval();

  auto llt = checked_cholesky(covariance, "covariance");
  std::vector<Eigen::LLT<Eigen::MatrixXd>> block_llt;
  block_llt.reserve(static_cast<std::size_t>(partition.block_count()));
  for (Index n = 0; n < partition.block_count(); ++n) {
    const Eigen::MatrixXd diag_block = covariance.block(partition.offset(n), partition.offset(n),
                                                        partition.size(n), partition.size(n));
    block_llt.push_back(checked_cholesky(diag_block, "diagonal block " + std::to_string(n)));
  }
  return GaussianModel(std::move(mean), std::move(covariance), std::move(partition), std::move(llt),
                       std::move(block_llt));
}

/// Zero-mean convenience overload.
inline GaussianModel validate_model(const Eigen::MatrixXd& covariance, std::vector<Index> block_sizes) {
  return validate_model(Eigen::VectorXd::Zero(covariance.rows()), covariance, std::move(block_sizes));
}

/// Regression coefficients of block m on block n: Sigma_mn Sigma_nn^{-1}.
[[nodiscard]] inline Eigen::MatrixXd regression_block(const GaussianModel& model, Index m, Index n) {
  const Index count = model.block_count();
  if (m < 0 || n < 0 || m >= count || n >= count) {
    throw Error(ErrorCode::BadPartition, "block index out of range");
  }
  if (m == n) throw Error(ErrorCode::SameBlock, "regression_block needs m != n");
  // (Sigma_nn^{-1} Sigma_nm)^T, Sigma_nn symmetric.
  return model.block_cholesky(n).solve(model.block(n, m)).transpose();
}

/// Block matrix of regression coefficients with exactly-zero diagonal blocks,
/// plus its (real) spectrum in ascending order.
class GammaMatrix {
 public:
  GammaMatrix(Eigen::MatrixXd matrix, Partition partition, Eigen::VectorXd eigenvalues)
      : matrix_(std::move(matrix)), partition_(std::move(partition)), eigenvalues_(std::move(eigenvalues)) {}

  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const Partition& partition() const noexcept { return partition_; }
  [[nodiscard]] const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] Index dimension() const noexcept { return matrix_.rows(); }

  /// Gamma_{m|n}: rows of block m, columns of block n.
  [[nodiscard]] Eigen::Block<const Eigen::MatrixXd> block(Index m, Index n) const {
    return matrix_.block(partition_.offset(m), partition_.offset(n), partition_.size(m),
                         partition_.size(n));
  }

  [[nodiscard]] double min_eigenvalue() const { return eigenvalues_.size() ? eigenvalues_.minCoeff() : 0.0; }
  [[nodiscard]] double max_eigenvalue() const { return eigenvalues_.size() ? eigenvalues_.maxCoeff() : 0.0; }

 private:
  Eigen::MatrixXd matrix_;
  Partition partition_;
  Eigen::VectorXd eigenvalues_;
};

/// Symmetric matrix similar to Gamma: L^{-1} Sigma L^{-T} - I where L is the
/// block-diagonal Cholesky factor of diag(Sigma_11, ..., Sigma_NN). Its
/// diagonal blocks are set to exact zeros.
[[nodiscard]] inline Eigen::MatrixXd symmetrized_gamma(const GaussianModel& model) {
  const Partition& p = model.partition();
  Eigen::MatrixXd s = model.covariance();
  for (Index m = 0; m < p.block_count(); ++m) {
    const auto& l = model.block_cholesky(m).matrixL();
    auto rows = s.middleRows(p.offset(m), p.size(m));
    l.solveInPlace(rows);
  }
  for (Index n = 0; n < p.block_count(); ++n) {
    const auto& l = model.block_cholesky(n).matrixL();
    Eigen::MatrixXd cols_t = s.middleCols(p.offset(n), p.size(n)).transpose();
    l.solveInPlace(cols_t);
    s.middleCols(p.offset(n), p.size(n)) = cols_t.transpose();
  }
  for (Index n = 0; n < p.block_count(); ++n) {
    s.block(p.offset(n), p.offset(n), p.size(n), p.size(n)).setZero();
  }
  return (0.5 * (s + s.transpose())).eval();
}

[[nodiscard]] inline GammaMatrix compute_gamma(const GaussianModel& model) {
  const Partition& p = model.partition();
  const Index d = model.dimension();
  Eigen::MatrixXd gamma(d, d);
  // Column block n of Sigma diag(...)^{-1} is Sigma_{:,n} Sigma_nn^{-1}.
  for (Index n = 0; n < p.block_count(); ++n) {
    gamma.middleCols(p.offset(n), p.size(n)) =
        model.block_cholesky(n).solve(model.covariance().middleRows(p.offset(n), p.size(n))).transpose();
    gamma.block(p.offset(n), p.offset(n), p.size(n), p.size(n)).setZero();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized_gamma(model), Eigen::EigenvaluesOnly);
  return GammaMatrix(std::move(gamma), p, eig.eigenvalues());
}

/// Symmetric quadratic-form kernel diag(Sigma_11, ..., Sigma_NN)^{-1} - Sigma^{-1}.
class PhiMatrix {
 public:
  explicit PhiMatrix(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

[[nodiscard]] inline PhiMatrix compute_phi(const GaussianModel& model) {
  const Partition& p = model.partition();
  const Index d = model.dimension();
  Eigen::MatrixXd phi = -model.cholesky().solve(Eigen::MatrixXd::Identity(d, d));
  for (Index n = 0; n < p.block_count(); ++n) {
    phi.block(p.offset(n), p.offset(n), p.size(n), p.size(n)) +=
        model.block_cholesky(n).solve(Eigen::MatrixXd::Identity(p.size(n), p.size(n)));
  }
  return PhiMatrix((0.5 * (phi + phi.transpose())).eval());
}

struct CorrelationNormalization {
  /// Diagonal of Delta, sqrt(Sigma_kk).
  Eigen::VectorXd scale;
  /// Covariance R = Delta^{-1} Sigma Delta^{-1} (unit diagonal), mean Delta^{-1} mu.
  GaussianModel model;
};

[[nodiscard]] inline CorrelationNormalization to_correlation_model(const GaussianModel& model) {
  Eigen::VectorXd scale = model.covariance().diagonal().array().sqrt();
  const Eigen::VectorXd inv = scale.cwiseInverse();
  Eigen::MatrixXd r = inv.asDiagonal() * model.covariance() * inv.asDiagonal();
  r.diagonal().setOnes();
  Eigen::VectorXd mean = model.mean().cwiseProduct(inv);
  auto normalized = validate_model(std::move(mean), std::move(r), model.partition().block_sizes());
  return {std::move(scale), std::move(normalized)};
}

/// Stable 64-bit FNV-1a digest of (partition, mean, covariance) rendered as
/// 16 hex digits. Doubles are hashed through their IEEE-754 bit patterns in
/// little-endian byte order, so the value does not depend on the host.
[[nodiscard]] inline std::string fingerprint(const GaussianModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_u64 = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_double = [&](double x) {
    if (x == 0.0) x = 0.0;  // fold -0.0
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    mix_u64(bits);
  };
  mix_u64(static_cast<std::uint64_t>(model.dimension()));
  mix_u64(static_cast<std::uint64_t>(model.block_count()));
  for (Index s : model.partition().block_sizes()) mix_u64(static_cast<std::uint64_t>(s));
  for (Index i = 0; i < model.dimension(); ++i) mix_double(model.mean()(i));
  for (Index j = 0; j < model.dimension(); ++j)
    for (Index i = 0; i < model.dimension(); ++i) mix_double(model.covariance()(i, j));

  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = kHex[h & 0xfU];
    h >>= 4;
  }
  return out;
}

}  // namespace infodensity
