#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/info_measures.hpp"
#include "infodensity/linalg.hpp"
#include "infodensity/model.hpp"
#include "infodensity/philox.hpp"

namespace infodensity {

/// Chunking and parallelism. Output depends on `chunk_size` but never on `threads`.
struct SamplingOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  Index chunk_size = 1 << 14;
};

/// Monte Carlo realizations of i_d.
struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string fingerprint;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

namespace detail {

[[nodiscard]] inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(chunk) for every chunk index on a small worker pool.
template <typename Body>
void for_each_chunk(std::uint64_t chunks, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(chunks, 1)));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) body(c);
    });
  }
}

}  // namespace detail

/// Draws n points x = mu + L z (L the Cholesky factor of Sigma, z standard
/// normal from the counter-based source keyed by `seed`) and evaluates i_d
/// at each. Draw k lives in chunk k / chunk_size at position k % chunk_size.
[[nodiscard]] inline SampleBatch sample_density(const GaussianModel& model, Index n, std::uint64_t seed,
                                                const SamplingOptions& options = {}) {
  if (n < 2) throw Error(ErrorCode::BatchTooSmall, "a sample batch needs n >= 2, got " + std::to_string(n));
  if (options.chunk_size < 1 || options.chunk_size > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidParameter, "chunk size out of range");
  }
  const Index d = model.dimension();
  const PhiMatrix phi = compute_phi(model);
  const double mi = multiinformation(model);
  const Eigen::MatrixXd lower = model.cholesky().matrixL();
  const CounterNormalSource source(seed);

  SampleBatch batch;
  batch.seed = seed;
  batch.fingerprint = fingerprint(model);
  batch.values.assign(static_cast<std::size_t>(n), 0.0);

  const auto chunk_size = static_cast<std::uint64_t>(options.chunk_size);
  const std::uint64_t chunks = (static_cast<std::uint64_t>(n) + chunk_size - 1) / chunk_size;
  detail::for_each_chunk(chunks, detail::resolve_threads(options.threads), [&](std::uint64_t chunk) {
    Eigen::VectorXd z(d);
    Eigen::VectorXd x(d);
    const std::uint64_t begin = chunk * chunk_size;
    const std::uint64_t end = std::min<std::uint64_t>(begin + chunk_size, static_cast<std::uint64_t>(n));
    for (std::uint64_t k = begin; k < end; ++k) {
      source.fill(chunk, static_cast<std::uint32_t>(k - begin), z.data(), static_cast<std::uint32_t>(d));
      x.noalias() = lower.triangularView<Eigen::Lower>() * z;
      x += model.mean();
      batch.values[k] = density_at(model, phi, mi, x);
    }
  });
  return batch;
}

/// n standard normal draws from the same source (component 0 of each draw).
[[nodiscard]] inline std::vector<double> standard_normal_draws(Index n, std::uint64_t seed,
                                                               const SamplingOptions& options = {}) {
  if (n < 0) throw Error(ErrorCode::InvalidParameter, "negative draw count");
  const CounterNormalSource source(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  const auto chunk_size = static_cast<std::uint64_t>(options.chunk_size);
  const std::uint64_t chunks = (static_cast<std::uint64_t>(n) + chunk_size - 1) / chunk_size;
  detail::for_each_chunk(chunks, detail::resolve_threads(options.threads), [&](std::uint64_t chunk) {
    const std::uint64_t begin = chunk * chunk_size;
    const std::uint64_t end = std::min<std::uint64_t>(begin + chunk_size, static_cast<std::uint64_t>(n));
    for (std::uint64_t k = begin; k < end; ++k) {
      source.fill(chunk, static_cast<std::uint32_t>(k - begin), &out[k], 1);
    }
  });
  return out;
}

/// Unbiased k-statistics k_1..k_4 with standard errors. Orders the batch is
/// too small for (k_3 needs n >= 3, k_4 needs n >= 4) are NaN.
///
/// se_1 = sqrt(k_2 / n), se_2 = sqrt(k_4 / n + 2 k_2^2 / (n - 1)). se_3 and
/// se_4 are delta-method errors from the empirical influence functions of
/// the third and fourth central moments.
struct KStatistics {
  std::size_t n = 0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
  double se1 = 0.0, se2 = 0.0, se3 = 0.0, se4 = 0.0;

  [[nodiscard]] double k(int order) const {
    switch (order) {
      case 1: return k1;
      case 2: return k2;
      case 3: return k3;
      case 4: return k4;
      default: throw Error(ErrorCode::InvalidParameter, "k-statistics are available up to order 4");
    }
  }
  [[nodiscard]] double se(int order) const {
    switch (order) {
      case 1: return se1;
      case 2: return se2;
      case 3: return se3;
      case 4: return se4;
      default: throw Error(ErrorCode::InvalidParameter, "k-statistics are available up to order 4");
    }
  }
};

[[nodiscard]] inline KStatistics k_statistics(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 2) {
    throw Error(ErrorCode::BatchTooSmall, "k-statistics need at least 2 values, got " + std::to_string(count));
  }
  const double n = static_cast<double>(count);
  const double mean = pairwise_sum(values) / n;

  std::vector<double> c2(count), c3(count), c4(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double c = values[i] - mean;
    c2[i] = c * c;
    c3[i] = c2[i] * c;
    c4[i] = c2[i] * c2[i];
  }
  const double m2 = pairwise_sum(c2) / n;
  const double m3 = pairwise_sum(c3) / n;
  const double m4 = pairwise_sum(c4) / n;

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  KStatistics ks;
  ks.n = count;
  ks.k1 = mean;
  ks.k2 = n / (n - 1.0) * m2;
  ks.k3 = count >= 3 ? n * n / ((n - 1.0) * (n - 2.0)) * m3 : kNaN;
  ks.k4 = count >= 4 ? n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0))
                     : kNaN;

  ks.se1 = std::sqrt(ks.k2 / n);
  ks.se2 = count >= 4 ? std::sqrt(std::max(0.0, ks.k4 / n + 2.0 * ks.k2 * ks.k2 / (n - 1.0))) : kNaN;

  if (count >= 4) {
    // Influence functions; reuse the scratch buffers.
    for (std::size_t i = 0; i < count; ++i) {
      const double c = values[i] - mean;
      const double if3 = c3[i] - m3 - 3.0 * m2 * c;
      const double if4 = c4[i] - m4 - 4.0 * m3 * c - 6.0 * m2 * (c2[i] - m2);
      c3[i] = if3 * if3;
      c4[i] = if4 * if4;
    }
    ks.se3 = std::sqrt(pairwise_sum(c3) / (n - 1.0) / n);
    ks.se4 = std::sqrt(pairwise_sum(c4) / (n - 1.0) / n);
  } else {
    ks.se3 = kNaN;
    ks.se4 = kNaN;
  }
  return ks;
}

[[nodiscard]] inline KStatistics k_statistics(const SampleBatch& batch) { return k_statistics(batch.values); }

inline constexpr double kZThreshold = 5.0;

struct ValidationRow {
  int order;
  double analytic;
  double empirical;
  double se;
  double z;
  bool pass;
};

struct ValidationReport {
  std::string fingerprint;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<ValidationRow> rows;

  [[nodiscard]] bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const ValidationRow& r) { return r.pass; });
  }
};

/// Row-wise z-scores of empirical k-statistics against analytic cumulants.
/// A zero standard error (degenerate batch) passes only on agreement to 1e-9.
[[nodiscard]] inline std::vector<ValidationRow> compare_cumulants(const CumulantSequence& analytic,
                                                                  const KStatistics& ks, int max_order) {
  if (max_order < 1 || max_order > 4) {
    throw Error(ErrorCode::InvalidParameter, "Monte Carlo validation supports orders 1..4");
  }
  if (analytic.order() < max_order) {
    throw Error(ErrorCode::InvalidParameter, "not enough analytic cumulants");
  }
  std::vector<ValidationRow> rows;
  for (int l = 1; l <= max_order; ++l) {
    ValidationRow row{l, analytic.at(l), ks.k(l), ks.se(l), 0.0, false};
    const double diff = row.empirical - row.analytic;
    if (!std::isfinite(row.empirical) || std::isnan(row.se)) {
      row.z = std::numeric_limits<double>::quiet_NaN();
      row.pass = false;
    } else if (row.se > 0.0) {
      row.z = diff / row.se;
      row.pass = std::abs(row.z) <= kZThreshold;
    } else {
      const bool agree = std::abs(diff) <= 1e-9 * std::max(1.0, std::abs(row.analytic));
      row.z = agree ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
      row.pass = agree;
    }
    rows.push_back(row);
  }
  return rows;
}

[[nodiscard]] inline ValidationReport mc_validate(const GaussianModel& model, Index n, std::uint64_t seed,
                                                  int max_order, const SamplingOptions& options = {}) {
  if (max_order < 1 || max_order > 4) {
    throw Error(ErrorCode::InvalidParameter, "Monte Carlo validation supports orders 1..4");
  }
  const SampleBatch batch = sample_density(model, n, seed, options);
  const KStatistics ks = k_statistics(batch);
  ValidationReport report;
  report.fingerprint = batch.fingerprint;
  report.n = batch.size();
  report.seed = seed;
  report.rows = compare_cumulants(cumulants(model, max_order), ks, max_order);
  return report;
}

struct EmpiricalCgf {
  double value;
  double se;  // bootstrap standard error
};

/// ln mean(exp(t v)) with a seeded bootstrap standard error.
[[nodiscard]] inline EmpiricalCgf empirical_cgf(std::span<const double> values, double t, int replicates,
                                                std::uint64_t seed) {
  if (values.size() < 2) throw Error(ErrorCode::BatchTooSmall, "empirical CGF needs at least 2 values");
  if (replicates < 2) throw Error(ErrorCode::InvalidParameter, "bootstrap needs at least 2 replicates");
  const std::size_t count = values.size();
  const double shift = t >= 0.0 ? t * *std::max_element(values.begin(), values.end())
                                : t * *std::min_element(values.begin(), values.end());
  std::vector<double> e(count);
  for (std::size_t i = 0; i < count; ++i) e[i] = std::exp(t * values[i] - shift);
  const double log_n = std::log(static_cast<double>(count));
  const double value = shift + std::log(pairwise_sum(e)) - log_n;

  const Philox4x32 gen(seed);
  std::vector<double> estimates(static_cast<std::size_t>(replicates));
  std::vector<double> resample(count);
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < count; i += 2) {
      const auto bits = gen({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                             static_cast<std::uint32_t>(r), 0xB0075u});
      const std::uint64_t a = (static_cast<std::uint64_t>(bits[0]) << 32) | bits[1];
      const std::uint64_t b = (static_cast<std::uint64_t>(bits[2]) << 32) | bits[3];
      resample[i] = e[static_cast<std::size_t>(scale_to_range(a, count))];
      if (i + 1 < count) resample[i + 1] = e[static_cast<std::size_t>(scale_to_range(b, count))];
    }
    estimates[static_cast<std::size_t>(r)] = shift + std::log(pairwise_sum(resample)) - log_n;
  }
  const double mean = pairwise_sum(estimates) / replicates;
  double ss = 0.0;
  for (double v : estimates) ss += (v - mean) * (v - mean);
  return {value, std::sqrt(ss / (replicates - 1))};
}

}  // namespace infodensity
