#pragma once

#include <array>
#include <cstdint>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace infodensity {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// every output block is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] constexpr Counter operator()(Counter ctr) const noexcept {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  Key key_;
};

/// Maps 64 random bits to the open interval (0, 1): midpoints of the 2^-52
/// grid, so both ends stay exactly representable.
[[nodiscard]] constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// floor(bits * n / 2^64): maps 64 random bits onto [0, n) without division.
[[nodiscard]] constexpr std::uint64_t scale_to_range(std::uint64_t bits, std::uint64_t n) noexcept {
  const std::uint64_t a_lo = bits & 0xffffffffU, a_hi = bits >> 32;
  const std::uint64_t b_lo = n & 0xffffffffU, b_hi = n >> 32;
  const std::uint64_t lo_lo = a_lo * b_lo;
  const std::uint64_t hi_lo = a_hi * b_lo;
  const std::uint64_t lo_hi = a_lo * b_hi;
  const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffU) + lo_hi;
  return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
}

/// Standard normal quantile, -sqrt(2) erfc^{-1}(2u). Evaluated in plain double
/// (no long-double promotion) so results match across platforms.
[[nodiscard]] inline double normal_quantile(double u) {
  using Policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
  return -1.41421356237309504880 * boost::math::erfc_inv(2.0 * u, Policy());
}

/// Standard normal draws addressed by (chunk, draw, component). Two normals
/// come out of each Philox block: counter = (component / 2, draw, chunk lo, chunk hi).
class CounterNormalSource {
 public:
  explicit CounterNormalSource(std::uint64_t seed) noexcept : gen_(seed) {}

  /// Writes `count` normals for one draw into `out`.
  void fill(std::uint64_t chunk, std::uint32_t draw, double* out, std::uint32_t count) const {
    for (std::uint32_t pair = 0; 2 * pair < count; ++pair) {
      const auto r = gen_({pair, draw, static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)});
      out[2 * pair] = normal_quantile(to_open_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]));
      if (2 * pair + 1 < count) {
        out[2 * pair + 1] = normal_quantile(to_open_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]));
      }
    }
  }

  [[nodiscard]] const Philox4x32& generator() const noexcept { return gen_; }

 private:
  Philox4x32 gen_;
};

}  // namespace infodensity
