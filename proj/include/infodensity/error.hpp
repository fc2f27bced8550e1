#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace infodensity {

enum class ErrorCode {
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  BadPartition,
  InvalidInput,
  SameBlock,
  EigenvalueOutOfRange,
  OutOfDomain,
  Overflow,
  BlockNotScalar,
  CombinatorialLimit,
  ZeroVariance,
  BatchTooSmall,
  InvalidParameter,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::SameBlock: return "SameBlock";
    case ErrorCode::EigenvalueOutOfRange: return "EigenvalueOutOfRange";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::BlockNotScalar: return "BlockNotScalar";
    case ErrorCode::CombinatorialLimit: return "CombinatorialLimit";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
  }
  return "Unknown";
}

/// Base of every exception thrown by the library. `code()` identifies the
/// failure class; the subclasses below carry the extra payload some classes need.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(long pivot, double value, const std::string& what)
      : Error(ErrorCode::NotPositiveDefinite,
              what + ": Cholesky pivot " + std::to_string(pivot) + " is " + std::to_string(value)),
        pivot_(pivot),
        value_(value) {}

  /// Zero-based index of the first pivot at or below the threshold.
  [[nodiscard]] long pivot() const noexcept { return pivot_; }
  [[nodiscard]] double pivot_value() const noexcept { return value_; }

 private:
  long pivot_;
  double value_;
};

class OutOfDomainError : public Error {
 public:
  OutOfDomainError(double t, double lower, double upper)
      : Error(ErrorCode::OutOfDomain, "t = " + std::to_string(t) +
                                          " is outside the open CGF domain (" +
                                          std::to_string(lower) + ", " + std::to_string(upper) + ")"),
        t_(t),
        lower_(lower),
        upper_(upper) {}

  [[nodiscard]] double t() const noexcept { return t_; }
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }

 private:
  double t_;
  double lower_;
  double upper_;
};

class OverflowError : public Error {
 public:
  explicit OverflowError(int order)
      : Error(ErrorCode::Overflow,
              "cumulant of order " + std::to_string(order) + " exceeds the double range"),
        order_(order) {}

  [[nodiscard]] int order() const noexcept { return order_; }

 private:
  int order_;
};

class CombinatorialLimitError : public Error {
 public:
  [[nodiscard]] static std::string format_count(double count) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", count);
    return buf;
  }

  CombinatorialLimitError(int length, double count, std::uint64_t cap)
      : Error(ErrorCode::CombinatorialLimit,
              "enumerating " + format_count(count) + " rooted loops of length " +
                  std::to_string(length) + " exceeds the cap of " + std::to_string(cap)),
        length_(length),
        count_(count),
        cap_(cap) {}

  [[nodiscard]] int length() const noexcept { return length_; }
  [[nodiscard]] double count() const noexcept { return count_; }
  [[nodiscard]] std::uint64_t cap() const noexcept { return cap_; }

 private:
  int length_;
  double count_;
  std::uint64_t cap_;
};

}  // namespace infodensity
