#pragma once

#include <cstdint>
#include <memory>

#include <nlohmann/json.hpp>

namespace lastiter {

/// Streaming count / sum / sum of squares of finite doubles, held as exact
/// integers (every double is a multiple of 2^-1074). add() and merge() are
/// exact, so any partition of the inputs merges to a bitwise-identical state
/// and the reported moments do not depend on input order.
class MomentAccumulator {
 public:
  MomentAccumulator();
  MomentAccumulator(const MomentAccumulator& other);
  MomentAccumulator(MomentAccumulator&&) noexcept;
  MomentAccumulator& operator=(const MomentAccumulator& other);
  MomentAccumulator& operator=(MomentAccumulator&&) noexcept;
  ~MomentAccumulator();

  /// Throws PreconditionError on a non-finite value.
  void add(double x);
  void merge(const MomentAccumulator& other);

  std::uint64_t count() const noexcept;
  /// Exact mean, rounded toward zero to a double. Requires count >= 1.
  double mean() const;
  /// Unbiased sample variance (n - 1 denominator), exact up to the final
  /// rounding. Requires count >= 2.
  double variance() const;

  bool operator==(const MomentAccumulator& other) const;

  /// {"count", "sum", "sum_sq", "scale_bits"} with hexadecimal integers.
  nlohmann::json to_json() const;
  static MomentAccumulator from_json(const nlohmann::json& j);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lastiter
