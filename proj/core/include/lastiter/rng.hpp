#pragma once

#include <cstdint>

namespace lastiter {

/// Counter-based, splittable random stream.
///
/// Draw k of the stream keyed by (seed, stream) is
///   splitmix64_finalize(key + (k + 1) * 0x9E3779B97F4A7C15)
/// where key = splitmix64_finalize(seed ^ splitmix64_finalize(stream + C)).
/// The output sequence is therefore a pure function of (seed, stream, k):
/// no global state, random access via seek(), and child streams obtained
/// by split() are independent of how many values the parent has drawn.
///
/// Derived variates (uniform, below, normal) are specified here rather than
/// delegated to <random> distributions, whose algorithms are
/// implementation-defined.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
  /// bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal variate (Box-Muller, one variate per two draws).
  double normal() noexcept;

  /// Independent child stream; does not advance this stream.
  CounterRng split(std::uint64_t child) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept { counter_ = counter; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept;

}  // namespace lastiter
