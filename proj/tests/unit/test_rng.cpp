#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lastiter/rng.hpp"

using lastiter::CounterRng;

TEST(SplitMix, MatchesReferenceFirstOutput) {
  // Reference SplitMix64 seeded with 0: first output is mix(0 + golden).
  EXPECT_EQ(lastiter::splitmix64_finalize(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
}

TEST(CounterRng, DrawIsPureFunctionOfKeyAndCounter) {
  CounterRng r(42, 7);
  for (std::uint64_t k = 0; k < 5; ++k) {
    const std::uint64_t expected =
        lastiter::splitmix64_finalize(r.key() + (k + 1) * 0x9E3779B97F4A7C15ULL);
    EXPECT_EQ(r.next(), expected) << "draw " << k;
  }
}

TEST(CounterRng, SameSeedSameStream) {
  CounterRng a(123);
  CounterRng b(123);
  for (int k = 0; k < 100; ++k) ASSERT_EQ(a.next(), b.next());
}

TEST(CounterRng, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 50; ++s) {
    firsts.insert(CounterRng(s).next());
    firsts.insert(CounterRng(0, s + 1).next());
  }
  EXPECT_EQ(firsts.size(), 100u);
}

TEST(CounterRng, SplitIgnoresParentPosition) {
  CounterRng parent(9);
  const CounterRng before = parent.split(3);
  for (int k = 0; k < 17; ++k) parent.next();
  CounterRng after = parent.split(3);
  CounterRng b = before;
  for (int k = 0; k < 10; ++k) ASSERT_EQ(b.next(), after.next());
}

TEST(CounterRng, SeekReplays) {
  CounterRng r(5);
  std::vector<std::uint64_t> draws;
  for (int k = 0; k < 10; ++k) draws.push_back(r.next());
  r.seek(4);
  EXPECT_EQ(r.next(), draws[4]);
  EXPECT_EQ(r.counter(), 5u);
}

TEST(CounterRng, UniformRange) {
  CounterRng r(1);
  double lo = 1.0;
  double hi = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(CounterRng, BelowIsRoughlyUniform) {
  CounterRng r(77);
  constexpr int kBins = 7;
  constexpr int kDraws = 70000;
  std::vector<int> counts(kBins, 0);
  for (int k = 0; k < kDraws; ++k) {
    const auto v = r.below(kBins);
    ASSERT_LT(v, static_cast<std::uint64_t>(kBins));
    ++counts[v];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; 99.99th percentile is about 27.9.
  EXPECT_LT(chi2, 27.9);
}

TEST(CounterRng, BelowOne) {
  CounterRng r(3);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(r.below(1), 0u);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(2024);
  constexpr int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = r.normal();
    ASSERT_TRUE(std::isfinite(z));
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}
