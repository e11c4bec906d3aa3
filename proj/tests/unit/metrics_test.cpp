#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ofdma/metrics.hpp"
#include "oracles.hpp"

namespace ofdma {
namespace {

TEST(Deviation, ProportionalIsZero) {
  const std::vector<double> w{1, 1, 4, 4};
  const std::vector<double> r{0.5, 0.5, 2.0, 2.0};
  EXPECT_NEAR(deviation(r, w), 0.0, 1e-12);
}

TEST(Deviation, MaximallyUnfair) {
  const std::vector<double> w{1, 1};
  const std::vector<double> r{1, 0};
  EXPECT_DOUBLE_EQ(deviation(r, w), 1.0);
}

TEST(Deviation, UndefinedCases) {
  const std::vector<double> w{1, 1};
  const std::vector<double> zero{0, 0};
  try {
    deviation(zero, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UndefinedDeviation);
  }
  const std::vector<double> one{1};
  EXPECT_THROW(deviation(one, one), Error);
}

TEST(Deviation, MatchesOracleAndProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const std::vector<double> w{1, 1, 4, 4};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(4);
    for (auto& x : r) x = u(rng);
    const double d = deviation(r, w);
    EXPECT_NEAR(d, oracle::deviation(r, w), 1e-14);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0 + 1e-15);

    std::vector<double> scaled = r;
    for (auto& x : scaled) x *= 7.5;
    EXPECT_NEAR(deviation(scaled, w), d, 1e-14);

    std::vector<std::size_t> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pr(4);
    std::vector<double> pw(4);
    for (std::size_t i = 0; i < 4; ++i) {
      pr[i] = r[perm[i]];
      pw[i] = w[perm[i]];
    }
    EXPECT_NEAR(deviation(pr, pw), d, 1e-14);
  }
}

TEST(MinWeightedRate, Examples) {
  const std::vector<double> w{1, 2, 4};
  EXPECT_DOUBLE_EQ(min_weighted_rate(std::vector<double>{0.5, 1.0, 2.0}, w), 0.5);
  EXPECT_EQ(min_weighted_rate(std::vector<double>{0.5, 0.0, 2.0}, w), 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r{u(rng), u(rng), u(rng)};
    const double expect = std::min({r[0] / 1, r[1] / 2, r[2] / 4});
    EXPECT_EQ(min_weighted_rate(r, w), expect);
  }
  EXPECT_EQ(min_rate(std::vector<double>{3, 1, 2}), 1.0);
  EXPECT_EQ(sum_rate(std::vector<double>{3, 1, 2}), 6.0);
}

TEST(NormalizeVsOracle, Examples) {
  EXPECT_EQ(normalize_vs_oracle(2.5, 2.5), 1.0);
  EXPECT_EQ(normalize_vs_oracle(0.0, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(normalize_vs_oracle(3.0, 2.0), 1.5);
  try {
    normalize_vs_oracle(1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UndefinedRatio);
  }
  const auto v = normalize_vs_oracle(std::vector<double>{1, 4}, std::vector<double>{2, 2});
  EXPECT_EQ(v, (std::vector<double>{0.5, 2.0}));
}

TEST(MeanAccumulator, MeanVarianceHalfWidth) {
  MeanAccumulator acc;
  for (double x : {1.0, 2.0, 3.0, 4.0}) acc.add(x);
  EXPECT_EQ(acc.count(), 4u);
  EXPECT_DOUBLE_EQ(acc.mean(), 2.5);
  EXPECT_NEAR(acc.variance(), 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(acc.half_width(), 1.959963984540054 * std::sqrt(5.0 / 12.0), 1e-12);
  EXPECT_EQ(MeanAccumulator{}.count(), 0u);
}

}  // namespace
}  // namespace ofdma
