#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ofdma/assignment.hpp"
#include "ofdma/metrics.hpp"
#include "ofdma/power_allocation.hpp"
#include "oracles.hpp"

namespace ofdma {
namespace {

// Random assignment over N subcarriers where every user holds at least one.
Assignment random_assignment(std::mt19937_64& rng, std::size_t users, std::size_t n) {
  const auto grid = build_grid(n, 1);
  std::vector<std::size_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = i < users ? i : rng() % users;
  std::shuffle(owner.begin(), owner.end(), rng);
  return make_assignment(owner, users, grid);
}

std::vector<double> gains_of(const GainMatrix& g, const Assignment& a, std::size_t k) {
  std::vector<double> out;
  for (std::size_t n : a.subcarriers[k]) out.push_back(g[k][n]);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(OrderGains, SortsAndSetsZerosAside) {
  const std::vector<double> g{3.0, 0.0, 1.0, 2.0, 1.0};
  const std::vector<std::size_t> sub{0, 1, 2, 3, 4};
  const auto o = order_gains(g, sub);
  EXPECT_EQ(o.gains, (std::vector<double>{1.0, 1.0, 2.0, 3.0}));
  EXPECT_EQ(o.subcarrier, (std::vector<std::size_t>{2, 4, 3, 0}));
  EXPECT_EQ(o.zero_gain, (std::vector<std::size_t>{1}));
}

TEST(WaterfillCoefficients, FlatGains) {
  const std::vector<double> g(5, 2.0);
  const auto c = waterfill_coefficients(g);
  EXPECT_EQ(c.v, 0.0);
  EXPECT_EQ(c.e, 5.0);
  EXPECT_EQ(c.w(), 1.0);
}

TEST(WaterfillCoefficients, HandEvaluation) {
  const std::vector<double> g{1.0, 2.0};
  const auto c = waterfill_coefficients(g);
  EXPECT_DOUBLE_EQ(c.v, 0.5);
  EXPECT_DOUBLE_EQ(c.e, 3.0);
  EXPECT_NEAR(c.w(), std::sqrt(2.0), 1e-15);
}

TEST(WaterfillCoefficients, LogDomainMatchesProduct) {
  std::mt19937_64 rng(2);
  auto g = oracle::random_gains(rng, 40, 2.0);
  std::sort(g.begin(), g.end());
  double product = 1.0;
  for (std::size_t n = 1; n < g.size(); ++n) product *= g[n] / g[0];
  const double direct = std::pow(product, 1.0 / static_cast<double>(g.size()));
  EXPECT_NEAR(waterfill_coefficients(g).w(), direct, 1e-12 * direct);
}

TEST(WaterfillCoefficients, ZeroWeakestRejected) {
  const std::vector<double> g{0.0, 1.0};
  try {
    waterfill_coefficients(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroGainSubcarrier);
  }
}

TEST(LinearCoefficients, IdenticalUsers) {
  const std::vector<double> g{1.0, 2.0, 5.0};
  const auto c = waterfill_coefficients(g);
  const std::vector<WaterfillCoefficients> both{c, c};
  const std::vector<double> w{1.0, 1.0};
  EXPECT_DOUBLE_EQ(linear_coefficients(both, w).alpha[0], -1.0);

  const std::vector<double> flat(4, 3.0);
  const auto f = waterfill_coefficients(flat);
  const std::vector<WaterfillCoefficients> flat_pair{f, f};
  const auto sys = linear_coefficients(flat_pair, w);
  EXPECT_DOUBLE_EQ(sys.alpha[0], -1.0);
  EXPECT_NEAR(sys.beta[0], 0.0, 1e-15);
}

TEST(LinearCoefficients, MatchesNumericRederivation) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t users = 2 + rng() % 5;
    std::vector<std::vector<double>> per_user;
    std::vector<WaterfillCoefficients> coeffs;
    std::vector<double> w;
    for (std::size_t k = 0; k < users; ++k) {
      auto g = oracle::random_gains(rng, 1 + rng() % 20, 2.0);
      std::sort(g.begin(), g.end());
      per_user.push_back(g);
      coeffs.push_back(waterfill_coefficients(g));
      w.push_back(1.0 + static_cast<double>(rng() % 4));
    }
    std::vector<double> alpha;
    std::vector<double> beta;
    oracle::rederive_alpha_beta(per_user, w, alpha, beta);
    const auto sys = linear_coefficients(coeffs, w);
    for (std::size_t i = 0; i + 1 < users; ++i) {
      EXPECT_NEAR(sys.alpha[i], alpha[i], 1e-9 * std::abs(alpha[i]));
      EXPECT_NEAR(sys.beta[i], beta[i], 1e-9 * std::max(1.0, std::abs(beta[i])));
      EXPECT_LT(sys.alpha[i], 0.0);
    }
  }
}

TEST(SolvePowerSplit, SingleAndSymmetric) {
  EXPECT_EQ(solve_power_split({}, 3.0), (std::vector<double>{3.0}));
  const auto p = solve_power_split({{-1.0}, {0.0}}, 2.0);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0);
}

TEST(SolvePowerSplit, MatchesDenseSolve) {
  std::mt19937_64 rng(41);
  std::vector<WaterfillCoefficients> coeffs;
  for (int k = 0; k < 4; ++k) {
    auto g = oracle::random_gains(rng, 16);
    std::sort(g.begin(), g.end());
    coeffs.push_back(waterfill_coefficients(g));
  }
  const std::vector<double> w{1, 1, 4, 4};
  const auto sys = linear_coefficients(coeffs, w);
  const auto fast = solve_power_split(sys, 10.0);
  const auto dense = oracle::solve_arrow_dense(sys.alpha, sys.beta, 10.0);
  double scale = 10.0;
  for (double x : dense) scale = std::max(scale, std::abs(x));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(fast[k], dense[k], 1e-10 * scale);
  EXPECT_LT(split_residual(sys, fast, 10.0), 1e-10 * scale);
  EXPECT_NEAR(std::accumulate(fast.begin(), fast.end(), 0.0), 10.0, 1e-10 * scale);
}

TEST(RepairNegativeBudgets, Examples) {
  EXPECT_EQ(repair_negative_budgets({1.0, 2.0}).budgets, (std::vector<double>{1.0, 2.0}));
  const auto a = repair_negative_budgets({-1.0, 3.0});
  EXPECT_EQ(a.budgets, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(a.touched, (std::vector<bool>{true, true}));
  const auto b = repair_negative_budgets({-2.0, 1.0, 3.0});
  for (double x : b.budgets) EXPECT_NEAR(x, 2.0 / 3.0, 1e-15);
  // Group grows over -1, 0.5, 2 (sum 1.5); the largest budget is untouched.
  const auto c = repair_negative_budgets({5.0, -1.0, 2.0, 0.5});
  EXPECT_EQ(c.budgets, (std::vector<double>{5.0, 0.5, 0.5, 0.5}));
  EXPECT_EQ(c.touched, (std::vector<bool>{false, true, true, true}));
}

TEST(PruneAndWaterfill, FlatGivesUniform) {
  const std::vector<double> g(4, 7.0);
  for (double p : prune_and_waterfill(2.0, g).power) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(PruneAndWaterfill, PrunesWeakest) {
  const std::vector<double> g{1.0, 2.0};
  const auto low = prune_and_waterfill(0.3, g);
  EXPECT_EQ(low.power[0], 0.0);
  EXPECT_DOUBLE_EQ(low.power[1], 0.3);
  EXPECT_EQ(low.pruned, 1u);
  const auto high = prune_and_waterfill(1.5, g);
  EXPECT_DOUBLE_EQ(high.power[0], 0.5);
  EXPECT_DOUBLE_EQ(high.power[1], 1.0);
  EXPECT_EQ(high.pruned, 0u);
}

TEST(PruneAndWaterfill, ZeroBudgetEmptiesUser) {
  const std::vector<double> g{1.0, 2.0};
  const auto r = prune_and_waterfill(0.0, g);
  EXPECT_TRUE(r.pruned_to_empty);
  for (double p : r.power) EXPECT_EQ(p, 0.0);
}

// The bisection must stop where the one-at-a-time loop of the algorithm stops.
TEST(PruneAndWaterfill, MatchesSequentialLoop) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = oracle::random_gains(rng, 1 + rng() % 30, 3.0);
    std::sort(g.begin(), g.end());
    const double budget = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 1.0)(rng));
    std::size_t first = 0;
    auto v_of = [&](std::size_t s) {
      double v = 0.0;
      for (std::size_t n = s + 1; n < g.size(); ++n) v += (g[n] - g[s]) / (g[n] * g[s]);
      return v;
    };
    while (budget < v_of(first)) ++first;
    EXPECT_EQ(prune_and_waterfill(budget, g).pruned, first);
  }
}

TEST(ProposedPa, SingleUserFlat) {
  const auto grid = build_grid(8, 1);
  const auto a = make_assignment(std::vector<std::size_t>(8, 0), 1, grid);
  const GainMatrix g{std::vector<double>(8, 2.0)};
  const auto pa = proposed_pa(a, g, std::vector<double>{1.0}, 4.0);
  for (double p : pa.power) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(ProposedPa, SymmetricUsers) {
  const auto grid = build_grid(4, 1);
  const auto a = make_assignment(std::vector<std::size_t>{0, 1, 0, 1}, 2, grid);
  const GainMatrix g{{1.0, 9.0, 3.0, 9.0}, {9.0, 1.0, 9.0, 3.0}};
  const auto pa = proposed_pa(a, g, std::vector<double>{1.0, 1.0}, 2.0);
  EXPECT_NEAR(pa.budgets[0], 1.0, 1e-12);
  EXPECT_NEAR(pa.budgets[1], 1.0, 1e-12);
}

TEST(ProposedPa, LinearRatesProportionalWhenUntouched) {
  std::mt19937_64 rng(61);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 20; ++trial) {
    GainMatrix g;
    for (int k = 0; k < 4; ++k) g.push_back(oracle::random_gains(rng, 64, 1.0));
    const auto a = random_assignment(rng, 4, 64);
    const std::vector<double> w{1, 1, 4, 4};
    const auto pa = proposed_pa(a, g, w, 1000.0);
    if (pa.any_repaired() || pa.any_pruned()) continue;
    ++checked;
    std::vector<double> linear(4, 0.0);
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t n : a.subcarriers[k]) linear[k] += pa.power[n] * g[k][n] / w[k];
    for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(linear[k], linear[0], 1e-8 * linear[0]);
    EXPECT_NEAR(total_power_of(pa), 1000.0, 1e-9 * 1000.0);
  }
  EXPECT_GT(checked, 0);
}

TEST(UniformPa, EqualPowerAndBudgets) {
  const auto grid = build_grid(128, 4);
  std::vector<std::size_t> owner(grid.chunks);
  for (std::size_t m = 0; m < owner.size(); ++m) owner[m] = m % 3;
  const auto a = make_assignment(owner, 3, grid);
  const auto pa = uniform_pa(a, 128, 2.0);
  for (double p : pa.power) EXPECT_EQ(p, 2.0 / 128);
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(pa.budgets[k], 2.0 * static_cast<double>(a.subcarrier_count(k)) / 128);
    total += pa.budgets[k];
  }
  EXPECT_DOUBLE_EQ(total, 2.0);
}

TEST(ExactPaOracle, SingleUserIsWaterfilling) {
  std::mt19937_64 rng(71);
  const GainMatrix g{oracle::random_gains(rng, 16)};
  const auto a = make_assignment(std::vector<std::size_t>(16, 0), 1, build_grid(16, 1));
  const auto pa = exact_pa_oracle(a, g, std::vector<double>{1.0}, 0.7);
  auto sorted = g[0];
  std::sort(sorted.begin(), sorted.end());
  const auto wf = prune_and_waterfill(0.7, sorted);
  const auto ordered = order_gains(g[0], a.subcarriers[0]);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    EXPECT_NEAR(pa.power[ordered.subcarrier[i]], wf.power[i], 1e-10);
}

TEST(ExactPaOracle, SymmetricUsersAndFairness) {
  const auto a = make_assignment(std::vector<std::size_t>{0, 1, 0, 1}, 2, build_grid(4, 1));
  const GainMatrix g{{1.0, 9.0, 3.0, 9.0}, {9.0, 1.0, 9.0, 3.0}};
  const auto pa = exact_pa_oracle(a, g, std::vector<double>{1.0, 1.0}, 2.0);
  EXPECT_NEAR(pa.budgets[0], 1.0, 1e-10);
  EXPECT_NEAR(pa.budgets[1], 1.0, 1e-10);

  std::mt19937_64 rng(72);
  GainMatrix rg;
  for (int k = 0; k < 4; ++k) rg.push_back(oracle::random_gains(rng, 64, 1.0));
  const auto ra = random_assignment(rng, 4, 64);
  const std::vector<double> w{1, 1, 4, 4};
  const auto rpa = exact_pa_oracle(ra, rg, w, 50.0);
  const auto rates = user_rates(ra, rg, rpa.power, 64);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(rates[k] / w[k], rates[0] / w[0], 1e-6 * rates[0]);
  EXPECT_LT(deviation(rates, w), 1e-6);
}

}  // namespace
}  // namespace ofdma
