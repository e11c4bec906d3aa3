#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ofdma/assignment.hpp"
#include "ofdma/error.hpp"

namespace ofdma {

/// One user's subcarriers sorted by increasing gain. Ties keep ascending
/// subcarrier order. Subcarriers with zero gain are set aside: they can never
/// carry power under water-filling.
struct OrderedGains {
  std::vector<double> gains;
  std::vector<std::size_t> subcarrier;
  std::vector<std::size_t> zero_gain;
};

inline OrderedGains order_gains(std::span<const double> user_gains, std::span<const std::size_t> subcarriers) {
  std::vector<std::size_t> kept;
  OrderedGains out;
  for (std::size_t n : subcarriers) {
    if (user_gains[n] > 0.0) {
      kept.push_back(n);
    } else {
      out.zero_gain.push_back(n);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [&](std::size_t a, std::size_t b) { return user_gains[a] < user_gains[b]; });
  out.subcarrier = kept;
  out.gains.reserve(kept.size());
  for (std::size_t n : kept) out.gains.push_back(user_gains[n]);
  return out;
}

/// Water-filling constants of one user's ordered gains G_(1) <= ... <= G_(N_k).
struct WaterfillCoefficients {
  std::size_t count = 0;  // N_k
  double weakest = 0.0;   // G_(1)
  double v = 0.0;         // sum_{n>=2} (G_(n) - G_(1)) / (G_(n) G_(1))
  double e = 0.0;         // sum_n G_(n) / G_(1)
  double log_w = 0.0;     // ln W_k = (1/N_k) sum_{n>=2} ln(G_(n) / G_(1))

  double w() const { return std::exp(log_w); }
};

inline WaterfillCoefficients waterfill_coefficients(std::span<const double> ascending) {
  detail::require(!ascending.empty(), ErrorKind::InfeasibleAssignment, "user has no subcarriers");
  const double g1 = ascending.front();
  detail::require(g1 > 0.0, ErrorKind::ZeroGainSubcarrier, "weakest subcarrier has zero gain");
  WaterfillCoefficients c;
  c.count = ascending.size();
  c.weakest = g1;
  c.e = 1.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n < ascending.size(); ++n) {
    const double g = ascending[n];
    c.v += (g - g1) / (g * g1);
    c.e += g / g1;
    log_sum += std::log(g / g1);
  }
  c.log_w = log_sum / static_cast<double>(c.count);
  return c;
}

/// Rows 2..K of the linearized proportional-rate system
///   sum_k P_k = P_T,   P_1 + alpha_k P_k = beta_k  (k = 2..K),
/// stored at index k - 2 (user k is index k - 1 elsewhere).
struct LinearSystem {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Coefficients of the low-SNR system, with user 1 (index 0) as reference.
/// They follow from equating (1/gamma_k) sum_n p_{k,n} G_{k,n} across users
/// after substituting the per-user water-filling profile.
inline LinearSystem linear_coefficients(std::span<const WaterfillCoefficients> coeffs,
                                        std::span<const double> weights) {
  detail::require(coeffs.size() == weights.size() && !coeffs.empty(), ErrorKind::InvalidInput,
                  "one weight per user required");
  for (const auto& c : coeffs) {
    detail::require(c.count > 0, ErrorKind::InfeasibleAssignment, "user has no subcarriers");
    detail::require(c.weakest > 0.0, ErrorKind::ZeroGainSubcarrier, "weakest subcarrier has zero gain");
  }
  const auto& ref = coeffs[0];
  const double n1 = static_cast<double>(ref.count);
  const double g1 = weights[0];
  LinearSystem sys;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    const auto& c = coeffs[k];
    const double nk = static_cast<double>(c.count);
    const double gk = weights[k];
    const double a = -(g1 * c.e * n1 * c.weakest) / (gk * ref.e * nk * ref.weakest);
    const double b = (g1 * c.e * n1) / (gk * ref.e * ref.weakest)          //
                     - (g1 * n1 * nk) / (gk * ref.e * ref.weakest)          //
                     + a * c.v                                               //
                     + (n1 / ref.weakest) * (n1 / ref.e - 1.0) + ref.v;
    sys.alpha.push_back(a);
    sys.beta.push_back(b);
  }
  return sys;
}

/// Closed-form solution of the arrow-shaped system:
///   P_1 = (P_T - sum beta_k/alpha_k) / (1 - sum 1/alpha_k),  P_k = (beta_k - P_1) / alpha_k.
inline std::vector<double> solve_power_split(const LinearSystem& sys, double total_power) {
  double inv_sum = 0.0;
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < sys.alpha.size(); ++i) {
    detail::require(sys.alpha[i] != 0.0, ErrorKind::SingularSplit, "zero alpha coefficient");
    inv_sum += 1.0 / sys.alpha[i];
    ratio_sum += sys.beta[i] / sys.alpha[i];
  }
  const double denom = 1.0 - inv_sum;
  if (std::abs(denom) <= 1e-12 * (1.0 + std::abs(inv_sum))) {
    throw Error(ErrorKind::SingularSplit, "1 - sum 1/alpha_k vanishes");
  }
  std::vector<double> budgets(sys.alpha.size() + 1);
  budgets[0] = (total_power - ratio_sum) / denom;
  for (std::size_t i = 0; i < sys.alpha.size(); ++i) budgets[i + 1] = (sys.beta[i] - budgets[0]) / sys.alpha[i];
  return budgets;
}

/// Largest absolute row residual of the linear system at `budgets`.
inline double split_residual(const LinearSystem& sys, std::span<const double> budgets, double total_power) {
  double sum = 0.0;
  for (double p : budgets) sum += p;
  double worst = std::abs(sum - total_power);
  for (std::size_t i = 0; i < sys.alpha.size(); ++i) {
    worst = std::max(worst, std::abs(budgets[0] + sys.alpha[i] * budgets[i + 1] - sys.beta[i]));
  }
  return worst;
}

struct RepairResult {
  std::vector<double> budgets;
  std::vector<bool> touched;
};

/// If any budget is negative, the smallest budgets (ascending, ties by index)
/// are grouped until their sum is nonnegative and each member receives an
/// equal share of that sum. Other budgets are left as they are.
inline RepairResult repair_negative_budgets(std::vector<double> budgets) {
  RepairResult out{std::move(budgets), {}};
  out.touched.assign(out.budgets.size(), false);
  const bool any_negative = std::any_of(out.budgets.begin(), out.budgets.end(), [](double p) { return p < 0.0; });
  if (!any_negative) return out;

  std::vector<std::size_t> order(out.budgets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.budgets[a] < out.budgets[b]; });
  std::size_t group = 1;
  double partial = out.budgets[order[0]];
  while (partial < 0.0 && group < order.size()) {
    partial += out.budgets[order[group]];
    ++group;
  }
  const double share = partial / static_cast<double>(group);
  for (std::size_t i = 0; i < group; ++i) {
    out.budgets[order[i]] = share;
    out.touched[order[i]] = true;
  }
  return out;
}

/// Powers for one user, aligned with its ascending gains. The first `pruned`
/// entries were dropped by the pruning loop and carry zero power.
struct UserPower {
  std::vector<double> power;
  std::size_t pruned = 0;
  bool pruned_to_empty = false;
};

namespace detail {
// V for the active set ascending[first..]; used by the pruning loop.
inline double residual_power(std::span<const double> ascending, std::size_t first) {
  const double g1 = ascending[first];
  double v = 0.0;
  for (std::size_t n = first + 1; n < ascending.size(); ++n) v += (ascending[n] - g1) / (ascending[n] * g1);
  return v;
}
}  // namespace detail

/// Drops the weakest subcarriers while the budget is below V_k, then
/// water-fills: p_(1) = (P - V)/N_k and p_(n) = p_(1) + (G_(n) - G_(1))/(G_(n) G_(1)).
inline UserPower prune_and_waterfill(double budget, std::span<const double> ascending) {
  detail::require(budget >= 0.0, ErrorKind::InvalidInput, "budget must be nonnegative");
  detail::require(!ascending.empty(), ErrorKind::InfeasibleAssignment, "user has no subcarriers");
  detail::require(ascending.front() > 0.0, ErrorKind::ZeroGainSubcarrier, "weakest subcarrier has zero gain");
  UserPower out;
  out.power.assign(ascending.size(), 0.0);
  if (budget == 0.0) {
    out.pruned = ascending.size();
    out.pruned_to_empty = true;
    return out;
  }
  // V over the suffix starting at s is non-increasing in s, so the first
  // suffix the budget can fill is found by bisection; it is the same set the
  // one-at-a-time loop stops at.
  std::size_t lo = 0;
  std::size_t hi = ascending.size() - 1;  // single subcarrier: V = 0 <= budget
  if (budget >= detail::residual_power(ascending, 0)) {
    hi = 0;
  }
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (budget >= detail::residual_power(ascending, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::size_t first = hi;
  const double v = detail::residual_power(ascending, first);
  const double g1 = ascending[first];
  const double base = (budget - v) / static_cast<double>(ascending.size() - first);
  for (std::size_t n = first; n < ascending.size(); ++n) {
    out.power[n] = base + (ascending[n] - g1) / (ascending[n] * g1);
  }
  out.pruned = first;
  return out;
}

struct PowerAllocation {
  std::vector<double> budgets;                   // P_{T,k}
  std::vector<double> power;                     // p_n over all N subcarriers
  std::vector<std::vector<std::size_t>> active;  // retained subcarriers per user, by increasing gain
  std::vector<bool> repaired;
  std::vector<bool> pruned;
  bool split_fallback = false;

  bool any_repaired() const { return std::find(repaired.begin(), repaired.end(), true) != repaired.end(); }
  bool any_pruned() const { return std::find(pruned.begin(), pruned.end(), true) != pruned.end(); }
};

/// Per-user record "<user>: budget=<P> active=<n...> power=<p...>", 1-based
/// user index, subcarriers 0-based, 17 significant digits.
inline std::string to_text(const PowerAllocation& pa) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < pa.budgets.size(); ++k) {
    std::vector<std::size_t> sorted = pa.active[k];
    std::sort(sorted.begin(), sorted.end());
    os << (k + 1) << ": budget=" << pa.budgets[k] << " active=";
    for (std::size_t i = 0; i < sorted.size(); ++i) os << (i ? "," : "") << sorted[i];
    os << " power=";
    for (std::size_t i = 0; i < sorted.size(); ++i) os << (i ? "," : "") << pa.power[sorted[i]];
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline std::size_t system_size(const GainMatrix& gains) {
  require(!gains.empty(), ErrorKind::InvalidInput, "at least one user required");
  return gains.front().size();
}

inline std::vector<OrderedGains> order_all(const Assignment& a, const GainMatrix& gains) {
  require(a.users() == gains.size(), ErrorKind::InvalidInput, "assignment and gains disagree on user count");
  std::vector<OrderedGains> out;
  out.reserve(a.users());
  for (std::size_t k = 0; k < a.users(); ++k) {
    out.push_back(order_gains(gains[k], a.subcarriers[k]));
    require(!out.back().gains.empty(), ErrorKind::InfeasibleAssignment,
            "every user needs a subcarrier with positive gain");
  }
  return out;
}

// Water-fills each user's budget and writes the result into `pa`.
inline void fill_users(PowerAllocation& pa, const std::vector<OrderedGains>& ordered, std::size_t subcarriers) {
  pa.power.assign(subcarriers, 0.0);
  pa.active.assign(ordered.size(), {});
  pa.pruned.assign(ordered.size(), false);
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    const UserPower up = prune_and_waterfill(pa.budgets[k], ordered[k].gains);
    pa.pruned[k] = up.pruned > 0;
    for (std::size_t i = up.pruned; i < ordered[k].gains.size(); ++i) {
      assert(up.power[i] >= 0.0);
      pa.power[ordered[k].subcarrier[i]] = up.power[i];
      pa.active[k].push_back(ordered[k].subcarrier[i]);
    }
  }
  assert(std::abs(std::accumulate(pa.power.begin(), pa.power.end(), 0.0) -
                  std::accumulate(pa.budgets.begin(), pa.budgets.end(), 0.0)) <=
         1e-9 * std::max(1.0, std::accumulate(pa.budgets.begin(), pa.budgets.end(), 0.0)));
}

}  // namespace detail

/// Low-SNR linearized power allocation: solve the K x K system for the
/// per-user budgets, repair negative budgets, then prune and water-fill.
inline PowerAllocation proposed_pa(const Assignment& a, const GainMatrix& gains, std::span<const double> weights,
                                   double total_power) {
  detail::require(total_power > 0.0, ErrorKind::InvalidConfiguration, "total power must be positive");
  detail::require(weights.size() == a.users(), ErrorKind::InvalidInput, "one weight per user required");
  const std::size_t subcarriers = detail::system_size(gains);
  const auto ordered = detail::order_all(a, gains);

  PowerAllocation pa;
  std::vector<double> budgets;
  if (a.users() == 1) {
    budgets = {total_power};
  } else {
    std::vector<WaterfillCoefficients> coeffs;
    coeffs.reserve(ordered.size());
    for (const auto& og : ordered) coeffs.push_back(waterfill_coefficients(og.gains));
    try {
      budgets = solve_power_split(linear_coefficients(coeffs, weights), total_power);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularSplit) throw;
      const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
      budgets.clear();
      for (double w : weights) budgets.push_back(total_power * w / wsum);
      pa.split_fallback = true;
    }
  }
  RepairResult repaired = repair_negative_budgets(std::move(budgets));
  pa.budgets = std::move(repaired.budgets);
  pa.repaired = std::move(repaired.touched);
  detail::fill_users(pa, ordered, subcarriers);
  return pa;
}

/// p_n = P_T / N on every subcarrier.
inline PowerAllocation uniform_pa(const Assignment& a, std::size_t subcarriers, double total_power) {
  PowerAllocation pa;
  const double p = total_power / static_cast<double>(subcarriers);
  pa.power.assign(subcarriers, p);
  pa.repaired.assign(a.users(), false);
  pa.pruned.assign(a.users(), false);
  for (std::size_t k = 0; k < a.users(); ++k) {
    pa.budgets.push_back(p * static_cast<double>(a.subcarrier_count(k)));
    pa.active.push_back(a.subcarriers[k]);
  }
  return pa;
}

namespace detail {

// Budget needed by one user to reach N * R_k / gamma_k = level, using the
// largest active set whose water level stays above every retained 1/G.
struct BudgetCurve {
  std::vector<double> gains;        // ascending
  std::vector<double> v;            // V for suffix s
  std::vector<double> log_w;        // ln W for suffix s
  double weight = 1.0;

  BudgetCurve(std::vector<double> ascending, double w) : gains(std::move(ascending)), weight(w) {
    const std::size_t n = gains.size();
    v.assign(n, 0.0);
    log_w.assign(n, 0.0);
    double inv_tail = 0.0;  // sum_{j>s} 1/G_j
    double log_tail = 0.0;  // sum_{j>s} ln G_j
    for (std::size_t s = n; s-- > 0;) {
      const double tail_count = static_cast<double>(n - s - 1);
      v[s] = tail_count / gains[s] - inv_tail;
      log_w[s] = (log_tail - tail_count * std::log(gains[s])) / static_cast<double>(n - s);
      inv_tail += 1.0 / gains[s];
      log_tail += std::log(gains[s]);
    }
  }

  double budget(double level) const {
    const std::size_t n = gains.size();
    for (std::size_t s = 0; s < n; ++s) {
      const double count = static_cast<double>(n - s);
      const double exponent = std::numbers::ln2 * weight * level / count - log_w[s];
      // p_(1) = (P - V)/N_k = expm1(exponent)/G_(1) is nonnegative iff exponent >= 0.
      if (exponent >= 0.0 || s + 1 == n) return std::max(v[s] + (count / gains[s]) * std::expm1(exponent), 0.0);
    }
    return 0.0;
  }
};

}  // namespace detail

/// Solves the exact (nonlinear) proportional-rate budget split by bisection
/// on the common level t = N R_k / gamma_k. Each user's budget as a function
/// of t inverts the water-filling rate, shrinking the active set whenever the
/// inversion would fall below V_k.
inline PowerAllocation exact_pa_oracle(const Assignment& a, const GainMatrix& gains, std::span<const double> weights,
                                       double total_power) {
  detail::require(total_power > 0.0, ErrorKind::InvalidConfiguration, "total power must be positive");
  detail::require(weights.size() == a.users(), ErrorKind::InvalidInput, "one weight per user required");
  const std::size_t subcarriers = detail::system_size(gains);
  const auto ordered = detail::order_all(a, gains);

  std::vector<detail::BudgetCurve> curves;
  curves.reserve(ordered.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) curves.emplace_back(ordered[k].gains, weights[k]);
  auto total_at = [&](double level) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c.budget(level);
    return sum;
  };

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!(total_at(hi) > total_power)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw Error(ErrorKind::OracleFailure, "could not bracket the common rate level");
  }
  const double tol = 1e-12 * total_power;
  double level = 0.5 * (lo + hi);
  double total = total_at(level);
  for (int it = 0; it < 200 && std::abs(total - total_power) > 0.1 * tol; ++it) {
    if (total < total_power) {
      lo = level;
    } else {
      hi = level;
    }
    level = 0.5 * (lo + hi);
    total = total_at(level);
  }
  if (!(std::abs(total - total_power) <= tol)) {
    throw Error(ErrorKind::OracleFailure, "bisection did not meet the power tolerance");
  }

  PowerAllocation pa;
  for (const auto& c : curves) pa.budgets.push_back(c.budget(level));
  pa.repaired.assign(a.users(), false);
  detail::fill_users(pa, ordered, subcarriers);
  return pa;
}

/// Total emitted power sum_n p_n.
inline double total_power_of(const PowerAllocation& pa) {
  double sum = 0.0;
  for (double p : pa.power) sum += p;
  return sum;
}

}  // namespace ofdma
