#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ofdma/error.hpp"

namespace ofdma {

/// Per-user, per-subcarrier values indexed [user][subcarrier].
using GainMatrix = std::vector<std::vector<double>>;

/// Partition of a contiguous band of subcarriers into chunks of L; the last
/// chunk absorbs the remainder. `first` is the absolute index of the band's
/// first subcarrier, so the same type describes a sub-band of a larger system.
struct ChunkGrid {
  std::size_t first = 0;
  std::size_t subcarriers = 0;  // N (within this grid)
  std::size_t chunk_size = 0;   // L
  std::size_t chunks = 0;       // M = floor(N / L)

  std::size_t begin(std::size_t m) const { return first + m * chunk_size; }
  std::size_t end(std::size_t m) const {
    return m + 1 == chunks ? first + subcarriers : first + (m + 1) * chunk_size;
  }
  std::size_t size(std::size_t m) const { return end(m) - begin(m); }
};

inline ChunkGrid build_grid(std::size_t subcarriers, std::size_t chunk_size, std::size_t first = 0) {
  detail::require(chunk_size >= 1 && chunk_size <= subcarriers, ErrorKind::InvalidConfiguration,
                  "chunk size must satisfy 1 <= L <= N");
  return ChunkGrid{first, subcarriers, chunk_size, subcarriers / chunk_size};
}

/// R_{k,m} and, once normalized_rates has run, the normalized rate.
struct RateTable {
  std::size_t users = 0;
  std::size_t chunks = 0;
  std::vector<double> rate;        // row-major [user][chunk]
  std::vector<double> normalized;  // empty until normalized_rates

  double& at(std::size_t k, std::size_t m) { return rate[k * chunks + m]; }
  double at(std::size_t k, std::size_t m) const { return rate[k * chunks + m]; }
  double norm_at(std::size_t k, std::size_t m) const { return normalized[k * chunks + m]; }
};

inline double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

/// R_{k,m} = (1/denominator) sum_{n in chunk m} log2(1 + power * G_{k,n}).
/// Single-cell callers use denominator = N; multi-cell sub-band grids divide by
/// the system-wide subcarrier count.
inline RateTable chunk_rates(const GainMatrix& gains, const ChunkGrid& grid, double power,
                             std::size_t denominator) {
  detail::require(power >= 0.0, ErrorKind::InvalidInput, "power must be nonnegative");
  detail::require(denominator > 0, ErrorKind::InvalidInput, "rate denominator must be positive");
  RateTable table;
  table.users = gains.size();
  table.chunks = grid.chunks;
  table.rate.assign(table.users * table.chunks, 0.0);
  const double scale = 1.0 / static_cast<double>(denominator);
  for (std::size_t k = 0; k < table.users; ++k) {
    detail::require(gains[k].size() >= grid.first + grid.subcarriers, ErrorKind::InvalidInput,
                    "gain vector shorter than grid");
    for (std::size_t m = 0; m < grid.chunks; ++m) {
      double acc = 0.0;
      for (std::size_t n = grid.begin(m); n < grid.end(m); ++n) acc += log2_1p(power * gains[k][n]);
      table.at(k, m) = scale * acc;
    }
  }
  return table;
}

inline RateTable chunk_rates(const GainMatrix& gains, const ChunkGrid& grid, double power) {
  return chunk_rates(gains, grid, power, grid.subcarriers);
}

/// Fills normalized[k,m] = R_{k,m} / mean_k' R_{k',m}. A chunk where every
/// user has rate zero carries no preference and is set to 1 for all users.
inline void normalized_rates(RateTable& table) {
  table.normalized.assign(table.rate.size(), 1.0);
  for (std::size_t m = 0; m < table.chunks; ++m) {
    double sum = 0.0;
    for (std::size_t k = 0; k < table.users; ++k) sum += table.at(k, m);
    if (sum <= 0.0) continue;
    const double mean = sum / static_cast<double>(table.users);
    for (std::size_t k = 0; k < table.users; ++k) table.normalized[k * table.chunks + m] = table.at(k, m) / mean;
  }
}

/// Chunk ownership. Theta_k and Omega_k are kept sorted ascending.
struct Assignment {
  std::vector<std::size_t> owner;                      // chunk -> user
  std::vector<std::vector<std::size_t>> chunks;        // Theta_k
  std::vector<std::vector<std::size_t>> subcarriers;   // Omega_k, absolute indices

  std::size_t users() const { return chunks.size(); }
  std::size_t subcarrier_count(std::size_t k) const { return subcarriers[k].size(); }
};

inline Assignment make_assignment(std::span<const std::size_t> owner, std::size_t users, const ChunkGrid& grid) {
  detail::require(owner.size() == grid.chunks, ErrorKind::InvalidInput, "owner vector must cover every chunk");
  Assignment a;
  a.owner.assign(owner.begin(), owner.end());
  a.chunks.resize(users);
  a.subcarriers.resize(users);
  for (std::size_t m = 0; m < grid.chunks; ++m) {
    detail::require(owner[m] < users, ErrorKind::InvalidInput, "chunk owner out of range");
    a.chunks[owner[m]].push_back(m);
    for (std::size_t n = grid.begin(m); n < grid.end(m); ++n) a.subcarriers[owner[m]].push_back(n);
  }
  return a;
}

/// Plain-text record: one line per user, "<user>:" followed by its sorted
/// chunk indices, both 1-based.
inline std::string to_text(const Assignment& a) {
  std::ostringstream os;
  for (std::size_t k = 0; k < a.users(); ++k) {
    os << (k + 1) << ':';
    for (std::size_t m : a.chunks[k]) os << ' ' << (m + 1);
    os << '\n';
  }
  return os.str();
}

/// True if every chunk has exactly one owner and the subcarrier sets tile the grid.
inline bool is_partition(const Assignment& a, const ChunkGrid& grid) {
  if (a.owner.size() != grid.chunks) return false;
  std::vector<int> seen(grid.chunks, 0);
  std::size_t total = 0;
  for (std::size_t k = 0; k < a.users(); ++k) {
    for (std::size_t m : a.chunks[k]) {
      if (m >= grid.chunks || a.owner[m] != k) return false;
      ++seen[m];
    }
    total += a.subcarrier_count(k);
  }
  for (int s : seen)
    if (s != 1) return false;
  return total == grid.subcarriers;
}

/// Comparison tally for one class of arg-max/arg-min scans. A scan over n
/// candidates counts n under the "candidates" convention and n - 1 under the
/// "pairwise" convention.
struct ScanTally {
  std::size_t scans = 0;
  std::size_t candidates = 0;
  std::size_t pairwise = 0;

  void record(std::size_t n) {
    ++scans;
    candidates += n;
    pairwise += n == 0 ? 0 : n - 1;
  }
};

struct ComparisonCount {
  ScanTally phase1_argmax;  // best chunk per user (proposed) or per serial user (Shen)
  ScanTally phase1_argmin;  // user selection in phase 1 (proposed only)
  ScanTally phase2_argmin;  // user with smallest R_k / gamma_k
  ScanTally phase2_argmax;  // best remaining chunk for that user
};

struct SaResult {
  Assignment assignment;
  std::vector<double> accumulated;  // R_k, sum of assigned R_{k,m}
  ComparisonCount comparisons;
};

namespace detail {

inline void check_sa_inputs(const RateTable& table, std::span<const double> weights, const ChunkGrid& grid) {
  require(table.chunks == grid.chunks, ErrorKind::InvalidInput, "rate table does not match grid");
  require(weights.size() == table.users, ErrorKind::InvalidInput, "one weight per user required");
  require(table.users >= 1, ErrorKind::InvalidInput, "at least one user required");
  for (double w : weights) require(w > 0.0, ErrorKind::InvalidInput, "rate weights must be positive");
  require(grid.chunks >= table.users, ErrorKind::InfeasibleConfiguration, "fewer chunks than users");
}

inline void erase_value(std::vector<std::size_t>& v, std::size_t value) {
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (*it == value) {
      v.erase(it);
      return;
    }
  }
}

/// Lowest-index arg-max of score(m) over m in `pool` (pool is ascending).
template <class Score>
std::size_t argmax_over(const std::vector<std::size_t>& pool, Score score, ScanTally& tally) {
  tally.record(pool.size());
  std::size_t best = pool.front();
  double best_value = score(best);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double v = score(pool[i]);
    if (v > best_value) {
      best_value = v;
      best = pool[i];
    }
  }
  return best;
}

template <class Score>
std::size_t argmin_over(const std::vector<std::size_t>& pool, Score score, ScanTally& tally) {
  tally.record(pool.size());
  std::size_t best = pool.front();
  double best_value = score(best);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double v = score(pool[i]);
    if (v < best_value) {
      best_value = v;
      best = pool[i];
    }
  }
  return best;
}

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

/// Second phase shared by the proposed and Shen schemes: the user with the
/// smallest R_k / gamma_k takes its best remaining chunk by `score`.
template <class Score>
void fill_remaining(std::vector<std::size_t>& remaining, const RateTable& table, std::span<const double> weights,
                    std::vector<std::size_t>& owner, std::vector<double>& accumulated, ComparisonCount& count,
                    Score score) {
  const std::vector<std::size_t> everyone = iota(table.users);
  while (!remaining.empty()) {
    const std::size_t k = argmin_over(
        everyone, [&](std::size_t u) { return accumulated[u] / weights[u]; }, count.phase2_argmin);
    const std::size_t m = argmax_over(
        remaining, [&](std::size_t c) { return score(k, c); }, count.phase2_argmax);
    owner[m] = k;
    accumulated[k] += table.at(k, m);
    erase_value(remaining, m);
  }
}

}  // namespace detail

/// Proposed chunk assignment. Phase 1 gives each user one chunk: every
/// unserved user registers its best remaining chunk by normalized rate, and
/// the user whose registered normalized rate over weight is smallest is
/// served. Phase 2 repeatedly serves the user with the smallest R_k / gamma_k
/// with its best remaining chunk by normalized rate. Ties go to the lowest index.
inline SaResult proposed_sa(RateTable table, std::span<const double> weights, const ChunkGrid& grid) {
  detail::check_sa_inputs(table, weights, grid);
  if (table.normalized.size() != table.rate.size()) normalized_rates(table);

  const std::size_t users = table.users;
  SaResult out;
  out.accumulated.assign(users, 0.0);
  std::vector<std::size_t> owner(grid.chunks, 0);
  std::vector<std::size_t> remaining = detail::iota(grid.chunks);
  std::vector<std::size_t> unserved = detail::iota(users);
  std::vector<std::size_t> registered(users, 0);

  auto norm = [&](std::size_t k, std::size_t m) { return table.norm_at(k, m); };
  while (!unserved.empty()) {
    for (std::size_t k : unserved) {
      registered[k] = detail::argmax_over(
          remaining, [&](std::size_t m) { return norm(k, m); }, out.comparisons.phase1_argmax);
    }
    const std::size_t k_star = detail::argmin_over(
        unserved, [&](std::size_t k) { return norm(k, registered[k]) / weights[k]; }, out.comparisons.phase1_argmin);
    const std::size_t m_star = registered[k_star];
    owner[m_star] = k_star;
    out.accumulated[k_star] += table.at(k_star, m_star);
    detail::erase_value(remaining, m_star);
    detail::erase_value(unserved, k_star);
  }
  detail::fill_remaining(remaining, table, weights, owner, out.accumulated, out.comparisons, norm);

  out.assignment = make_assignment(owner, users, grid);
  assert(is_partition(out.assignment, grid));
  return out;
}

/// Chunk-level variant of Shen et al.'s greedy assignment: users in index
/// order take their best remaining chunk, then the user with the smallest
/// R_k / gamma_k takes its best remaining chunk. Chunks are ranked by average
/// rate per subcarrier; with L = 1 this is the per-subcarrier original.
inline SaResult shen_sa(const RateTable& table, std::span<const double> weights, const ChunkGrid& grid) {
  detail::check_sa_inputs(table, weights, grid);
  const std::size_t users = table.users;
  SaResult out;
  out.accumulated.assign(users, 0.0);
  std::vector<std::size_t> owner(grid.chunks, 0);
  std::vector<std::size_t> remaining = detail::iota(grid.chunks);

  auto average = [&](std::size_t k, std::size_t m) {
    return table.at(k, m) / static_cast<double>(grid.size(m));
  };
  for (std::size_t k = 0; k < users; ++k) {
    const std::size_t m = detail::argmax_over(
        remaining, [&](std::size_t c) { return average(k, c); }, out.comparisons.phase1_argmax);
    owner[m] = k;
    out.accumulated[k] += table.at(k, m);
    detail::erase_value(remaining, m);
  }
  detail::fill_remaining(remaining, table, weights, owner, out.accumulated, out.comparisons, average);

  out.assignment = make_assignment(owner, users, grid);
  assert(is_partition(out.assignment, grid));
  return out;
}

/// Channel-independent round robin: chunk m goes to user m mod K.
inline Assignment static_sa(std::size_t users, const ChunkGrid& grid) {
  detail::require(users >= 1, ErrorKind::InvalidInput, "at least one user required");
  detail::require(grid.chunks >= users, ErrorKind::InfeasibleConfiguration, "fewer chunks than users");
  std::vector<std::size_t> owner(grid.chunks);
  for (std::size_t m = 0; m < grid.chunks; ++m) owner[m] = m % users;
  return make_assignment(owner, users, grid);
}

enum class SaScheme { Proposed, Shen, Static };

inline SaResult run_sa(SaScheme scheme, const RateTable& table, std::span<const double> weights,
                       const ChunkGrid& grid) {
  switch (scheme) {
    case SaScheme::Proposed: return proposed_sa(table, weights, grid);
    case SaScheme::Shen: return shen_sa(table, weights, grid);
    case SaScheme::Static: {
      SaResult out;
      out.assignment = static_sa(table.users, grid);
      out.accumulated.assign(table.users, 0.0);
      for (std::size_t m = 0; m < grid.chunks; ++m) {
        const std::size_t k = out.assignment.owner[m];
        out.accumulated[k] += table.at(k, m);
      }
      return out;
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown SA scheme");
}

/// R_k = (1/denominator) sum_{n in Omega_k} log2(1 + p_n G_{k,n}).
inline std::vector<double> user_rates(const Assignment& a, const GainMatrix& gains, std::span<const double> power,
                                      std::size_t denominator) {
  std::vector<double> rates(a.users(), 0.0);
  const double scale = 1.0 / static_cast<double>(denominator);
  for (std::size_t k = 0; k < a.users(); ++k) {
    double acc = 0.0;
    for (std::size_t n : a.subcarriers[k]) acc += log2_1p(power[n] * gains[k][n]);
    rates[k] = scale * acc;
  }
  return rates;
}

/// Numerator of the rate-constraint deviation: sum_k |R_k/sum R - g_k/sum g|.
inline double deviation_numerator(std::span<const double> rates, std::span<const double> weights) {
  double rate_sum = 0.0;
  double weight_sum = 0.0;
  for (double r : rates) rate_sum += r;
  for (double w : weights) weight_sum += w;
  if (rate_sum <= 0.0) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) acc += std::abs(rates[k] / rate_sum - weights[k] / weight_sum);
  return acc;
}

struct OracleResult {
  Assignment assignment;
  std::vector<double> rates;
  double sum_rate = 0.0;
  double deviation_numerator = 0.0;
  std::size_t candidates = 0;
};

inline constexpr std::size_t kDefaultOracleCap = 1'000'000;

/// Exhaustive search over chunk assignments in which every user owns at least
/// one chunk. `power_for(assignment)` returns per-subcarrier powers (length N)
/// for a candidate; the result maximizes the sum rate, breaking ties (relative
/// 1e-12) by the smaller deviation numerator and then by the lexicographically
/// smallest owner vector.
template <class PowerSolver>
OracleResult exhaustive_sa_oracle(const GainMatrix& gains, std::span<const double> weights, const ChunkGrid& grid,
                                  PowerSolver&& power_for, std::size_t max_candidates = kDefaultOracleCap) {
  const std::size_t users = gains.size();
  detail::require(users >= 1 && weights.size() == users, ErrorKind::InvalidInput, "one weight per user required");
  detail::require(grid.chunks >= users, ErrorKind::InfeasibleConfiguration, "fewer chunks than users");
  std::size_t total = 1;
  for (std::size_t m = 0; m < grid.chunks; ++m) {
    if (total > max_candidates / users) throw Error(ErrorKind::OracleTooLarge, "K^M exceeds the enumeration cap");
    total *= users;
  }
  if (total > max_candidates) throw Error(ErrorKind::OracleTooLarge, "K^M exceeds the enumeration cap");

  const std::size_t denominator = gains.front().size();
  OracleResult best;
  bool have_best = false;
  std::vector<std::size_t> owner(grid.chunks, 0);
  std::vector<std::size_t> held(users, 0);
  for (std::size_t index = 0; index < total; ++index) {
    if (index > 0) {
      // Increment owner as a base-K number, last chunk least significant.
      std::size_t pos = grid.chunks;
      while (pos-- > 0) {
        if (++owner[pos] < users) break;
        owner[pos] = 0;
      }
    }
    std::fill(held.begin(), held.end(), 0);
    for (std::size_t u : owner) ++held[u];
    bool surjective = true;
    for (std::size_t h : held) surjective = surjective && h > 0;
    if (!surjective) continue;

    Assignment candidate = make_assignment(owner, users, grid);
    const std::vector<double> power = power_for(candidate);
    std::vector<double> rates = user_rates(candidate, gains, power, denominator);
    double sum = 0.0;
    for (double r : rates) sum += r;
    const double dev = deviation_numerator(rates, weights);
    ++best.candidates;

    bool take = !have_best;
    if (have_best) {
      const double tol = 1e-12 * std::max(std::abs(best.sum_rate), std::abs(sum));
      if (sum > best.sum_rate + tol) {
        take = true;
      } else if (std::abs(sum - best.sum_rate) <= tol && dev < best.deviation_numerator) {
        take = true;
      }
    }
    if (take) {
      const std::size_t seen = best.candidates;
      best.assignment = std::move(candidate);
      best.rates = std::move(rates);
      best.sum_rate = sum;
      best.deviation_numerator = dev;
      best.candidates = seen;
      have_best = true;
    }
  }
  return best;
}

}  // namespace ofdma
