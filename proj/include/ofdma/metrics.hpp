#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ofdma/error.hpp"

namespace ofdma {

/// Normalized rate-constraint deviation of one trial:
///   sum_k |R_k / sum R - g_k / sum g|  /  (2 - 2 min_k g_k / sum g).
/// Lies in [0, 1]; 0 exactly when rate shares equal weight shares.
inline double deviation(std::span<const double> rates, std::span<const double> weights) {
  detail::require(rates.size() == weights.size() && !rates.empty(), ErrorKind::InvalidInput,
                  "one weight per rate required");
  double rate_sum = 0.0;
  double weight_sum = 0.0;
  for (double r : rates) rate_sum += r;
  for (double w : weights) weight_sum += w;
  detail::require(rate_sum > 0.0, ErrorKind::UndefinedDeviation, "sum rate is zero");
  double min_share = std::numeric_limits<double>::infinity();
  for (double w : weights) min_share = std::min(min_share, w / weight_sum);
  const double denom = 2.0 - 2.0 * min_share;
  detail::require(denom > 0.0, ErrorKind::UndefinedDeviation, "deviation needs at least two users");
  double acc = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) acc += std::abs(rates[k] / rate_sum - weights[k] / weight_sum);
  return acc / denom;
}

inline double min_rate(std::span<const double> rates) {
  detail::require(!rates.empty(), ErrorKind::InvalidInput, "empty rate vector");
  return *std::min_element(rates.begin(), rates.end());
}

/// min_k R_k / gamma_k.
inline double min_weighted_rate(std::span<const double> rates, std::span<const double> weights) {
  detail::require(rates.size() == weights.size() && !rates.empty(), ErrorKind::InvalidInput,
                  "one weight per rate required");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rates.size(); ++k) {
    detail::require(weights[k] > 0.0, ErrorKind::InvalidInput, "rate weights must be positive");
    best = std::min(best, rates[k] / weights[k]);
  }
  return best;
}

inline double sum_rate(std::span<const double> rates) {
  double s = 0.0;
  for (double r : rates) s += r;
  return s;
}

/// scheme / oracle. Values above 1 are legitimate: the scheme may trade
/// fairness for rate.
inline double normalize_vs_oracle(double scheme, double oracle) {
  detail::require(oracle > 0.0, ErrorKind::UndefinedRatio, "oracle value must be positive");
  return scheme / oracle;
}

inline std::vector<double> normalize_vs_oracle(std::span<const double> scheme, std::span<const double> oracle) {
  detail::require(scheme.size() == oracle.size(), ErrorKind::InvalidInput, "length mismatch");
  std::vector<double> out(scheme.size());
  for (std::size_t i = 0; i < scheme.size(); ++i) out[i] = normalize_vs_oracle(scheme[i], oracle[i]);
  return out;
}

/// Running mean and normal-approximation 95% confidence half-width.
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double half_width() const {
    return n_ > 1 ? 1.959963984540054 * std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace ofdma
