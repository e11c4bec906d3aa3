#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ofdma/error.hpp"
#include "ofdma/rng.hpp"

namespace ofdma {

using Complex = std::complex<double>;

/// Per-user channel order and requested-rate weight.
struct UserProfile {
  std::size_t tap_count = 1;
  double rate_weight = 1.0;
};

/// Noise variance per subcarrier and total transmit power, both in watts.
struct NoiseModel {
  double noise_power = 1.0;
  double total_power = 1.0;
};

struct ChannelRealization {
  std::vector<Complex> taps;
  std::vector<Complex> response;  // H_n, n = 0..N-1
  std::vector<double> gains;      // |H_n|^2 / noise power
};

/// Draws `tap_count` i.i.d. CN(0, 1/tap_count) taps, so the expected channel
/// energy is 1 (uniform power-delay profile).
inline std::vector<Complex> generate_taps(const UserProfile& profile, Rng& rng) {
  detail::require(profile.tap_count >= 1, ErrorKind::InvalidProfile, "tap count must be at least 1");
  const double variance = 1.0 / static_cast<double>(profile.tap_count);
  std::vector<Complex> taps(profile.tap_count);
  for (auto& h : taps) h = rng.complex_normal(variance);
  return taps;
}

/// H_n = sum_i h_i exp(-j 2 pi i n / N) for n = 0..N-1.
///
/// Evaluated as the direct O(N * taps) sum against a twiddle table indexed by
/// (i * n) mod N, which keeps every term on an exactly reduced angle.
inline std::vector<Complex> frequency_response(std::span<const Complex> taps, std::size_t subcarriers) {
  detail::require(subcarriers >= 1, ErrorKind::InvalidConfiguration, "subcarrier count must be positive");
  detail::require(taps.size() <= subcarriers, ErrorKind::InvalidConfiguration,
                  "tap count exceeds subcarrier count");
  const std::size_t n_total = subcarriers;
  std::vector<Complex> twiddle(n_total);
  for (std::size_t j = 0; j < n_total; ++j) {
    twiddle[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_total));
  }
  std::vector<Complex> response(n_total);
  for (std::size_t n = 0; n < n_total; ++n) {
    Complex acc{0.0, 0.0};
    std::size_t phase = 0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      acc += taps[i] * twiddle[phase];
      phase += n;
      if (phase >= n_total) phase %= n_total;
    }
    response[n] = acc;
  }
  return response;
}

/// G_n = |H_n|^2 / noise_power.
inline std::vector<double> subcarrier_gains(std::span<const Complex> response, double noise_power) {
  detail::require(noise_power > 0.0, ErrorKind::InvalidConfiguration, "noise power must be positive");
  std::vector<double> gains(response.size());
  for (std::size_t n = 0; n < response.size(); ++n) gains[n] = std::norm(response[n]) / noise_power;
  return gains;
}

inline ChannelRealization realize_channel(const UserProfile& profile, std::size_t subcarriers, double noise_power,
                                          Rng& rng) {
  ChannelRealization out;
  out.taps = generate_taps(profile, rng);
  out.response = frequency_response(out.taps, subcarriers);
  out.gains = subcarrier_gains(out.response, noise_power);
  return out;
}

/// Relative Parseval mismatch |sum|H|^2 - N sum|h|^2| / (N sum|h|^2).
inline double parseval_error(const ChannelRealization& ch) {
  double freq = 0.0;
  for (const auto& h : ch.response) freq += std::norm(h);
  double time = 0.0;
  for (const auto& h : ch.taps) time += std::norm(h);
  time *= static_cast<double>(ch.response.size());
  if (time == 0.0) return freq == 0.0 ? 0.0 : 1.0;
  return std::abs(freq - time) / time;
}

}  // namespace ofdma
