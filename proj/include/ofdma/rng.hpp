#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace ofdma {

/// SplitMix64 finalizer. Used only to derive seeds, never as the sampling engine.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purpose tags keep substreams for different draws of the same trial apart.
enum class StreamPurpose : std::uint64_t {
  Channel = 1,
  Placement = 2,
};

/// Derives a substream seed from (master, purpose, trial, user, cell).
///
/// h0 = splitmix64(master), then for each component c_i in the order
/// (purpose, trial, user, cell): h_{i+1} = splitmix64(h_i ^ splitmix64(c_i + i + 1)).
/// The chain is fixed; changing it changes every output of the simulator.
constexpr std::uint64_t substream_seed(std::uint64_t master, StreamPurpose purpose, std::uint64_t trial,
                                       std::uint64_t user = 0, std::uint64_t cell = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  std::uint64_t i = 1;
  for (std::uint64_t c : {static_cast<std::uint64_t>(purpose), trial, user, cell}) {
    h = splitmix64(h ^ splitmix64(c + i));
    ++i;
  }
  return h;
}

/// Seedable random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the distributions are implemented here rather than
/// through <random> so that draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal pair by Box-Muller.
  std::pair<double, double> normal_pair() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const auto [a, b] = normal_pair();
    const double s = std::sqrt(variance / 2.0);
    return {s * a, s * b};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ofdma
