#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "ofdma/assignment.hpp"
#include "ofdma/channel.hpp"
#include "ofdma/error.hpp"
#include "ofdma/rng.hpp"

namespace ofdma {

inline constexpr std::size_t kCells = 19;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Two-tier hexagonal layout around cell 1 (index 0).
///
/// Indices 1-6 are the tier-1 cells at distance D. Indices 7-18 walk the
/// second tier counter-clockwise starting at 30 degrees, alternating between
/// the mid-edge cells at sqrt(3) D (even 1-based numbers 8, 10, ..., 18) and
/// the corner cells at 2 D (odd numbers 9, ..., 19).
struct HexLayout {
  double cell_radius = 1.0;
  double intercell_distance = 2.0;
  std::array<Point, kCells> centers{};
  std::array<double, kCells> distance{};     // R_i, BS i to BS 1, km
  std::array<std::size_t, kCells> edge_band{};  // reuse-3 colour, 0 for cell 1
};

inline HexLayout build_layout(double cell_radius_km, double intercell_distance_km) {
  detail::require(cell_radius_km > 0.0 && intercell_distance_km > 0.0, ErrorKind::InvalidConfiguration,
                  "cell radius and intercell distance must be positive");
  // Axial hex coordinates (q, r); neighbours of (0,0) are at distance D.
  static constexpr std::array<std::array<int, 2>, kCells> axial{{
      {0, 0},
      {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1},
      {1, 1}, {0, 2}, {-1, 2}, {-2, 2}, {-2, 1}, {-2, 0},
      {-1, -1}, {0, -2}, {1, -2}, {2, -2}, {2, -1}, {2, 0},
  }};
  HexLayout layout;
  layout.cell_radius = cell_radius_km;
  layout.intercell_distance = intercell_distance_km;
  const double d = intercell_distance_km;
  for (std::size_t i = 0; i < kCells; ++i) {
    const double q = axial[i][0];
    const double r = axial[i][1];
    layout.centers[i] = {d * (q + 0.5 * r), d * (std::numbers::sqrt3 / 2.0) * r};
    layout.distance[i] = std::hypot(layout.centers[i].x, layout.centers[i].y);
    layout.edge_band[i] = static_cast<std::size_t>(((axial[i][0] - axial[i][1]) % 3 + 3) % 3);
  }
  return layout;
}

/// 128.1 + 37.6 log10(d) dB, d in km.
inline double path_loss_db(double distance_km) {
  detail::require(distance_km > 0.0, ErrorKind::InvalidInput, "distance must be positive");
  return 128.1 + 37.6 * std::log10(distance_km);
}

inline double path_gain(double distance_km) { return std::pow(10.0, -0.1 * path_loss_db(distance_km)); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

/// SNR-gap factor for a target bit error rate: -1.5 / ln(5 BER).
inline double snr_gap(double ber) {
  detail::require(ber > 0.0 && ber < 0.2, ErrorKind::InvalidConfiguration, "target BER must lie in (0, 0.2)");
  return -1.5 / std::log(5.0 * ber);
}

struct Band {
  std::size_t first = 0;
  std::size_t count = 0;

  bool contains(std::size_t n) const { return n >= first && n < first + count; }
};

/// Fractional-frequency-reuse split: a centre band F1 reused in every cell and
/// FRF disjoint edge bands F2.. laid out after it.
struct FfrPlan {
  std::size_t subcarriers = 0;
  std::size_t chunk_size = 1;
  std::size_t frf = 3;
  double tau = 0.0;
  double cell_radius = 1.0;
  std::size_t centre_subcarriers = 0;  // N_cc = ceil(N (tau/R)^2)
  std::size_t edge_subcarriers = 0;    // N_ce = floor((N - N_cc) / FRF)
  std::size_t centre_chunks = 0;       // M_cc
  std::size_t edge_chunks = 0;         // M_ce
  Band centre;
  std::vector<Band> edge;

  /// Chunk grid over a band, empty when the band holds fewer than L subcarriers.
  std::optional<ChunkGrid> grid(const Band& band) const {
    if (band.count < chunk_size) return std::nullopt;
    return build_grid(band.count, chunk_size, band.first);
  }
};

inline FfrPlan band_partition(std::size_t subcarriers, std::size_t chunk_size, double tau, double cell_radius,
                              std::size_t frf) {
  detail::require(cell_radius > 0.0 && tau >= 0.0 && tau <= cell_radius, ErrorKind::InvalidConfiguration,
                  "tau must lie in [0, R]");
  detail::require(frf >= 1, ErrorKind::InvalidConfiguration, "FRF must be at least 1");
  detail::require(chunk_size >= 1 && subcarriers >= 1, ErrorKind::InvalidConfiguration,
                  "subcarriers and chunk size must be positive");
  FfrPlan plan;
  plan.subcarriers = subcarriers;
  plan.chunk_size = chunk_size;
  plan.frf = frf;
  plan.tau = tau;
  plan.cell_radius = cell_radius;
  const double ratio = tau / cell_radius;
  const double area = static_cast<double>(subcarriers) * ratio * ratio;
  // Products such as 512 * 0.25 must not be pushed up by rounding noise.
  plan.centre_subcarriers = std::min(subcarriers, static_cast<std::size_t>(std::ceil(area - 1e-9)));
  plan.edge_subcarriers = (subcarriers - plan.centre_subcarriers) / frf;
  plan.centre_chunks = plan.centre_subcarriers / chunk_size;
  plan.edge_chunks = plan.edge_subcarriers / chunk_size;
  plan.centre = {0, plan.centre_subcarriers};
  for (std::size_t b = 0; b < frf; ++b) {
    plan.edge.push_back({plan.centre_subcarriers + b * plan.edge_subcarriers, plan.edge_subcarriers});
  }
  return plan;
}

struct UserPlacement {
  double distance = 0.0;  // km from BS 1
  double angle = 0.0;
  bool centre = false;
};

/// Uniform over the disc of radius R (radial CDF r^2 / R^2); centre if d <= tau.
inline std::vector<UserPlacement> place_users(std::size_t users, double cell_radius, double tau, Rng& rng) {
  detail::require(users >= 1, ErrorKind::InvalidConfiguration, "at least one user required");
  std::vector<UserPlacement> out(users);
  for (auto& u : out) {
    u.distance = cell_radius * std::sqrt(1.0 - rng.uniform());  // (0, R]
    u.angle = 2.0 * std::numbers::pi * rng.uniform();
    u.centre = u.distance <= tau;
  }
  return out;
}

struct ScenarioParams {
  std::size_t subcarriers = 512;
  std::size_t chunk_size = 4;
  std::size_t users = 8;
  std::size_t taps = 8;
  std::size_t frf = 3;
  double cell_radius_km = 1.0;
  double intercell_distance_km = 2.0;
  double tau_km = 0.5;
  double tx_power_dbm = 43.0;
  double noise_density_dbm_hz = -174.0;
  double subcarrier_spacing_hz = 15e3;
  double target_ber = 1e-6;
  std::vector<double> centre_weights;  // gamma per user slot; empty means all 1
  std::vector<double> edge_weights;    // beta per user slot; empty means all 1
  bool desired_path_loss = false;      // attenuate the serving link by PL(d_u)
};

/// Cell 1 with its users and every user's channel to all 19 base stations.
struct CellScenario {
  ScenarioParams params;
  HexLayout layout;
  FfrPlan plan;
  std::vector<UserPlacement> users;
  std::vector<std::vector<std::vector<double>>> link_gain;  // [user][cell][n] = |H_{k,n,i}|^2
  std::array<double, kCells> attenuation{};                 // 10^{-0.1 PL(R_i)}; entry 0 unused
  double noise_power = 0.0;                                 // per subcarrier, W
  double total_power = 0.0;                                 // W
  double lambda = 0.0;

  double weight(std::size_t k) const {
    const auto& w = users[k].centre ? params.centre_weights : params.edge_weights;
    return w.empty() ? 1.0 : w[k];
  }
  std::vector<std::size_t> group(bool centre) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < users.size(); ++k)
      if (users[k].centre == centre) out.push_back(k);
    return out;
  }
  /// Cell 1's own edge band.
  const Band& edge_band() const { return plan.edge[layout.edge_band[0]]; }
  /// Cells transmitting in cell 1's edge band (0-based indices).
  std::vector<std::size_t> edge_interferers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < kCells; ++i)
      if (layout.edge_band[i] == layout.edge_band[0]) out.push_back(i);
    return out;
  }
};

inline void validate(const ScenarioParams& p) {
  using detail::require;
  require(p.users >= 1, ErrorKind::InvalidConfiguration, "at least one user required");
  require(p.taps >= 1 && p.taps <= p.subcarriers, ErrorKind::InvalidConfiguration, "tap count must lie in [1, N]");
  require(p.frf == 3, ErrorKind::InvalidConfiguration, "the 19-cell edge-band colouring requires FRF = 3");
  require(p.centre_weights.empty() || p.centre_weights.size() == p.users, ErrorKind::InvalidConfiguration,
          "centre weights need one entry per user");
  require(p.edge_weights.empty() || p.edge_weights.size() == p.users, ErrorKind::InvalidConfiguration,
          "edge weights need one entry per user");
  for (double w : p.centre_weights) require(w > 0.0, ErrorKind::InvalidConfiguration, "weights must be positive");
  for (double w : p.edge_weights) require(w > 0.0, ErrorKind::InvalidConfiguration, "weights must be positive");
  snr_gap(p.target_ber);
}

/// Re-partitions the bands for a new chunk size; channels are untouched.
inline void set_chunk_size(CellScenario& s, std::size_t chunk_size) {
  s.params.chunk_size = chunk_size;
  s.plan = band_partition(s.params.subcarriers, chunk_size, s.params.tau_km, s.params.cell_radius_km, s.params.frf);
}

/// Draws user positions and all 19 x K links for one trial. Placement uses
/// the (master, placement, trial) substream; link (k, i) uses
/// (master, channel, trial, k, i).
inline CellScenario make_scenario(const ScenarioParams& params, std::uint64_t master_seed, std::uint64_t trial) {
  validate(params);
  CellScenario s;
  s.params = params;
  s.layout = build_layout(params.cell_radius_km, params.intercell_distance_km);
  s.plan = band_partition(params.subcarriers, params.chunk_size, params.tau_km, params.cell_radius_km, params.frf);
  Rng placement(substream_seed(master_seed, StreamPurpose::Placement, trial));
  s.users = place_users(params.users, params.cell_radius_km, params.tau_km, placement);
  s.attenuation[0] = 1.0;
  for (std::size_t i = 1; i < kCells; ++i) s.attenuation[i] = path_gain(s.layout.distance[i]);
  s.total_power = dbm_to_watts(params.tx_power_dbm);
  s.noise_power = dbm_to_watts(params.noise_density_dbm_hz + 10.0 * std::log10(params.subcarrier_spacing_hz));
  s.lambda = snr_gap(params.target_ber);

  const UserProfile profile{params.taps, 1.0};
  s.link_gain.resize(params.users);
  for (std::size_t k = 0; k < params.users; ++k) {
    s.link_gain[k].resize(kCells);
    for (std::size_t i = 0; i < kCells; ++i) {
      Rng rng(substream_seed(master_seed, StreamPurpose::Channel, trial, k, i));
      const auto taps = generate_taps(profile, rng);
      const auto response = frequency_response(taps, params.subcarriers);
      auto& g = s.link_gain[k][i];
      g.resize(response.size());
      for (std::size_t n = 0; n < response.size(); ++n) g[n] = std::norm(response[n]);
    }
  }
  return s;
}

namespace detail {

inline double sinr_with(const CellScenario& s, std::size_t k, std::size_t n, const std::vector<std::size_t>& cells) {
  const double per_subcarrier = s.total_power / static_cast<double>(s.params.subcarriers);
  double desired = s.link_gain[k][0][n] * per_subcarrier;
  if (s.params.desired_path_loss) desired *= path_gain(s.users[k].distance);
  double interference = 0.0;
  for (std::size_t i : cells) interference += s.attenuation[i] * s.link_gain[k][i][n] * per_subcarrier;
  return desired / (s.noise_power + interference);
}

inline const std::vector<std::size_t>& all_other_cells() {
  static const std::vector<std::size_t> cells = [] {
    std::vector<std::size_t> v;
    for (std::size_t i = 1; i < kCells; ++i) v.push_back(i);
    return v;
  }();
  return cells;
}

}  // namespace detail

/// SINR of a centre user on an F1 subcarrier, interfered by all 18 other cells.
inline double sinr_centre(const CellScenario& s, std::size_t k, std::size_t n) {
  detail::require(k < s.users.size() && s.users[k].centre, ErrorKind::InvalidQuery, "user is not in the centre group");
  detail::require(s.plan.centre.contains(n), ErrorKind::InvalidQuery, "subcarrier is outside the centre band");
  return detail::sinr_with(s, k, n, detail::all_other_cells());
}

/// SINR of an edge user on cell 1's edge band, interfered by the six co-band cells.
inline double sinr_edge(const CellScenario& s, std::size_t k, std::size_t n) {
  detail::require(k < s.users.size() && !s.users[k].centre, ErrorKind::InvalidQuery, "user is not in the edge group");
  detail::require(s.edge_band().contains(n), ErrorKind::InvalidQuery, "subcarrier is outside cell 1's edge band");
  return detail::sinr_with(s, k, n, s.edge_interferers());
}

/// SINR with every other cell interfering on every subcarrier (no FFR).
inline double sinr_reuse1(const CellScenario& s, std::size_t k, std::size_t n) {
  detail::require(k < s.users.size() && n < s.params.subcarriers, ErrorKind::InvalidQuery, "index out of range");
  return detail::sinr_with(s, k, n, detail::all_other_cells());
}

/// lambda * SINR rows for `users` over `band` (zero elsewhere), one row per user.
template <class Sinr>
GainMatrix effective_snr(const CellScenario& s, const std::vector<std::size_t>& users, const Band& band, Sinr sinr) {
  GainMatrix out(users.size(), std::vector<double>(s.params.subcarriers, 0.0));
  for (std::size_t j = 0; j < users.size(); ++j)
    for (std::size_t n = band.first; n < band.first + band.count; ++n) out[j][n] = s.lambda * sinr(s, users[j], n);
  return out;
}

/// (1/N) sum_{n in chunk m} log2(1 + lambda SINR) for user k on its group's grid.
inline double effective_chunk_rate(const CellScenario& s, std::size_t k, std::size_t m) {
  detail::require(k < s.users.size(), ErrorKind::InvalidQuery, "user index out of range");
  const bool centre = s.users[k].centre;
  const auto grid = s.plan.grid(centre ? s.plan.centre : s.edge_band());
  detail::require(grid.has_value() && m < grid->chunks, ErrorKind::InvalidQuery, "chunk index out of range");
  double acc = 0.0;
  for (std::size_t n = grid->begin(m); n < grid->end(m); ++n) {
    const double sinr = centre ? sinr_centre(s, k, n) : sinr_edge(s, k, n);
    acc += log2_1p(s.lambda * sinr);
  }
  return acc / static_cast<double>(s.params.subcarriers);
}

/// Assignment of one user group; `users` maps local row j to cell-1 user index.
struct GroupAssignment {
  std::vector<std::size_t> users;
  std::optional<ChunkGrid> grid;
  std::optional<Assignment> assignment;
};

struct MulticellResult {
  GroupAssignment centre;
  GroupAssignment edge;
  std::vector<double> rates;  // per cell-1 user, bits/s/Hz
};

namespace detail {

template <class Sinr>
GroupAssignment assign_group(const CellScenario& s, SaScheme scheme, std::vector<std::size_t> users,
                             const Band& band, std::optional<ChunkGrid> grid, Sinr sinr, std::vector<double>& rates) {
  GroupAssignment g;
  g.users = std::move(users);
  if (g.users.empty()) return g;
  g.grid = grid;
  require(g.grid.has_value() && g.grid->chunks >= g.users.size(), ErrorKind::InfeasibleConfiguration,
          "group has more users than chunks");
  std::vector<double> weights;
  for (std::size_t k : g.users) weights.push_back(s.weight(k));
  const GainMatrix snr = effective_snr(s, g.users, band, sinr);
  const RateTable table = chunk_rates(snr, *g.grid, 1.0, s.params.subcarriers);
  SaResult sa = run_sa(scheme, table, weights, *g.grid);
  for (std::size_t j = 0; j < g.users.size(); ++j) rates[g.users[j]] = sa.accumulated[j];
  g.assignment = std::move(sa.assignment);
  return g;
}

}  // namespace detail

/// Independent assignment of the centre group over F1 and the edge group
/// over cell 1's edge band, under uniform power.
inline MulticellResult multicell_sa(const CellScenario& s, SaScheme scheme) {
  MulticellResult out;
  out.rates.assign(s.users.size(), 0.0);
  out.centre = detail::assign_group(s, scheme, s.group(true), s.plan.centre, s.plan.grid(s.plan.centre), sinr_centre,
                                    out.rates);
  out.edge = detail::assign_group(s, scheme, s.group(false), s.edge_band(), s.plan.grid(s.edge_band()), sinr_edge,
                                  out.rates);
  return out;
}

/// Baseline without FFR: one pool of all N subcarriers shared by every user,
/// each subcarrier interfered by all 18 other cells.
inline MulticellResult reuse1_baseline(const CellScenario& s, SaScheme scheme) {
  MulticellResult out;
  out.rates.assign(s.users.size(), 0.0);
  std::vector<std::size_t> everyone(s.users.size());
  for (std::size_t k = 0; k < everyone.size(); ++k) everyone[k] = k;
  const Band pool{0, s.params.subcarriers};
  out.centre = detail::assign_group(s, scheme, everyone, pool, build_grid(pool.count, s.plan.chunk_size), sinr_reuse1,
                                    out.rates);
  return out;
}

}  // namespace ofdma
