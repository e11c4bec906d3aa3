#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ofdma/assignment.hpp"
#include "ofdma/channel.hpp"
#include "ofdma/error.hpp"
#include "ofdma/metrics.hpp"
#include "ofdma/multicell.hpp"
#include "ofdma/power_allocation.hpp"
#include "ofdma/rng.hpp"

namespace ofdma::harness {

enum class ScenarioKind { SingleCell, MultiCell, MultiCellNoFfr };
enum class SaKind { Proposed, Shen, Static, Exhaustive };
enum class PaKind { Proposed, Uniform, Exact };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SingleCell: return "single-cell";
    case ScenarioKind::MultiCell: return "multi-cell";
    case ScenarioKind::MultiCellNoFfr: return "multi-cell-no-ffr";
  }
  return "?";
}
inline const char* to_string(SaKind k) {
  switch (k) {
    case SaKind::Proposed: return "proposed";
    case SaKind::Shen: return "shen";
    case SaKind::Static: return "static";
    case SaKind::Exhaustive: return "exhaustive";
  }
  return "?";
}
inline const char* to_string(PaKind k) {
  switch (k) {
    case PaKind::Proposed: return "proposed";
    case PaKind::Uniform: return "uniform";
    case PaKind::Exact: return "exact";
  }
  return "?";
}

struct SchemePair {
  SaKind sa = SaKind::Proposed;
  PaKind pa = PaKind::Proposed;
};

struct MulticellConfig {
  double cell_radius_km = 1.0;
  double intercell_distance_km = 2.0;
  double tau_km = 0.5;
  std::size_t frf = 3;
  double target_ber = 1e-6;
  double tx_power_dbm = 43.0;
  double noise_density_dbm_hz = -174.0;
  double subcarrier_spacing_hz = 15e3;
  std::size_t taps = 8;
  bool desired_path_loss = false;
};

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::SingleCell;
  std::size_t subcarriers = 128;
  std::vector<std::size_t> chunk_sizes{1};
  std::size_t users = 4;
  std::vector<std::size_t> taps{4, 8, 16, 32};  // single-cell, one per user
  std::vector<double> weights{1, 1, 4, 4};      // gamma (centre weights in multi-cell)
  std::vector<double> edge_weights;             // beta, multi-cell only; empty means all 1
  double total_power = 1.0;                     // single-cell P_T, W
  std::vector<double> snr_db{-10, 0, 10};       // per-subcarrier SNR sweep
  std::optional<double> noise_power;            // used when snr_db is empty
  std::size_t trials = 500;
  std::uint64_t seed = 1;
  std::vector<SchemePair> schemes;
  MulticellConfig multicell;
  std::size_t oracle_max_candidates = kDefaultOracleCap;
};

/// Structural checks. Runtime infeasibility (too few chunks, oracle caps)
/// is reported per row instead.
inline void validate(const ExperimentConfig& c) {
  using detail::require;
  constexpr auto kind = ErrorKind::InvalidConfiguration;
  require(c.trials >= 1, kind, "trials must be at least 1");
  require(c.users >= 1, kind, "users must be at least 1");
  require(c.subcarriers >= 1, kind, "subcarriers must be at least 1");
  require(!c.chunk_sizes.empty(), kind, "at least one chunk size required");
  for (std::size_t l : c.chunk_sizes) require(l >= 1 && l <= c.subcarriers, kind, "chunk size must lie in [1, N]");
  require(!c.schemes.empty(), kind, "at least one scheme pair required");
  require(c.weights.empty() || c.weights.size() == c.users, kind, "weights need one entry per user");
  for (double w : c.weights) require(w > 0.0, kind, "weights must be positive");
  if (c.scenario == ScenarioKind::SingleCell) {
    require(c.taps.size() == c.users, kind, "taps need one entry per user");
    for (std::size_t t : c.taps) require(t >= 1 && t <= c.subcarriers, kind, "tap count must lie in [1, N]");
    require(c.total_power > 0.0, kind, "total power must be positive");
    require(!c.snr_db.empty() || (c.noise_power && *c.noise_power > 0.0), kind,
            "either an SNR sweep or a positive noise power is required");
    require(c.edge_weights.empty(), kind, "edge weights apply to multi-cell scenarios only");
  } else {
    require(c.edge_weights.empty() || c.edge_weights.size() == c.users, kind,
            "edge weights need one entry per user");
    for (double w : c.edge_weights) require(w > 0.0, kind, "weights must be positive");
    for (const auto& s : c.schemes) {
      require(s.sa != SaKind::Exhaustive, kind, "the exhaustive SA oracle is single-cell only");
      require(s.pa == PaKind::Uniform, kind, "multi-cell scenarios use uniform power only");
    }
    ScenarioParams p;
    p.subcarriers = c.subcarriers;
    p.users = c.users;
    p.taps = c.multicell.taps;
    p.frf = c.multicell.frf;
    p.target_ber = c.multicell.target_ber;
    p.centre_weights = c.weights;
    p.edge_weights = c.edge_weights;
    ofdma::validate(p);
    require(c.multicell.tau_km >= 0.0 && c.multicell.tau_km <= c.multicell.cell_radius_km, kind,
            "tau must lie in [0, R]");
  }
}

/// One (trial, scheme, sweep point, group) outcome.
struct ResultRow {
  std::string scenario;
  std::string group;  // "all" for single-cell, "centre" / "edge" for multi-cell
  std::string sa;
  std::string pa;
  std::size_t chunk_size = 0;
  std::optional<double> snr_db;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> rates;
  std::vector<double> weights;
  double min_rate = 0.0;
  double min_weighted_rate = 0.0;
  double sum_rate = 0.0;
  std::optional<double> deviation;
  std::optional<double> norm_min_rate;
  std::optional<double> norm_min_weighted_rate;
  std::optional<double> norm_sum_rate;
  bool pa_adjusted = false;  // proposed PA repaired or pruned a budget
  std::string error;
  double wall_time_us = 0.0;

  bool ok() const { return error.empty(); }
};

struct SummaryRow {
  std::string scenario, group, sa, pa;
  std::size_t chunk_size = 0;
  std::optional<double> snr_db;
  std::size_t errors = 0;
  MeanAccumulator min_rate, min_weighted_rate, sum_rate, deviation;
  MeanAccumulator norm_min_rate, norm_min_weighted_rate, norm_sum_rate;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

namespace detail {

struct SweepPoint {
  std::size_t chunk_size;
  std::optional<double> snr_db;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  std::vector<SweepPoint> out;
  for (std::size_t l : c.chunk_sizes) {
    if (c.scenario == ScenarioKind::SingleCell && !c.snr_db.empty()) {
      for (double s : c.snr_db) out.push_back({l, s});
    } else {
      out.push_back({l, std::nullopt});
    }
  }
  return out;
}

inline void fill_metrics(ResultRow& row) {
  row.min_rate = min_rate(row.rates);
  row.min_weighted_rate = min_weighted_rate(row.rates, row.weights);
  row.sum_rate = sum_rate(row.rates);
  try {
    row.deviation = deviation(row.rates, row.weights);
  } catch (const Error&) {
    row.deviation.reset();
  }
}

inline std::vector<double> user_weights(const ExperimentConfig& c) {
  return c.weights.empty() ? std::vector<double>(c.users, 1.0) : c.weights;
}

inline double elapsed_us(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - since).count();
}

inline PowerAllocation allocate(PaKind pa, const Assignment& a, const GainMatrix& gains,
                                std::span<const double> weights, double total_power) {
  switch (pa) {
    case PaKind::Proposed: return proposed_pa(a, gains, weights, total_power);
    case PaKind::Uniform: return uniform_pa(a, gains.front().size(), total_power);
    case PaKind::Exact: return exact_pa_oracle(a, gains, weights, total_power);
  }
  throw Error(ErrorKind::InvalidInput, "unknown PA scheme");
}

// Fills norm_* columns of the rows of one (trial, sweep point) against the
// exhaustive-SA + exact-PA row, when that row is present and usable.
inline void normalize_against_oracle(std::vector<ResultRow>& rows) {
  const ResultRow* oracle = nullptr;
  for (const auto& r : rows)
    if (r.ok() && r.sa == "exhaustive" && r.pa == "exact") oracle = &r;
  if (!oracle) return;
  const ResultRow ref = *oracle;
  for (auto& r : rows) {
    if (!r.ok()) continue;
    if (ref.min_rate > 0.0) r.norm_min_rate = normalize_vs_oracle(r.min_rate, ref.min_rate);
    if (ref.min_weighted_rate > 0.0)
      r.norm_min_weighted_rate = normalize_vs_oracle(r.min_weighted_rate, ref.min_weighted_rate);
    if (ref.sum_rate > 0.0) r.norm_sum_rate = normalize_vs_oracle(r.sum_rate, ref.sum_rate);
  }
}

/// All rows of one single-cell trial, indexed by sweep point.
inline std::vector<std::vector<ResultRow>> run_single_cell_trial(const ExperimentConfig& c, std::size_t trial,
                                                                 const std::vector<SweepPoint>& sweeps) {
  const std::size_t n = c.subcarriers;
  const std::vector<double> weights = user_weights(c);
  // |H_{k,n}|^2 is drawn once per trial and shared by every sweep point.
  GainMatrix channel_power(c.users);
  for (std::size_t k = 0; k < c.users; ++k) {
    Rng rng(substream_seed(c.seed, StreamPurpose::Channel, trial, k, 0));
    const auto response = frequency_response(generate_taps({c.taps[k], weights[k]}, rng), n);
    channel_power[k] = subcarrier_gains(response, 1.0);
  }

  std::vector<std::vector<ResultRow>> out(sweeps.size());
  for (std::size_t si = 0; si < sweeps.size(); ++si) {
    const SweepPoint& sp = sweeps[si];
    const double noise = sp.snr_db ? c.total_power / (static_cast<double>(n) * std::pow(10.0, *sp.snr_db / 10.0))
                                   : *c.noise_power;
    const double snr_db = 10.0 * std::log10(c.total_power / (static_cast<double>(n) * noise));
    GainMatrix gains = channel_power;
    for (auto& row : gains)
      for (auto& g : row) g /= noise;

    const ChunkGrid grid = build_grid(n, sp.chunk_size);
    const RateTable table = chunk_rates(gains, grid, c.total_power / static_cast<double>(n));
    std::map<SaKind, SaResult> sa_cache;
    std::map<SaKind, std::string> sa_errors;

    for (const SchemePair& scheme : c.schemes) {
      ResultRow row;
      row.scenario = to_string(c.scenario);
      row.group = "all";
      row.sa = to_string(scheme.sa);
      row.pa = to_string(scheme.pa);
      row.chunk_size = sp.chunk_size;
      row.snr_db = snr_db;
      row.trial = trial;
      row.seed = c.seed;
      row.weights = weights;
      const auto start = std::chrono::steady_clock::now();
      try {
        Assignment assignment;
        if (scheme.sa == SaKind::Exhaustive) {
          auto power_for = [&](const Assignment& a) {
            return allocate(scheme.pa, a, gains, weights, c.total_power).power;
          };
          assignment = exhaustive_sa_oracle(gains, weights, grid, power_for, c.oracle_max_candidates).assignment;
        } else {
          if (auto e = sa_errors.find(scheme.sa); e != sa_errors.end()) throw Error(ErrorKind::InfeasibleConfiguration, e->second);
          auto it = sa_cache.find(scheme.sa);
          if (it == sa_cache.end()) {
            try {
              SaResult sa = scheme.sa == SaKind::Proposed ? proposed_sa(table, weights, grid)
                            : scheme.sa == SaKind::Shen   ? shen_sa(table, weights, grid)
                                                          : run_sa(SaScheme::Static, table, weights, grid);
              it = sa_cache.emplace(scheme.sa, std::move(sa)).first;
            } catch (const Error& e) {
              sa_errors.emplace(scheme.sa, e.what());
              throw;
            }
          }
          assignment = it->second.assignment;
        }
        const PowerAllocation pa = allocate(scheme.pa, assignment, gains, weights, c.total_power);
        row.pa_adjusted = pa.any_repaired() || pa.any_pruned();
        row.rates = user_rates(assignment, gains, pa.power, n);
        fill_metrics(row);
      } catch (const Error& e) {
        row.error = e.what();
        row.rates.clear();
      }
      row.wall_time_us = elapsed_us(start);
      out[si].push_back(std::move(row));
    }
    normalize_against_oracle(out[si]);
  }
  return out;
}

inline std::vector<std::vector<ResultRow>> run_multicell_trial(const ExperimentConfig& c, std::size_t trial,
                                                               const std::vector<SweepPoint>& sweeps) {
  ScenarioParams p;
  p.subcarriers = c.subcarriers;
  p.chunk_size = sweeps.front().chunk_size;
  p.users = c.users;
  p.taps = c.multicell.taps;
  p.frf = c.multicell.frf;
  p.cell_radius_km = c.multicell.cell_radius_km;
  p.intercell_distance_km = c.multicell.intercell_distance_km;
  p.tau_km = c.multicell.tau_km;
  p.tx_power_dbm = c.multicell.tx_power_dbm;
  p.noise_density_dbm_hz = c.multicell.noise_density_dbm_hz;
  p.subcarrier_spacing_hz = c.multicell.subcarrier_spacing_hz;
  p.target_ber = c.multicell.target_ber;
  p.centre_weights = c.weights;
  p.edge_weights = c.edge_weights;
  p.desired_path_loss = c.multicell.desired_path_loss;
  CellScenario scenario = make_scenario(p, c.seed, trial);

  std::vector<std::vector<ResultRow>> out(sweeps.size());
  for (std::size_t si = 0; si < sweeps.size(); ++si) {
    set_chunk_size(scenario, sweeps[si].chunk_size);
    for (const SchemePair& scheme : c.schemes) {
      const SaScheme sa = scheme.sa == SaKind::Proposed ? SaScheme::Proposed
                          : scheme.sa == SaKind::Shen   ? SaScheme::Shen
                                                        : SaScheme::Static;
      const auto start = std::chrono::steady_clock::now();
      std::optional<MulticellResult> result;
      std::string error;
      try {
        result = c.scenario == ScenarioKind::MultiCell ? multicell_sa(scenario, sa) : reuse1_baseline(scenario, sa);
      } catch (const Error& e) {
        error = e.what();
      }
      const double elapsed = elapsed_us(start);
      for (bool centre : {true, false}) {
        ResultRow row;
        row.scenario = to_string(c.scenario);
        row.group = centre ? "centre" : "edge";
        row.sa = to_string(scheme.sa);
        row.pa = to_string(scheme.pa);
        row.chunk_size = sweeps[si].chunk_size;
        row.trial = trial;
        row.seed = c.seed;
        row.wall_time_us = elapsed;
        const auto members = scenario.group(centre);
        if (!error.empty()) {
          row.error = error;
        } else if (members.empty()) {
          row.error = "empty-group: no users in this group";
        } else {
          for (std::size_t k : members) {
            row.rates.push_back(result->rates[k]);
            row.weights.push_back(scenario.weight(k));
          }
          fill_metrics(row);
        }
        out[si].push_back(std::move(row));
      }
    }
  }
  return out;
}

}  // namespace detail

/// Summary statistics per (scenario, group, SA, PA, L, SNR), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<std::string, std::string, std::string, std::string, std::size_t, std::optional<double>>, std::size_t>
      index;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.scenario, r.group, r.sa, r.pa, r.chunk_size, r.snr_db);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      SummaryRow s;
      s.scenario = r.scenario;
      s.group = r.group;
      s.sa = r.sa;
      s.pa = r.pa;
      s.chunk_size = r.chunk_size;
      s.snr_db = r.snr_db;
      out.push_back(std::move(s));
    }
    SummaryRow& s = out[it->second];
    if (!r.ok()) {
      ++s.errors;
      continue;
    }
    s.min_rate.add(r.min_rate);
    s.min_weighted_rate.add(r.min_weighted_rate);
    s.sum_rate.add(r.sum_rate);
    if (r.deviation) s.deviation.add(*r.deviation);
    if (r.norm_min_rate) s.norm_min_rate.add(*r.norm_min_rate);
    if (r.norm_min_weighted_rate) s.norm_min_weighted_rate.add(*r.norm_min_weighted_rate);
    if (r.norm_sum_rate) s.norm_sum_rate.add(*r.norm_sum_rate);
  }
  return out;
}

/// Runs every trial, optionally on several threads. Each trial owns its RNG
/// substreams, and rows are merged in (sweep point, trial, scheme) order, so
/// the output does not depend on the thread count or execution order.
inline ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 1) {
  validate(config);
  const auto sweeps = detail::sweep_points(config);
  std::vector<std::vector<std::vector<ResultRow>>> per_trial(config.trials);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<Error> failure;

  auto worker = [&] {
    for (std::size_t t = next++; t < config.trials; t = next++) {
      try {
        per_trial[t] = config.scenario == ScenarioKind::SingleCell ? detail::run_single_cell_trial(config, t, sweeps)
                                                                   : detail::run_multicell_trial(config, t, sweeps);
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = e;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.trials)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) throw *failure;

  ExperimentResult result;
  for (std::size_t si = 0; si < sweeps.size(); ++si)
    for (std::size_t t = 0; t < config.trials; ++t)
      for (auto& row : per_trial[t][si]) result.rows.push_back(std::move(row));
  result.summary = summarize(result.rows);
  return result;
}

namespace detail {

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : "n/a"; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "scenario,group,sa,pa,chunk_size,snr_db,trial,seed,rates,min_rate,min_weighted_rate,sum_rate,deviation,"
    "norm_min_rate,norm_min_weighted_rate,norm_sum_rate,error";

/// Writes the header and one line per row. Rates are ';'-separated inside
/// their column; numbers use 12 significant digits; lines end in LF.
inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool include_timing = false) {
  using detail::format_number;
  using detail::format_optional;
  os << kCsvHeader << (include_timing ? ",wall_time_us" : "") << '\n';
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.group << ',' << r.sa << ',' << r.pa << ',' << r.chunk_size << ','
       << format_optional(r.snr_db) << ',' << r.trial << ',' << r.seed << ',';
    if (r.ok()) {
      for (std::size_t k = 0; k < r.rates.size(); ++k) os << (k ? ";" : "") << format_number(r.rates[k]);
      os << ',' << format_number(r.min_rate) << ',' << format_number(r.min_weighted_rate) << ','
         << format_number(r.sum_rate) << ',' << format_optional(r.deviation) << ','
         << format_optional(r.norm_min_rate) << ',' << format_optional(r.norm_min_weighted_rate) << ','
         << format_optional(r.norm_sum_rate) << ',';
    } else {
      os << ",,,,,,,," << detail::csv_quote(r.error);
    }
    if (include_timing) os << ',' << format_number(r.wall_time_us);
    os << '\n';
  }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path, bool include_timing = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_csv(out, rows, include_timing);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

inline constexpr const char* kSummaryHeader =
    "scenario,group,sa,pa,chunk_size,snr_db,trials,errors,min_rate_mean,min_rate_hw,min_weighted_rate_mean,"
    "min_weighted_rate_hw,sum_rate_mean,sum_rate_hw,deviation_mean,deviation_hw,norm_min_rate_mean,"
    "norm_min_weighted_rate_mean,norm_sum_rate_mean";

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& summary) {
  using detail::format_number;
  auto opt_mean = [](const MeanAccumulator& a) { return a.count() ? format_number(a.mean()) : std::string("n/a"); };
  auto opt_hw = [](const MeanAccumulator& a) { return a.count() ? format_number(a.half_width()) : std::string("n/a"); };
  os << kSummaryHeader << '\n';
  for (const auto& s : summary) {
    os << s.scenario << ',' << s.group << ',' << s.sa << ',' << s.pa << ',' << s.chunk_size << ','
       << detail::format_optional(s.snr_db) << ',' << s.min_rate.count() << ',' << s.errors << ','
       << opt_mean(s.min_rate) << ',' << opt_hw(s.min_rate) << ',' << opt_mean(s.min_weighted_rate) << ','
       << opt_hw(s.min_weighted_rate) << ',' << opt_mean(s.sum_rate) << ',' << opt_hw(s.sum_rate) << ','
       << opt_mean(s.deviation) << ',' << opt_hw(s.deviation) << ',' << opt_mean(s.norm_min_rate) << ','
       << opt_mean(s.norm_min_weighted_rate) << ',' << opt_mean(s.norm_sum_rate) << '\n';
  }
}

}  // namespace ofdma::harness
