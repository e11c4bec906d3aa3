#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ofdma/error.hpp"
#include "ofdma/harness.hpp"

namespace ofdma::harness {

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorKind::InvalidConfiguration, what); }

inline void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) config_error("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const Json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
void read(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key);
}

// Accepts either a scalar or a list.
template <class T>
void read_list(const Json& obj, const char* key, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_array()) {
    out = get<std::vector<T>>(obj, key);
  } else {
    out = {get<T>(obj, key)};
  }
}

inline ScenarioKind parse_scenario(const std::string& s) {
  if (s == "single-cell") return ScenarioKind::SingleCell;
  if (s == "multi-cell") return ScenarioKind::MultiCell;
  if (s == "multi-cell-no-ffr") return ScenarioKind::MultiCellNoFfr;
  config_error("unknown scenario '" + s + "'");
}

inline SaKind parse_sa(const std::string& s) {
  if (s == "proposed") return SaKind::Proposed;
  if (s == "shen") return SaKind::Shen;
  if (s == "static") return SaKind::Static;
  if (s == "exhaustive") return SaKind::Exhaustive;
  config_error("unknown SA scheme '" + s + "'");
}

inline PaKind parse_pa(const std::string& s) {
  if (s == "proposed") return PaKind::Proposed;
  if (s == "uniform") return PaKind::Uniform;
  if (s == "exact") return PaKind::Exact;
  config_error("unknown PA scheme '" + s + "'");
}

}  // namespace detail

/// Builds a config from a JSON document. Keys mirror ExperimentConfig; see
/// README for the grammar. Unknown keys are rejected.
inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) config_error("config must be a JSON object");
  reject_unknown(doc,
                 {"scenario", "subcarriers", "chunk_sizes", "users", "taps", "weights", "edge_weights", "total_power",
                  "snr_db", "noise_power", "trials", "seed", "schemes", "multicell", "oracle_max_candidates"},
                 "config");
  ExperimentConfig c;
  if (doc.contains("scenario")) c.scenario = parse_scenario(get<std::string>(doc, "scenario"));
  if (c.scenario != ScenarioKind::SingleCell) {
    c.subcarriers = 512;
    c.users = 8;
    c.weights.clear();
    c.taps.clear();
    c.snr_db.clear();
    c.trials = 200;
  }
  read(doc, "subcarriers", c.subcarriers);
  read_list(doc, "chunk_sizes", c.chunk_sizes);
  read(doc, "users", c.users);
  if (c.scenario == ScenarioKind::SingleCell && doc.contains("users") && !doc.contains("weights"))
    c.weights.assign(c.users, 1.0);
  read_list(doc, "taps", c.taps);
  if (c.scenario == ScenarioKind::SingleCell && c.taps.size() == 1 && c.users > 1) c.taps.assign(c.users, c.taps[0]);
  read(doc, "weights", c.weights);
  read(doc, "edge_weights", c.edge_weights);
  read(doc, "total_power", c.total_power);
  if (doc.contains("noise_power")) {
    c.noise_power = get<double>(doc, "noise_power");
    c.snr_db.clear();
  }
  read_list(doc, "snr_db", c.snr_db);
  read(doc, "trials", c.trials);
  read(doc, "seed", c.seed);
  read(doc, "oracle_max_candidates", c.oracle_max_candidates);

  if (doc.contains("schemes")) {
    const Json& list = doc.at("schemes");
    if (!list.is_array()) config_error("'schemes' must be a list");
    for (const Json& item : list) {
      if (!item.is_object()) config_error("each scheme must be an object with 'sa' and 'pa'");
      reject_unknown(item, {"sa", "pa"}, "scheme");
      SchemePair pair;
      pair.sa = parse_sa(get<std::string>(item, "sa"));
      pair.pa = parse_pa(item.contains("pa") ? get<std::string>(item, "pa")
                                             : std::string(c.scenario == ScenarioKind::SingleCell ? "proposed"
                                                                                                  : "uniform"));
      c.schemes.push_back(pair);
    }
  } else if (c.scenario == ScenarioKind::SingleCell) {
    c.schemes = {{SaKind::Proposed, PaKind::Proposed}};
  } else {
    c.schemes = {{SaKind::Proposed, PaKind::Uniform}, {SaKind::Shen, PaKind::Uniform}, {SaKind::Static, PaKind::Uniform}};
  }

  if (doc.contains("multicell")) {
    const Json& m = doc.at("multicell");
    if (!m.is_object()) config_error("'multicell' must be an object");
    reject_unknown(m,
                   {"cell_radius_km", "intercell_distance_km", "tau_km", "frf", "target_ber", "tx_power_dbm",
                    "noise_density_dbm_hz", "subcarrier_spacing_hz", "taps", "desired_path_loss"},
                   "multicell");
    MulticellConfig& mc = c.multicell;
    read(m, "cell_radius_km", mc.cell_radius_km);
    read(m, "intercell_distance_km", mc.intercell_distance_km);
    mc.tau_km = 0.5 * mc.cell_radius_km;
    read(m, "tau_km", mc.tau_km);
    read(m, "frf", mc.frf);
    read(m, "target_ber", mc.target_ber);
    read(m, "tx_power_dbm", mc.tx_power_dbm);
    read(m, "noise_density_dbm_hz", mc.noise_density_dbm_hz);
    read(m, "subcarrier_spacing_hz", mc.subcarrier_spacing_hz);
    read(m, "taps", mc.taps);
    read(m, "desired_path_loss", mc.desired_path_loss);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::config_error("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace ofdma::harness
