// Command-line driver for the OFDMA resource-allocation experiments.
//
//   ofdma_sim run --config cfg.json --out rows.csv [--seed S] [--threads T] [--summary s.csv] [--timing]
//   ofdma_sim validate --config cfg.json
//   ofdma_sim golden --config fixture.json --out fixture.csv --overwrite
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "ofdma/config.hpp"
#include "ofdma/harness.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int report(const ofdma::Error& e) {
  std::cerr << "error (" << ofdma::to_string(e.kind()) << "): " << e.what() << '\n';
  return e.kind() == ofdma::ErrorKind::InvalidConfiguration ? kConfigError : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDMA subcarrier and power allocation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string summary_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool timing = false;
  bool overwrite = false;

  auto* run = app.add_subcommand("run", "run an experiment and write per-trial rows");
  run->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "CSV output path")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  run->add_option("--summary", summary_path, "also write per-scheme means and 95% half-widths");
  run->add_flag("--timing", timing, "append a wall_time_us column (not reproducible)");

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);

  auto* golden = app.add_subcommand("golden", "regenerate a golden fixture");
  golden->add_option("--config", config_path, "fixture config")->required()->check(CLI::ExistingFile);
  golden->add_option("--out", out_path, "fixture CSV path")->required();
  golden->add_flag("--overwrite", overwrite, "required: confirm replacing the fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  ofdma::harness::ExperimentConfig config;
  try {
    config = ofdma::harness::load_config(config_path);
    if (seed) config.seed = *seed;
  } catch (const ofdma::Error& e) {
    return report(e);
  }

  if (*validate) {
    std::cout << "config ok: " << ofdma::harness::to_string(config.scenario) << ", " << config.trials << " trials, "
              << config.schemes.size() << " scheme pair(s)\n";
    return 0;
  }

  if (*golden && !overwrite) {
    std::cerr << "refusing to regenerate " << out_path << " without --overwrite\n";
    return kConfigError;
  }

  try {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto result = ofdma::harness::run_experiment(config, *golden ? 1u : threads);
    ofdma::harness::emit_csv(result.rows, out_path, timing && !*golden);
    if (!summary_path.empty()) {
      std::ofstream out(summary_path, std::ios::binary);
      if (!out) throw ofdma::Error(ofdma::ErrorKind::Io, "cannot open " + summary_path + " for writing");
      ofdma::harness::write_summary_csv(out, result.summary);
    }
    std::size_t errors = 0;
    for (const auto& r : result.rows) errors += r.ok() ? 0 : 1;
    std::cerr << result.rows.size() << " rows written to " << out_path;
    if (errors) std::cerr << " (" << errors << " error rows)";
    std::cerr << '\n';
  } catch (const ofdma::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
