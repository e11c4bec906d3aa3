#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ofdma/config.hpp"
#include "ofdma/harness.hpp"

namespace ofdma::harness {
namespace {

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_csv(os, r.rows);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig tiny() {
  return parse_config_text(R"({
    "subcarriers": 32, "users": 3, "taps": [2, 4, 8], "weights": [1, 2, 2],
    "snr_db": [0, 10], "chunk_sizes": [1, 4], "trials": 6, "seed": 9,
    "schemes": [{"sa": "proposed", "pa": "proposed"}, {"sa": "shen", "pa": "uniform"},
                {"sa": "static", "pa": "exact"}]
  })");
}

TEST(Harness, SingleRowDeterministic) {
  auto c = parse_config_text(R"({"trials": 1, "snr_db": 0, "seed": 3})");
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_EQ(a.rows[0].rates.size(), 4u);
}

TEST(Harness, RowOrderAndThreadIndependence) {
  const auto c = tiny();
  const auto serial = run_experiment(c, 1);
  const auto parallel = run_experiment(c, 4);
  EXPECT_EQ(csv_of(serial), csv_of(parallel));
  ASSERT_EQ(serial.rows.size(), 2u * 2u * 6u * 3u);
  // (sweep point, trial, scheme) order: L outer, SNR inner.
  EXPECT_EQ(serial.rows[0].chunk_size, 1u);
  EXPECT_NEAR(*serial.rows[0].snr_db, 0.0, 1e-12);
  EXPECT_EQ(serial.rows[3].trial, 1u);
  EXPECT_EQ(serial.rows[1].sa, "shen");
  EXPECT_NEAR(*serial.rows[18].snr_db, 10.0, 1e-12);
  EXPECT_EQ(serial.rows[36].chunk_size, 4u);
}

TEST(Harness, ChannelsSharedAcrossSweepPoints) {
  const auto r = run_experiment(tiny());
  // Static SA with exact PA at fixed L: higher SNR never lowers any rate.
  for (std::size_t t = 0; t < 6; ++t) {
    const auto& lo = r.rows[t * 3 + 2];
    const auto& hi = r.rows[18 + t * 3 + 2];
    ASSERT_EQ(lo.trial, hi.trial);
    EXPECT_GT(hi.sum_rate, lo.sum_rate);
  }
}

TEST(Harness, SummaryAggregates) {
  const auto r = run_experiment(tiny());
  ASSERT_EQ(r.summary.size(), 2u * 2u * 3u);
  const auto& s = r.summary[0];
  double mean = 0.0;
  for (std::size_t t = 0; t < 6; ++t) mean += r.rows[t * 3].sum_rate;
  EXPECT_NEAR(s.sum_rate.mean(), mean / 6.0, 1e-12);
  EXPECT_EQ(s.sum_rate.count(), 6u);
  std::ostringstream os;
  write_summary_csv(os, r.summary);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
}

TEST(Harness, InfeasibleRowsDoNotStopTheRun) {
  auto c = parse_config_text(R"({
    "subcarriers": 16, "users": 4, "taps": 2, "snr_db": [0], "chunk_sizes": [4, 8], "trials": 2,
    "schemes": [{"sa": "proposed", "pa": "proposed"}, {"sa": "exhaustive", "pa": "exact"}]
  })");
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 8u);
  EXPECT_TRUE(r.rows[0].ok());
  EXPECT_TRUE(r.rows[1].ok());
  EXPECT_EQ(*r.rows[1].norm_sum_rate, 1.0);
  for (std::size_t i = 4; i < 8; ++i) EXPECT_NE(r.rows[i].error.find("infeasible-configuration"), std::string::npos);
  EXPECT_EQ(r.summary.back().errors, 2u);
}

TEST(Harness, OracleCapBecomesErrorRow) {
  auto c = parse_config_text(R"({
    "subcarriers": 32, "users": 2, "taps": 2, "snr_db": [0], "trials": 1, "oracle_max_candidates": 1000,
    "schemes": [{"sa": "exhaustive", "pa": "uniform"}]
  })");
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NE(r.rows[0].error.find("oracle-too-large"), std::string::npos);
}

TEST(Harness, MulticellRowsPerGroup) {
  auto c = parse_config_text(R"({
    "scenario": "multi-cell", "subcarriers": 128, "users": 8, "chunk_sizes": [1, 4], "trials": 3, "seed": 5,
    "multicell": {"taps": 4, "desired_path_loss": true}
  })");
  const auto r = run_experiment(c);
  EXPECT_EQ(r.rows.size(), 2u * 3u * 3u * 2u);
  EXPECT_EQ(r.rows[0].group, "centre");
  EXPECT_EQ(r.rows[1].group, "edge");
  EXPECT_FALSE(r.rows[0].snr_db.has_value());
  auto no_ffr = c;
  no_ffr.scenario = ScenarioKind::MultiCellNoFfr;
  const auto b = run_experiment(no_ffr);
  EXPECT_EQ(b.rows[0].scenario, "multi-cell-no-ffr");
}

TEST(Csv, EmptyRowSetIsHeaderOnly) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, ErrorRowQuotingAndTiming) {
  ResultRow row;
  row.scenario = "single-cell";
  row.group = "all";
  row.sa = "proposed";
  row.pa = "proposed";
  row.error = "bad, \"thing\"";
  std::ostringstream os;
  write_csv(os, {row}, true);
  EXPECT_NE(os.str().find("\"bad, \"\"thing\"\"\",0\n"), std::string::npos);
  EXPECT_NE(os.str().find(",wall_time_us\n"), std::string::npos);
}

TEST(Csv, UnwritablePath) {
  try {
    emit_csv({}, "/nonexistent-dir/out.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Csv, FileRoundTripIsByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto c = tiny();
  emit_csv(run_experiment(c).rows, (dir / "ofdma_a.csv").string());
  emit_csv(run_experiment(c, 3).rows, (dir / "ofdma_b.csv").string());
  EXPECT_EQ(read_file((dir / "ofdma_a.csv").string()), read_file((dir / "ofdma_b.csv").string()));
}

TEST(Golden, FixtureMatches) {
  const std::string root = OFDMA_SOURCE_DIR;
  const auto c = load_config(root + "/tests/golden/fixture.json");
  const std::string expected = read_file(root + "/tests/golden/fixture.csv");
  ASSERT_FALSE(expected.empty());
  EXPECT_EQ(csv_of(run_experiment(c)), expected);
}

TEST(Config, Rejections) {
  auto kind_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // sentinel: accepted
  };
  EXPECT_EQ(kind_of(R"({"trials": 0})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"bogus": 1})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"users": 3, "taps": [1, 2]})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"schemes": [{"sa": "greedy", "pa": "uniform"}]})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"scenario": "multi-cell", "schemes": [{"sa": "proposed", "pa": "proposed"}]})"),
            ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"scenario": "multi-cell", "schemes": [{"sa": "exhaustive", "pa": "uniform"}]})"),
            ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"scenario": "multi-cell", "multicell": {"frf": 4}})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of("{not json"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"subcarriers": 8, "taps": [4, 8, 16, 32]})"), ErrorKind::InvalidConfiguration);
  EXPECT_EQ(kind_of(R"({"snr_db": 5})"), ErrorKind::Io);
}

TEST(Config, Defaults) {
  const auto single = parse_config_text("{}");
  EXPECT_EQ(single.subcarriers, 128u);
  EXPECT_EQ(single.trials, 500u);
  EXPECT_EQ(single.weights, (std::vector<double>{1, 1, 4, 4}));
  const auto multi = parse_config_text(R"({"scenario": "multi-cell"})");
  EXPECT_EQ(multi.subcarriers, 512u);
  EXPECT_EQ(multi.users, 8u);
  EXPECT_EQ(multi.trials, 200u);
  EXPECT_EQ(multi.schemes.size(), 3u);
  EXPECT_DOUBLE_EQ(multi.multicell.tau_km, 0.5);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(OFDMA_SIM_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const std::string root = OFDMA_SOURCE_DIR;
  const auto out = (std::filesystem::temp_directory_path() / "ofdma_cli.csv").string();
  EXPECT_EQ(run_cli("validate --config " + root + "/configs/multicell_ffr.json"), 0);
  EXPECT_EQ(run_cli("validate --config " + root + "/tests/data/bad_config.json"), 1);
  EXPECT_EQ(run_cli("run --config " + root + "/configs/smoke.json --out /nonexistent-dir/x.csv"), 2);
  EXPECT_EQ(run_cli("run --config " + root + "/configs/smoke.json --out " + out + " --seed 11 --threads 3"), 0);
  EXPECT_EQ(run_cli("golden --config " + root + "/tests/golden/fixture.json --out " + out), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
}

}  // namespace
}  // namespace ofdma::harness
