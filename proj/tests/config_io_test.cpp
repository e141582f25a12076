// Copyright 2026 The oqwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oqwalk/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>

#include "gtest/gtest.h"
#include "oqwalk/io.hpp"
#include "oqwalk/runner.hpp"

using namespace oqwalk;

namespace {

std::string paper_config(const std::string& extra = "") {
  return "g = 0.02\n"
         "delta = 1\n"
         "gamma = 0.2\n"
         "n_th = 5\n"
         "dt = 0.02\n"
         "initial_site = 20\n" +
         extra;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "oqwalk_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(ParseConfig, AcceptsPaperConfiguration) {
  const RunConfig cfg = parse_config(paper_config());
  EXPECT_EQ(cfg.g, 0.02);
  EXPECT_EQ(cfg.n_th, 5.0);
  EXPECT_EQ(cfg.k_max, 200);
  EXPECT_EQ(cfg.n_steps, 10000);
  EXPECT_EQ(cfg.effective_record_every(), 1000);
  EXPECT_EQ(cfg.initial_qubit, InitialQubit::Ground);
  EXPECT_EQ(cfg.mode, OperatorMode::Paper);
  EXPECT_TRUE(cfg.effective_renormalize());
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ParseConfig, CompletedModeDefaultsToNoRenormalization) {
  const RunConfig cfg = parse_config(paper_config("mode = completed\n"));
  EXPECT_FALSE(cfg.effective_renormalize());
  const RunConfig forced = parse_config(paper_config("mode = completed\nrenormalize = true\n"));
  EXPECT_TRUE(forced.effective_renormalize());
}

TEST(ParseConfig, RejectsHardCouplingLimit) {
  const RunConfig cfg = parse_config(
      "g = 0.5\ndelta = 1\ngamma = 0.2\nn_th = 1\ndt = 0.02\ninitial_site = 5\nk_max = 1\n");
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(ParseConfig, RejectsInitialSiteOutOfRange) {
  const RunConfig cfg = parse_config(paper_config("k_max = 200\n"));
  RunConfig moved = cfg;
  moved.initial_site = 300;
  EXPECT_THROW(moved.validate(), ParameterError);
}

TEST(ParseConfig, UnknownKeyNamesLine) {
  try {
    parse_config(paper_config("gama = 0.2\n"));
    FAIL() << "expected ConfigParseError";
  } catch (const ConfigParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 7"), std::string::npos);
    EXPECT_NE(msg.find("gama"), std::string::npos);
  }
}

TEST(ParseConfig, MalformedLineAndNumber) {
  EXPECT_THROW(parse_config("g 0.02\n"), ConfigParseError);
  EXPECT_THROW(parse_config("g = abc\n"), ConfigParseError);
  EXPECT_THROW(parse_config(paper_config("n_steps = 1.5\n")), ConfigParseError);
  EXPECT_THROW(parse_config(paper_config("renormalize = yes\n")), ConfigParseError);
  EXPECT_THROW(parse_config(paper_config("g = 0.03\n")), ConfigParseError);  // repeated key
  EXPECT_THROW(parse_config("g = 0.02\ndelta = 1\n"), ConfigParseError);     // missing keys
}

TEST(ParseConfig, InitialQubitForms) {
  EXPECT_EQ(parse_config(paper_config("initial_qubit = excited\n")).initial_qubit,
            InitialQubit::Excited);
  const RunConfig explicit_cfg =
      parse_config(paper_config("initial_qubit = 0.25 0.75 0.1 -0.05\n"));
  EXPECT_EQ(explicit_cfg.initial_qubit, InitialQubit::Explicit);
  const ComplexMatrix q = explicit_cfg.initial_qubit_matrix();
  EXPECT_EQ(q(0, 0), Complex(0.25));
  EXPECT_EQ(q(1, 1), Complex(0.75));
  EXPECT_EQ(q(0, 1), Complex(0.1, 0.05));
  EXPECT_EQ(q(1, 0), Complex(0.1, -0.05));
  EXPECT_NO_THROW(explicit_cfg.validate());
  EXPECT_THROW(parse_config(paper_config("initial_qubit = 0.5 0.5 0.1\n")), ConfigParseError);
  // Trace-1 but not PSD.
  RunConfig bad = parse_config(paper_config("initial_qubit = 1.5 -0.5 0 0\n"));
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(ParseConfig, RoundTripThroughSerialization) {
  RunConfig cfg = parse_config(paper_config(
      "k_max = 150\nn_steps = 4000\nrecord_every = 77\ninitial_qubit = 0.3 0.7 0.12 0.04\n"
      "mode = completed\nrenormalize = true\nout_dir = results/run1\n"));
  const RunConfig back = parse_config(serialize_config(cfg));
  EXPECT_EQ(back.g, cfg.g);
  EXPECT_EQ(back.delta, cfg.delta);
  EXPECT_EQ(back.gamma, cfg.gamma);
  EXPECT_EQ(back.n_th, cfg.n_th);
  EXPECT_EQ(back.dt, cfg.dt);
  EXPECT_EQ(back.k_max, cfg.k_max);
  EXPECT_EQ(back.n_steps, cfg.n_steps);
  EXPECT_EQ(back.effective_record_every(), cfg.effective_record_every());
  EXPECT_EQ(back.initial_site, cfg.initial_site);
  EXPECT_EQ(back.initial_qubit, cfg.initial_qubit);
  EXPECT_EQ(back.qubit_entries, cfg.qubit_entries);
  EXPECT_EQ(back.mode, cfg.mode);
  EXPECT_EQ(back.effective_renormalize(), cfg.effective_renormalize());
  EXPECT_EQ(back.out_dir, cfg.out_dir);
}

TEST(CsvFormat, SeventeenDigitsRoundTripBinary64) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> values = {1.0 / 3.0, 6.02214076e23, 1e-300, 0.0, -0.0, 5.0e-324};
  for (int i = 0; i < 50; ++i) values.push_back(std::ldexp(uni(rng), (i % 60) - 30));
  for (double v : values) {
    const std::string text = csv::field(v);
    const double back = std::strtod(text.c_str(), nullptr);
    EXPECT_EQ(back, v) << text;
  }
}

TEST(Runner, ZeroStepWalkWritesSingleRow) {
  const auto dir = fresh_dir("zero_step");
  RunConfig cfg = parse_config(paper_config("n_steps = 0\nk_max = 60\n"));
  cfg.out_dir = dir.string();
  const RunResult result = run_walk(cfg);
  EXPECT_EQ(result.final_record.step, 0);
  EXPECT_EQ(result.final_record.mu, 20.0);
  const auto summary = csv::read(dir / "summary.csv");
  ASSERT_EQ(summary.rows.size(), 1u);
  EXPECT_EQ(summary.rows[0][0], "0");
  EXPECT_EQ(summary.header.size(), 11u);
  const auto dist = csv::read(dir / "distribution.csv");
  EXPECT_EQ(dist.rows.size(), 61u);
}

TEST(Runner, WalkOutputsAreByteIdentical) {
  const auto dir_a = fresh_dir("det_a");
  const auto dir_b = fresh_dir("det_b");
  RunConfig cfg = parse_config(paper_config("n_steps = 300\nk_max = 80\nrecord_every = 50\n"));
  cfg.out_dir = dir_a.string();
  run_walk(cfg);
  cfg.out_dir = dir_b.string();
  run_walk(cfg);
  EXPECT_EQ(read_text_file(dir_a / "summary.csv"), read_text_file(dir_b / "summary.csv"));
  EXPECT_EQ(read_text_file(dir_a / "distribution.csv"),
            read_text_file(dir_b / "distribution.csv"));
}

TEST(Runner, SummaryRoundTripsThroughCsv) {
  const auto dir = fresh_dir("roundtrip");
  RunConfig cfg = parse_config(paper_config("n_steps = 200\nk_max = 60\nrecord_every = 100\n"));
  cfg.out_dir = dir.string();
  const RunResult result = run_walk(cfg);
  const auto summary = csv::read(dir / "summary.csv");
  ASSERT_EQ(summary.rows.size(), 3u);  // steps 0, 100, 200
  const auto& last = summary.rows.back();
  EXPECT_EQ(std::strtod(last[3].c_str(), nullptr), result.final_record.mu);
  EXPECT_EQ(std::strtod(last[4].c_str(), nullptr), result.final_record.sigma2);
  EXPECT_EQ(std::strtod(last[2].c_str(), nullptr), result.final_record.trace_pre_renorm);
}

TEST(Runner, OdeAndReferenceProduceRecords) {
  const auto dir = fresh_dir("ode_run");
  RunConfig cfg = parse_config(paper_config("n_steps = 100\nk_max = 40\nrecord_every = 50\n"));
  cfg.out_dir = dir.string();
  const RunResult ode = run_ode(cfg);
  EXPECT_EQ(ode.final_record.step, 100);
  EXPECT_NEAR(ode.final_record.trace_pre_renorm, 1.0, 1e-9);

  const auto ref_dir = fresh_dir("reference_run");
  RunConfig ref_cfg = parse_config(paper_config("n_steps = 100\nk_max = 40\nrecord_every = 50\n"));
  ref_cfg.out_dir = ref_dir.string();
  ref_cfg.initial_site = 5;
  const RunResult ref = run_reference(ref_cfg, 12);
  EXPECT_EQ(ref.final_record.step, 100);
  EXPECT_NEAR(ref.final_record.trace_pre_renorm, 1.0, 1e-8);
  const auto manifest = read_text_file(ref_dir / "manifest.json");
  EXPECT_NE(manifest.find("\"fock_cutoff\": 12"), std::string::npos);
}

TEST(Runner, SweepWritesPerPointDirectoriesAndTable) {
  const auto dir = fresh_dir("sweep_run");
  RunConfig cfg = parse_config(paper_config("n_steps = 200\nk_max = 60\nrecord_every = 100\n"));
  cfg.out_dir = dir.string();
  const auto results = run_sweep(cfg, {0.5, 1.0});
  EXPECT_EQ(results.size(), 2u);
  const auto sweep = csv::read(dir / "sweep.csv");
  ASSERT_EQ(sweep.rows.size(), 2u);
  EXPECT_EQ(sweep.rows[0][0], "0.5");
  EXPECT_EQ(sweep.rows[1][0], "1");
  EXPECT_TRUE(std::filesystem::exists(dir / "nth_0p5" / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "nth_1" / "summary.csv"));
}

TEST(Runner, LeakBreachSurfacesAsTypedError) {
  // Initial site at the right lattice end: the edge channel leaks more than
  // the policy tolerates within a few steps.
  RunConfig cfg = parse_config(paper_config("k_max = 20\nn_steps = 50\n"));
  cfg.out_dir = fresh_dir("leak_breach").string();
  EXPECT_THROW(run_walk(cfg), LeakExceeded);
}

TEST(Runner, ValidatePassesOnPaperConfig) {
  RunConfig cfg = parse_config(paper_config("k_max = 120\n"));
  const ValidateReport report = run_validate(cfg);
  EXPECT_TRUE(report.passed);
  bool saw_ratio_line = false;
  for (const auto& line : report.lines)
    if (line.find("residual(dt/2)/residual(dt)") != std::string::npos) saw_ratio_line = true;
  EXPECT_TRUE(saw_ratio_line);
}
