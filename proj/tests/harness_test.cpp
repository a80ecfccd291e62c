#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "conescoop/harness.hpp"

namespace cs = conescoop;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("conescoop_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A quick trial: one gram of rice in the matched 110 mm setup.
cs::RunConfig light_config() {
  auto c = cs::experiment_matrix(3).back();
  c.granular.total_mass = 0.001;
  c.trials = 2;
  return c;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST(Harness, TrialSeedIsStableAndSpread) {
  const auto a = cs::trial_seed(1, "exp1", 0);
  EXPECT_EQ(a, cs::trial_seed(1, "exp1", 0));
  EXPECT_NE(a, cs::trial_seed(1, "exp1", 1));
  EXPECT_NE(a, cs::trial_seed(2, "exp1", 0));
  EXPECT_NE(a, cs::trial_seed(1, "exp2", 0));
}

TEST(Harness, ConfigRoundTripsThroughJson) {
  const auto c = cs::load_run_config(fs::path(CONESCOOP_SOURCE_DIR) / "configs/pp_110_90_flour.json");
  EXPECT_EQ(c.scenario_name, "pp_110_90_flour");
  EXPECT_NEAR(c.container.inner_diameter, 0.110, 1e-12);
  EXPECT_NEAR(c.effector.bottom_diameter, 0.090, 1e-12);
  EXPECT_NEAR(c.granular.total_mass, 0.010, 1e-12);
  const auto again = cs::parse_run_config(cs::dump_run_config(c));
  EXPECT_EQ(cs::dump_run_config(again), cs::dump_run_config(c));
}

TEST(Harness, ConfigErrorsAreDiagnosed) {
  try {
    cs::load_run_config("/nonexistent/run.json");
    FAIL();
  } catch (const cs::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("not found"), std::string::npos);
  }
  try {
    cs::parse_run_config("{\n  \"trials\": 3,\n  \"container\": {,}\n}", "bad.json");
    FAIL();
  } catch (const cs::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
  try {
    cs::parse_run_config(R"({"granular": {"preset": "sand"}})");
    FAIL();
  } catch (const cs::ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("flour"), std::string::npos) << msg;
    EXPECT_NE(msg.find("coffee"), std::string::npos) << msg;
  }
  try {
    cs::parse_run_config(R"({"container": {"diameter_mm": 80}})");
    FAIL();
  } catch (const cs::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("container.diameter_mm"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cs::parse_run_config(R"({"trials": 0})"), cs::ConfigError);
}

TEST(Harness, ExperimentMatrices) {
  const auto e1 = cs::experiment_matrix(1);
  ASSERT_EQ(e1.size(), 12u);
  int skipped = 0;
  for (const auto& c : e1) {
    if (cs::is_not_insertable(c)) {
      ++skipped;
      EXPECT_NEAR(c.container.inner_diameter, 0.067, 1e-12);
      EXPECT_NEAR(c.effector.bottom_diameter, 0.090, 1e-12);
    }
  }
  EXPECT_EQ(skipped, 1);
  const auto e2 = cs::experiment_matrix(2);
  ASSERT_EQ(e2.size(), 6u);
  int ladles = 0;
  for (const auto& c : e2) ladles += c.effector.kind == cs::EffectorKind::Ladle;
  EXPECT_EQ(ladles, 2);
  const auto e3 = cs::experiment_matrix(3);
  ASSERT_EQ(e3.size(), 3u);
  for (const auto& c : e3) {
    EXPECT_NEAR(c.container.inner_diameter, 0.110, 1e-12);
    EXPECT_NEAR(c.effector.bottom_diameter, 0.090, 1e-12);
  }
  EXPECT_THROW(cs::experiment_matrix(4), std::invalid_argument);
}

TEST(Harness, EmptyContainerTrial) {
  auto c = light_config();
  c.granular.total_mass = 0.0;
  const auto r = cs::run_trial(c, 0);
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.delivered_fraction, 0.0);
  EXPECT_EQ(r.residue_fraction, 0.0);
}

TEST(Harness, NotInsertableCellIsMarked) {
  auto c = cs::experiment_matrix(1)[9];
  ASSERT_TRUE(cs::is_not_insertable(c));
  const auto r = cs::run_trial(c, 0);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.reason, "not_insertable");
  EXPECT_EQ(cs::summarize_cell(c, {r}).status, "not_insertable");
}

TEST(Harness, TrialIsDeterministicAndConservesMass) {
  const auto c = light_config();
  const auto a = cs::run_trial(c, 0);
  const auto b = cs::run_trial(c, 0);
  ASSERT_FALSE(a.aborted) << a.reason;
  EXPECT_EQ(a.delivered_fraction, b.delivered_fraction);
  EXPECT_EQ(a.residue_fraction, b.residue_fraction);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_NEAR(a.fraction_sum(), 1.0, 1e-6);
  EXPECT_LE(a.max_boundary_penetration, 0.10);
  EXPECT_LE(a.max_coulomb_excess, 1e-12);
  EXPECT_LT(a.max_sheet_strain, 0.01);
  for (double f : {a.delivered_fraction, a.residue_fraction, a.spilled_fraction, a.carried_end_fraction}) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  EXPECT_GT(a.delivered_fraction, 0.5);
}

TEST(Harness, SweepIsIndependentOfWorkerCount) {
  auto base = light_config();
  base.trials = 1;
  auto other = base;
  other.scenario_name = "light_flour";
  other.granular = cs::granular_preset("coffee");
  other.granular.total_mass = 0.001;
  const std::vector<cs::RunConfig> matrix{base, other, cs::experiment_matrix(1)[9]};

  const auto dir = scratch("jobs");
  const auto one = cs::run_sweep(matrix, 1);
  const auto two = cs::run_sweep(matrix, 2);
  cs::write_results_csv(one.trials, dir / "one.csv");
  cs::write_results_csv(two.trials, dir / "two.csv");
  EXPECT_EQ(slurp(dir / "one.csv"), slurp(dir / "two.csv"));
  ASSERT_EQ(one.cells.size(), 3u);
  EXPECT_EQ(one.cells[2].status, "not_insertable");

  // Summary means recomputed from the per-trial rows.
  cs::write_summary_csv(one.cells, dir / "summary.csv");
  std::ifstream rows(dir / "one.csv");
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line,
            "scenario,container_D_mm,effector,effector_d_mm,material,trial,seed,delivered_fraction,residue_fraction,"
            "spilled_fraction,carried_end_fraction,lateral_coverage,aborted,reason");
  std::map<std::string, std::pair<double, int>> acc;
  while (std::getline(rows, line)) {
    const auto f = split(line);
    if (f.at(12) == "1") continue;
    auto& a = acc[f[0] + "|" + f[4]];
    a.first += std::stod(f[7]);
    a.second += 1;
  }
  std::ifstream summary(dir / "summary.csv");
  std::getline(summary, line);
  int compared = 0;
  while (std::getline(summary, line)) {
    const auto f = split(line);
    if (f.at(5) == "not_insertable") continue;
    const auto& a = acc.at(f[0] + "|" + f[4]);
    EXPECT_NEAR(std::stod(f[8]), a.first / a.second, 2e-6);
    ++compared;
  }
  EXPECT_EQ(compared, 2);
}

TEST(Harness, SummaryStatistics) {
  const auto c = light_config();
  std::vector<cs::ScoopTrialResult> t(3);
  t[0].delivered_fraction = 0.9;
  t[1].delivered_fraction = 0.8;
  t[2].aborted = true;
  const auto s = cs::summarize_cell(c, t);
  EXPECT_EQ(s.status, "partial");
  EXPECT_EQ(s.aborted, 1);
  EXPECT_NEAR(s.delivered_mean, 0.85, 1e-12);
  EXPECT_NEAR(s.delivered_std, std::sqrt(0.005), 1e-12);
}

TEST(Harness, MatrixFileMergesDefaults) {
  const auto dir = scratch("matrix");
  std::ofstream(dir / "m.json") << R"({
    "defaults": {"scenario": "m", "trials": 2, "granular": {"preset": "rice"}},
    "cells": [
      {"container": {"inner_diameter_mm": 110}, "effector": {"bottom_diameter_mm": 90}},
      {"container": {"inner_diameter_mm": 93}, "granular": {"preset": "coffee"}}
    ]})";
  const auto m = cs::load_matrix(dir / "m.json");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].granular.material_name, "rice");
  EXPECT_EQ(m[1].granular.material_name, "coffee");
  EXPECT_EQ(m[1].trials, 2);
  EXPECT_NEAR(m[1].container.inner_diameter, 0.093, 1e-12);
}

TEST(Harness, ShippedMatrixFilesMatchBuiltInExperiments) {
  for (int e : {1, 2, 3}) {
    const auto file = cs::load_matrix(fs::path(CONESCOOP_SOURCE_DIR) / ("configs/exp" + std::to_string(e) + ".json"));
    const auto built = cs::experiment_matrix(e);
    ASSERT_EQ(file.size(), built.size()) << e;
    for (std::size_t i = 0; i < built.size(); ++i) {
      EXPECT_EQ(cs::dump_run_config(file[i]), cs::dump_run_config(built[i])) << "exp" << e << " cell " << i;
    }
  }
}

TEST(Harness, OutputDirectoryResolution) {
  EXPECT_EQ(cs::resolve_out_dir(std::string("x")), fs::path("x"));
  ::setenv("CONESCOOP_OUT_DIR", "/tmp/env_out", 1);
  EXPECT_EQ(cs::resolve_out_dir(std::nullopt), fs::path("/tmp/env_out"));
  ::unsetenv("CONESCOOP_OUT_DIR");
  EXPECT_EQ(cs::resolve_out_dir(std::nullopt), fs::path("out"));
}
