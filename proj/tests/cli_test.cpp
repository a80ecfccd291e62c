#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "conescoop");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = conescoop::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, ConeTableShowsMinimumSlide) {
  const auto r = cli({"cone", "--sheet-radius-mm", "50", "--container-diameter-mm", "80"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("72.00"), std::string::npos);
  EXPECT_NE(r.out.find("min_slide_angle_deg"), std::string::npos);
  EXPECT_NE(r.out.find("106.26"), std::string::npos);
}

TEST(Cli, ConeDomainErrorExitsNonzero) {
  const auto r = cli({"cone", "--container-diameter-mm", "40"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("sheet radius"), std::string::npos);
}

TEST(Cli, MissingConfigFails) {
  const auto r = cli({"run", "--config", "missing.cfg"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("missing.cfg"), std::string::npos);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
}

TEST(Cli, SweepNeedsExactlyOneSource) {
  EXPECT_NE(cli({"sweep"}).code, 0);
  EXPECT_NE(cli({"sweep", "--experiment", "1", "--matrix", "m.json"}).code, 0);
  EXPECT_NE(cli({"sweep", "--experiment", "7"}).code, 0);
  EXPECT_NE(cli({"sweep", "--experiment", "1", "--jobs", "0"}).code, 0);
}

TEST(Cli, UnknownSubcommandFails) { EXPECT_NE(cli({"frobnicate"}).code, 0); }

TEST(Cli, ExportPlanWritesWaypoints) {
  const fs::path out = fs::temp_directory_path() / "conescoop_cli_plan.csv";
  fs::remove(out);
  const auto r = cli({"export-plan", "--config", std::string(CONESCOOP_SOURCE_DIR) + "/configs/pp_110_90_flour.json",
                      "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(out);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x_mm,y_mm,angle_deg,phase");
  int rows = 0;
  bool saw_sweep = false;
  while (std::getline(in, line)) {
    ++rows;
    saw_sweep |= line.ends_with(",sweep");
  }
  EXPECT_GT(rows, 20);
  EXPECT_TRUE(saw_sweep);
}
