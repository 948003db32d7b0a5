// Runs the command-line tool as a separate process.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "nvgyro/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string output;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(NVGYRO_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nvgyro_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Cli, RunIsReproducibleAcrossProcesses) {
  const fs::path a = scratch("a"), b = scratch("b");
  const std::string common = "run --preset fig3 --set run.duration=3000 --seed 4";
  ASSERT_EQ(run(common + " --out " + a.string()).status, 0);
  ASSERT_EQ(run(common + " --out " + b.string()).status, 0);
  for (const char* f : {"records_gain_plus.csv", "records_gain_zero.csv", "records_gain_minus.csv"}) {
    EXPECT_EQ(nvgyro::read_text_file((a / f).string()), nvgyro::read_text_file((b / f).string())) << f;
  }
  // Replaying from the manifest reproduces the same bytes.
  const fs::path c = scratch("c");
  ASSERT_EQ(run("run --config " + (a / "manifest.json").string() + " --out " + c.string()).status, 0);
  EXPECT_EQ(nvgyro::read_text_file((a / "records_gain_zero.csv").string()),
            nvgyro::read_text_file((c / "records_gain_zero.csv").string()));
}

TEST(Cli, ConfigErrorsExitWithTwoAndNameTheLine) {
  const fs::path d = scratch("bad");
  nvgyro::write_text_file((d / "bad.conf").string(), "[run]\nseed = 1\nduration = soon\n");
  const auto r = run("run --config " + (d / "bad.conf").string() + " --out " + (d / "out").string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("line 3"), std::string::npos) << r.output;
  EXPECT_EQ(run("run --preset nosuch").status, 2);
  EXPECT_EQ(run("run --preset fig2 --set bogus").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
}

TEST(Cli, RuntimeErrorsExitWithThree) {
  const fs::path d = scratch("rt");
  const auto r = run("run --set run.duration=600 --set sequence.n_r=20 --set analysis.column=G --out " + d.string());
  EXPECT_EQ(r.status, 3);
  EXPECT_TRUE(fs::exists(d / "records_main.csv"));
}

TEST(Cli, AllanOfConstantColumnIsZero) {
  const fs::path d = scratch("allan");
  std::string csv = "t_start[s],F\n";
  for (int i = 0; i < 60; ++i) csv += std::to_string(25 * i) + ",0.125\n";
  nvgyro::write_text_file((d / "rec.csv").string(), csv);
  const auto r = run("allan " + (d / "rec.csv").string() + " --column F --taus 25,50,100");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(r.output, "tau[s],sigma,error,n,sigma_rotation[deg/s]\n25,0,0,60,nan\n50,0,0,30,nan\n100,0,0,15,nan\n");
}

TEST(Cli, AllanMissingColumnListsAvailable) {
  const fs::path d = scratch("allan_missing");
  nvgyro::write_text_file((d / "rec.csv").string(), "t_start[s],F\n0,1\n25,2\n");
  const auto r = run("allan " + (d / "rec.csv").string() + " --column G");
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.output.find("available columns: t_start, F"), std::string::npos) << r.output;
}

TEST(Cli, ReportOfARunAgainstItselfGivesUnitRatios) {
  const fs::path d = scratch("report");
  ASSERT_EQ(run("run --preset fig3 --set run.duration=6000 --out " + (d / "run").string()).status, 0);
  const auto r = run("report " + (d / "run/allan_gain_zero.csv").string() + " " +
                     (d / "run/allan_gain_zero.csv").string() + " --out " + (d / "report.json").string());
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(nvgyro::read_text_file((d / "report.json").string()));
  for (double x : j["comparisons"][0]["improvement"]) EXPECT_EQ(x, 1.0);
}

TEST(Cli, ReportRejectsMismatchedGrids) {
  const fs::path d = scratch("grids");
  nvgyro::write_text_file((d / "a.csv").string(), "tau[s],sigma,error,n,sigma_rotation[deg/s]\n1,1,0.1,9,nan\n2,1,0.1,4,nan\n");
  nvgyro::write_text_file((d / "b.csv").string(), "tau[s],sigma,error,n,sigma_rotation[deg/s]\n1,1,0.1,9,nan\n3,1,0.1,3,nan\n");
  EXPECT_EQ(run("report " + (d / "a.csv").string() + " " + (d / "b.csv").string()).status, 3);
}

TEST(Cli, EstimateReadsFourPointColumns) {
  const fs::path d = scratch("estimate");
  nvgyro::write_text_file((d / "r.csv").string(),
                          "nu1[Hz],nu2[Hz],nu3[Hz],nu4[Hz],esr1,esr2,esr3,esr4\n"
                          "-3,-1,1,3,0.9,0.4,0.4,0.9\n"
                          "-3,-1,1,3,1,1,1,1\n");
  const auto r = run("estimate " + (d / "r.csv").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("0,0,ok"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("1,nan,\"out_of_band: "), std::string::npos) << r.output;
}

TEST(Cli, FieldDumpAndCalibrate) {
  const auto f = run("field --preset fig2 --duration 500 --step 250");
  ASSERT_EQ(f.status, 0) << f.output;
  EXPECT_EQ(f.output.substr(0, f.output.find('\n')), "t[s],b[G],component0[G],component1[G],component2[G]");
  EXPECT_NE(f.output.find("\n250,"), std::string::npos);

  const fs::path d = scratch("cal");
  const auto c = run("calibrate --preset fig1e --out " + d.string());
  ASSERT_EQ(c.status, 0) << c.output;
  EXPECT_NE(c.output.find("F: slope"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "phase_sweep.csv"));
}

TEST(Cli, DefaultOutputRootFromEnvironment) {
  const fs::path d = scratch("env");
  const std::string cmd = "NVGYRO_OUT=" + d.string() + " ";
  FILE* pipe = popen((cmd + NVGYRO_CLI_PATH + " run --preset fig4 2>&1").c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) {
  }
  EXPECT_EQ(WEXITSTATUS(pclose(pipe)), 0);
  EXPECT_TRUE(fs::exists(d / "fig4" / "study_grid.csv"));
}

}  // namespace
