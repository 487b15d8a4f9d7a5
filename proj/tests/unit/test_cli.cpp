#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "vslctm/calibrate.hpp"
#include "vslctm/scenario.hpp"

namespace fs = std::filesystem;
using namespace vslctm;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vslctm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("unknown subcommand"), std::string::npos);
  EXPECT_EQ(run({"run"}).code, cli::kUsage);
  EXPECT_EQ(run({"bound", "paper_high_demand", "--v0", "fast"}).code, cli::kUsage);
}

TEST_F(CliTest, PresetsListAndShow) {
  const auto list = run({"presets"});
  EXPECT_EQ(list.code, cli::kOk);
  EXPECT_NE(list.out.find("paper_high_demand"), std::string::npos);
  const auto show = run({"presets", "--show", "paper_moderate_demand"});
  EXPECT_EQ(show.code, cli::kOk);
  EXPECT_EQ(parse_scenario(show.out), preset("paper_moderate_demand"));
  EXPECT_EQ(run({"presets", "--show", "nope"}).code, cli::kValidation);
}

TEST_F(CliTest, BoundPrintsLowerBound) {
  const auto r = run({"bound", "paper_high_demand"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("1.7622 km"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("absorbed"), std::string::npos);
  const auto m = run({"bound", "paper_moderate_demand"});
  EXPECT_NE(m.out.find("0.7036 km"), std::string::npos) << m.out;
}

TEST_F(CliTest, BoundInfeasibleExitsTwo) {
  const auto r = run({"bound", "paper_high_demand", "--v0", "70"});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.out.find("infeasible"), std::string::npos);
}

TEST_F(CliTest, BoundDensityCountChecked) {
  EXPECT_EQ(run({"bound", "paper_high_demand", "--densities", "70,70"}).code, cli::kValidation);
}

TEST_F(CliTest, RunWritesTraceAndMetrics) {
  const auto path = write("short.json", R"({"name": "short", "demand": 4000, "horizon": 20})");
  const auto r = run({"run", path, "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "short_trace.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "short_metrics.json"));
  EXPECT_NE(r.out.find("att "), std::string::npos);
}

TEST_F(CliTest, ZeroDemandReportsAttUnavailable) {
  const auto path = write("zero.json", R"({"name": "zero", "demand": 0, "horizon": 10})");
  const auto r = run({"run", path, "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("unavailable"), std::string::npos) << r.out;
}

TEST_F(CliTest, InvalidScenarioExitsTwo) {
  const auto path = write("bad.json", R"({"name": "bad", "demand": 4000, "dt": 120})");
  const auto r = run({"run", path, "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("dt"), std::string::npos);
  const auto broken = write("broken.json", "{");
  EXPECT_EQ(run({"run", broken}).code, cli::kValidation);
  EXPECT_EQ(run({"run", "paper_high_demand", "--controller", "magic"}).code, cli::kValidation);
}

TEST_F(CliTest, SweepWritesSummary) {
  const auto spec = write("s.json", R"({"base": "paper_moderate_demand", "values": [0.4, 1.6]})");
  const auto r = run({"sweep", spec, "--out", dir_.string(), "--jobs", "2"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  std::ifstream f(dir_ / "paper_moderate_demand_zone_length_sweep.csv");
  ASSERT_TRUE(f);
  int data = 0;
  for (std::string line; std::getline(f, line);) data += !line.empty() && line[0] != '#';
  EXPECT_EQ(data, 3);  // header plus two rows
}

TEST_F(CliTest, CalibrateWritesParameterFile) {
  std::ofstream obs(dir_ / "obs.csv");
  write_observations(obs, generate_observations(paper_fundamental_diagram(), 600, 0.0, 1));
  obs.close();
  const auto target = (dir_ / "fd.json").string();
  const auto r = run({"calibrate", (dir_ / "obs.csv").string(), "--out", target});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(target));
  const auto bad = write("bad.csv", "density,flow,incident\n1,x,0\n");
  EXPECT_EQ(run({"calibrate", bad, "--out", target}).code, cli::kValidation);
}
