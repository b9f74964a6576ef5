#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("windfarm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(WFSIM_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesOutputs) {
  const auto cfg = write("run.yaml", "inflow: 13\nduration: 400\noutput: {timeseries: ts.csv, metrics: m.yaml}\n");
  EXPECT_EQ(run("simulate " + cfg.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "ts.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "m.yaml"));
  EXPECT_NE(read("stdout.txt").find("rms_error"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitWithOne) {
  EXPECT_EQ(run("simulate " + (dir_ / "missing.yaml").string()), 1);
  EXPECT_EQ(run("simulate " + write("bad.yaml", "inflow: 13\nbogus: 1\n").string()), 1);
  EXPECT_EQ(run("simulate " + write("neg.yaml", "sample_time: -0.1\n").string()), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run(""), 1);
}

TEST_F(Cli, IdentifyThenAnalyze) {
  const auto cfg = write("id.yaml", "identification: {experiment_csv: exp.csv, model: model.txt}\n");
  ASSERT_EQ(run("identify " + cfg.string()), 0);
  ASSERT_TRUE(fs::exists(dir_ / "model.txt"));
  EXPECT_EQ(run("analyze " + (dir_ / "model.txt").string() + " --sweep --turbines 4 --csv " +
                (dir_ / "spectrum.csv").string()),
            0);
  EXPECT_NE(read("stdout.txt").find("stable_patterns = 15/15"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "spectrum.csv"));
}

TEST_F(Cli, SaturatedIdentificationIsNumericalFailure) {
  const auto cfg = write("id.yaml",
                         "identification: {inflow: 9.0, baseline: 2.0e6, step: 1.0e6, experiment_csv: e.csv, "
                         "model: m.txt}\n");
  EXPECT_EQ(run("identify " + cfg.string()), 2);
}

TEST_F(Cli, UnstableDiscretizationIsNumericalFailure) {
  const auto model = write("model.txt", "K1 = 0.02\nT1 = 0.05\nT_s = 0.1\na = -1\nb = 0.04\nfit_percent = 90\n");
  EXPECT_EQ(run("analyze " + model.string()), 2);
  const auto junk = write("junk.txt", "K1 = 0.02\nT1 = 1\nT_s = 0.1\na = nan\nb = nan\nfit_percent = 0\n");
  EXPECT_EQ(run("analyze " + junk.string()), 1);
  EXPECT_EQ(run("analyze " + (dir_ / "nope.txt").string()), 1);
}

TEST_F(Cli, CompareRequiresMatchingScenarios) {
  const auto a = write("a.yaml", "name: a\ninflow: 13\nduration: 400\ncontroller: {setting_case: 1}\n");
  const auto b = write("b.yaml", "name: b\ninflow: 13\nduration: 400\ncontroller: {setting_case: 2}\n");
  const auto c = write("c.yaml", "name: c\ninflow: 12\nduration: 400\n");
  ASSERT_EQ(run("simulate " + a.string() + " --metrics " + (dir_ / "ma.yaml").string()), 0);
  ASSERT_EQ(run("simulate " + b.string() + " --metrics " + (dir_ / "mb.yaml").string()), 0);
  ASSERT_EQ(run("simulate " + c.string() + " --metrics " + (dir_ / "mc.yaml").string()), 0);
  EXPECT_EQ(run("compare " + (dir_ / "ma.yaml").string() + " " + (dir_ / "mb.yaml").string()), 0);
  EXPECT_NE(read("stdout.txt").find("rms ratio"), std::string::npos);
  EXPECT_EQ(run("compare " + (dir_ / "ma.yaml").string() + " " + (dir_ / "mc.yaml").string()), 1);
}
