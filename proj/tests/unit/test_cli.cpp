#include <gtest/gtest.h>

#include <filesystem>
#include <unistd.h>

#include "cdaloc/cli.hpp"
#include "cdaloc/json_io.hpp"

using namespace cdaloc;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("cdaloc_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

  std::string small_config() {
    auto cfg = ScenarioConfig::defaults();
    cfg.n_experiments = 3;
    const auto p = path("scenario.json");
    write_text_file(p, dump_json(config_to_json(cfg)));
    return p;
  }

  fs::path root_;
};

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, SimulateWritesExperimentsAndManifest) {
  ASSERT_EQ(run_cli({"simulate", "--config", small_config(), "--seed", "4", "--out", path("data")}), 0);
  EXPECT_TRUE(fs::exists(path("data/experiment_01.json")));
  EXPECT_TRUE(fs::exists(path("data/experiment_03.json")));
  EXPECT_FALSE(fs::exists(path("data/experiment_04.json")));
  const auto manifest = nlohmann::json::parse(read_text_file(path("data/manifest.json")));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["seed"], 4);
  EXPECT_EQ(manifest["toolkit_version"], toolkit_version());
  EXPECT_TRUE(manifest.contains("duration_s"));
}

TEST_F(CliTest, LocateAllMethods) {
  ASSERT_EQ(run_cli({"simulate", "--config", small_config(), "--out", path("data")}), 0);
  ASSERT_EQ(run_cli({"locate", "--data", path("data"), "--method", "all", "--out", path("loc")}), 0);
  for (const char* m : {"llsrs", "cda", "lmes", "rwgh"}) {
    const auto trace = read_text_file(path(std::string("loc/trace_") + m + ".csv"));
    EXPECT_EQ(trace.rfind("experiment,mp,truth_x,truth_y,est_x,est_y,err_m\n", 0), 0u);
    EXPECT_EQ(line_count(trace), 1u + 3u * 34u);
  }
  const auto summary = read_text_file(path("loc/summary.csv"));
  EXPECT_EQ(line_count(summary), 1u + 4u * 4u);
  EXPECT_NE(summary.find("cda,all,"), std::string::npos);
}

TEST_F(CliTest, FuseReportsBothModes) {
  ASSERT_EQ(run_cli({"fuse", "--config", small_config(), "--out", path("fuse")}), 0);
  const auto summary = read_text_file(path("fuse/summary.csv"));
  EXPECT_NE(summary.find("cda,all,"), std::string::npos);
  EXPECT_NE(summary.find("cda_pdr_updating,all,"), std::string::npos);
  EXPECT_NE(summary.find("cda_pdr_deterministic,all,"), std::string::npos);
}

TEST_F(CliTest, FuseWithoutSegmentsIsDataError) {
  ASSERT_EQ(run_cli({"simulate", "--config", small_config(), "--out", path("data")}), 0);
  auto j = nlohmann::json::parse(read_text_file(path("data/experiment_02.json")));
  j.erase("segments");
  write_text_file(path("data/experiment_02.json"), j.dump());
  EXPECT_EQ(run_cli({"fuse", "--data", path("data"), "--out", path("fuse")}), kExitData);
  EXPECT_EQ(run_cli({"locate", "--data", path("data"), "--out", path("loc")}), 0);
}

TEST_F(CliTest, FbpWritesMatrixAndModel) {
  ASSERT_EQ(run_cli({"fbp", "--config", small_config(), "--features", "remaining_pels", "--label",
                     "cda_pdr", "--model", "all", "--repeats", "2", "--trees", "8", "--save-model",
                     "--out", path("fbp")}),
            0);
  const auto csv = read_text_file(path("fbp/fbp.csv"));
  EXPECT_EQ(csv.rfind("model,features,label,repeat,avg_m,std_m,label_avg_m,label_std_m\n", 0), 0u);
  EXPECT_EQ(line_count(csv), 1u + 2u * 3u);
  EXPECT_NE(csv.find("rf,remaining_pels,cda_pdr,mean,"), std::string::npos);
  const auto model = nlohmann::json::parse(read_text_file(path("fbp/model_rf.json")));
  EXPECT_EQ(model["model"], "random_forest");
  EXPECT_EQ(model["trees"].size(), 8u);
}

TEST_F(CliTest, SweepAndRsReport) {
  ASSERT_EQ(run_cli({"sweep", "--config", small_config(), "--out", path("sweep")}), 0);
  const auto sweep = read_text_file(path("sweep/sweep.csv"));
  EXPECT_EQ(line_count(sweep), 5u);
  EXPECT_NE(sweep.find("\n6,0.01,"), std::string::npos);
  ASSERT_EQ(run_cli({"rs-report", "--config", small_config(), "--bins", "4", "--out", path("rs")}), 0);
  EXPECT_EQ(line_count(read_text_file(path("rs/rs_report.csv"))), 5u);
}

TEST_F(CliTest, ReplayReproducesOutputs) {
  ASSERT_EQ(run_cli({"locate", "--config", small_config(), "--seed", "9", "--out", path("a")}), 0);
  ASSERT_EQ(run_cli({"replay", path("a/manifest.json"), "--out", path("b")}), 0);
  EXPECT_EQ(read_text_file(path("a/summary.csv")), read_text_file(path("b/summary.csv")));
  EXPECT_EQ(read_text_file(path("a/trace_cda.csv")), read_text_file(path("b/trace_cda.csv")));
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(run_cli({}), kExitUsage);
  EXPECT_EQ(run_cli({"teleport"}), kExitUsage);
  EXPECT_EQ(run_cli({"locate"}), kExitUsage);
  EXPECT_EQ(run_cli({"locate", "--method", "ransac", "--out", path("x")}), kExitUsage);
  EXPECT_EQ(run_cli({"simulate", "--config", path("missing.json"), "--out", path("x")}), kExitUsage);
  EXPECT_EQ(run_cli({"fuse", "--covariance", "sometimes", "--out", path("x")}), kExitUsage);
  EXPECT_EQ(run_cli({"locate", "--data", path("nowhere"), "--out", path("x")}), kExitData);
  EXPECT_EQ(run_cli({"--help"}), kExitOk);
}
