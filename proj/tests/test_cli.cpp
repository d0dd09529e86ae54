#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "odmts/odmts.hpp"

using namespace odmts;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ODMTS_CLI;
const std::string kTiny = std::string(ODMTS_DATA_DIR) + "/tiny.json";

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("odmts_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

nlohmann::json load_json(const std::string& p) { return nlohmann::json::parse(read_text_file(p)); }

}  // namespace

TEST_F(CliTest, PipelineWritesEveryArtifact) {
  const std::string out = path("run");
  ASSERT_EQ(run("pipeline --instance " + kTiny + " --out " + out + " --check-oracle"), 0);
  for (const char* f : {"routes.jsonl", "design.json", "fleet.json", "report.json", "report.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  }
  const Report rep = report_from_json(load_json(out + "/report.json"));
  const auto design = load_json(out + "/design.json");
  EXPECT_NEAR(rep.total_cost, design.at("objective").get<double>(), 1e-6);
  EXPECT_NEAR(rep.breakdown.total(), rep.total_cost, 1e-6);
  EXPECT_EQ(*rep.fleet_size, load_json(out + "/fleet.json").at("fleet_size").get<int>());
}

TEST_F(CliTest, PipelineIsDeterministic) {
  ASSERT_EQ(run("pipeline --instance " + kTiny + " --out " + path("a")), 0);
  ASSERT_EQ(run("pipeline --instance " + kTiny + " --out " + path("b") + " --threads 3"), 0);
  for (const char* f : {"routes.jsonl", "design.json", "fleet.json", "report.csv"}) {
    EXPECT_EQ(read_text_file(path("a") + "/" + f), read_text_file(path("b") + "/" + f)) << f;
  }
}

TEST_F(CliTest, InvalidInstanceStopsBeforeOutput) {
  auto doc = load_json(kTiny);
  doc["time"][0][1] = -1.0;
  write_text_file(path("bad.json"), doc.dump());
  EXPECT_EQ(run("validate --instance " + path("bad.json")), 1);
  EXPECT_EQ(run("pipeline --instance " + path("bad.json") + " --out " + path("run")), 1);
  EXPECT_FALSE(fs::exists(path("run")));
  EXPECT_EQ(run("validate --instance " + kTiny), 0);
  EXPECT_NE(run("pipeline --instance " + path("missing.json") + " --out " + path("run")), 0);
}

TEST_F(CliTest, ConfigFileAndFlagOverride) {
  write_text_file(path("cfg.ini"), "# run settings\ncapacity = 1\nformulation = \"dense\"\n");
  ASSERT_EQ(run("pipeline --instance " + kTiny + " --out " + path("c1") + " --config " + path("cfg.ini")), 0);
  EXPECT_EQ(load_json(path("c1") + "/report.json").at("K"), 1);
  EXPECT_EQ(load_json(path("c1") + "/fleet.json").at("formulation"), "dense");
  ASSERT_EQ(run("pipeline --instance " + kTiny + " --out " + path("c2") + " --config " +
                path("cfg.ini") + " --capacity 2"),
            0);
  EXPECT_EQ(load_json(path("c2") + "/report.json").at("K"), 2);
}

TEST_F(CliTest, StagesChainThroughFiles) {
  ASSERT_EQ(run("gen --seed 3 --nodes 12 --hubs 3 --commodities 10 --t-max 15 --bus-trips 1 --out " +
                path("inst.json")),
            0);
  ASSERT_EQ(run("validate --instance " + path("inst.json")), 0);
  ASSERT_EQ(run("enumerate-routes --instance " + path("inst.json") + " --out " + path("routes.jsonl")), 0);
  for (int k : {1, 3}) {
    const std::string design = path("design" + std::to_string(k) + ".json");
    ASSERT_EQ(run("design --instance " + path("inst.json") + " --capacity " + std::to_string(k) +
                  " --out " + design),
              0);
    EXPECT_EQ(load_json(design).at("K"), k);
  }
  ASSERT_EQ(run("design --instance " + path("inst.json") + " --routes " + path("routes.jsonl") +
                " --out " + path("from_routes.json")),
            0);
  EXPECT_NEAR(load_json(path("from_routes.json")).at("objective").get<double>(),
              load_json(path("design3.json")).at("objective").get<double>(), 1e-9);
  ASSERT_EQ(run("fleet-size --instance " + path("inst.json") + " --design " + path("design3.json") +
                " --formulation dense --check-oracle --out " + path("fleet.json")),
            0);
  ASSERT_EQ(run("report --instance " + path("inst.json") + " --design " + path("design1.json") +
                " --design " + path("design3.json") + " --out " + path("report.csv")),
            0);
  std::istringstream csv(read_text_file(path("report.csv")));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].substr(0, 2), "1,");
  EXPECT_EQ(rows[2].substr(0, 2), "3,");
}

TEST_F(CliTest, ModelExportRoundTrips) {
  ASSERT_EQ(run("design --instance " + kTiny + " --export-model " + path("design.mps") + " --out " +
                path("d.json")),
            0);
  ASSERT_EQ(run("design --instance " + kTiny + " --export-model " + path("design.lp") + " --out " +
                path("d.json")),
            0);
  EXPECT_NE(read_text_file(path("design.lp")).find("Subject To"), std::string::npos);
  const milp::MilpModel m = milp::read_mps(read_text_file(path("design.mps")));
  const milp::MilpSolution s = milp::solve_milp(m);
  EXPECT_NEAR(s.objective, load_json(path("d.json")).at("objective").get<double>(), 1e-6);
  ASSERT_EQ(run("fleet-size --instance " + kTiny + " --design " + path("d.json") + " --export-model " +
                path("fleet.mps") + " --out " + path("f.json")),
            0);
  EXPECT_NEAR(milp::solve_lp(milp::read_mps(read_text_file(path("fleet.mps")))).objective,
              load_json(path("f.json")).at("fleet_size").get<double>(), 1e-6);
}

TEST_F(CliTest, RejectsBadArguments) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("pipeline"), 0);
  EXPECT_NE(run("pipeline --instance " + kTiny + " --formulation tree"), 0);
  EXPECT_NE(run("pipeline --instance " + kTiny + " --capacity 0"), 0);
}

TEST(RunPipeline, LibraryMatchesStages) {
  PipelineConfig cfg;
  cfg.instance_path = kTiny;
  cfg.out_dir = (fs::temp_directory_path() / "odmts_pipeline_lib").string();
  cfg.check_oracle = true;
  const PipelineResult res = run_pipeline(cfg);
  EXPECT_TRUE(design_violations(res.design, res.instance).empty());
  EXPECT_TRUE(schedule_violations(res.fleet, res.tasks, res.instance).empty());
  EXPECT_EQ(res.report, make_report(res.design, &res.fleet, res.instance));

  cfg.perturb_scale = 1.0;
  cfg.seed = 4;
  const PipelineResult noisy = run_pipeline(cfg);
  EXPECT_TRUE(design_violations(noisy.design, noisy.instance).empty());
  fs::remove_all(cfg.out_dir);

  cfg.instance_path = "/nonexistent/instance.json";
  try {
    run_pipeline(cfg);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "load");
  }
}
