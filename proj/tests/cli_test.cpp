#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "physid/io.hpp"
#include "physid/simulate.hpp"
#include "physid/urdf.hpp"

namespace physid {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("physid_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static CliRun cli(const std::string& args) {
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd = std::string(PHYSID_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text_file(err)};
  }

  static fs::path path(const std::string& name) { return root_ / name; }

  // Quick chain3 design shared by the dataset tests.
  static fs::path chain3_trajectory() {
    const fs::path dir = path("chain3_design");
    if (!fs::exists(dir / "trajectory.json")) {
      EXPECT_EQ(cli("design --fixture chain3 --outer-iterations 1 --budget 40 --restarts 0 --out " + dir.string()).code, 0);
    }
    return dir / "trajectory.json";
  }

  static inline fs::path root_;
};

TEST_F(CliTest, DesignPlanarFixtureReplaysFeasibly) {
  const fs::path out = path("design_planar2");
  const CliRun r = cli("design --fixture planar2 --seed 3 --outer-iterations 2 --budget 300 --restarts 1 --out " +
                    out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const Json traj = read_json_file(out / "trajectory.json");
  EXPECT_TRUE(traj.contains("config_hash"));
  EXPECT_EQ(traj["seed"], 3);
  EXPECT_TRUE(traj["provenance"].contains("problem_hash"));
  EXPECT_TRUE(fs::exists(out / "design_report.json"));
  EXPECT_TRUE(fs::exists(out / "trajectory.csv"));
  DesignProblem p;
  p.model = builtin_fixture("planar2").model;
  EXPECT_LE(evaluate_constraints(trajectory_from_json(traj), p).max_violation(), 1e-6);
}

TEST_F(CliTest, DesignMissingModelIsUsageError) {
  const CliRun r = cli("design --model " + path("nope.urdf").string() + " --out " + path("x").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, DesignWithCollapsedRangeWarns) {
  RobotModel m = builtin_fixture("planar2").model;
  m.links[0].joint.position_lower = m.links[0].joint.position_upper = 0.2;
  write_text_file(path("collapsed.urdf"), to_robot_description(m));
  const CliRun r = cli("design --model " + path("collapsed.urdf").string() +
                    " --outer-iterations 1 --budget 50 --out " + path("collapsed").string());
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_FALSE(read_json_file(path("collapsed") / "design_report.json")["feasible"].get<bool>());
}

TEST_F(CliTest, NoiselessChain3MetricsAreExact) {
  const fs::path data = path("chain3_clean");
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + chain3_trajectory().string() + " --trials 2 --out " +
                data.string())
                .code,
            0);
  const Json manifest = read_json_file(data / "manifest.json");
  EXPECT_TRUE(manifest.contains("config_hash"));
  EXPECT_EQ(manifest["files"].size(), 2u);
  const fs::path out = path("chain3_clean_id");
  const CliRun r = cli("identify --data " + data.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(read_text_file(out / "metrics.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "method,link,mass_pct,com_pct,inertia_pct");
  int consistent_rows = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("consistent,", 0) != 0) continue;
    ++consistent_rows;
    std::istringstream row(line);
    std::string method, link, mass;
    std::getline(row, method, ',');
    std::getline(row, link, ',');
    std::getline(row, mass, ',');
    EXPECT_LT(std::stod(mass), 1e-4) << line;
  }
  EXPECT_EQ(consistent_rows, 3);
  EXPECT_TRUE(fs::exists(out / "base_params.json"));
}

TEST_F(CliTest, RerunIsByteIdentical) {
  const fs::path data = path("chain3_noisy");
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + chain3_trajectory().string() +
                " --trials 2 --noise-rel 0.01 --seed 5 --out " + data.string())
                .code,
            0);
  ASSERT_EQ(cli("identify --data " + data.string() + " --cutoffs 10 --out " + path("rerun_a").string()).code, 0);
  ASSERT_EQ(cli("identify --data " + data.string() + " --cutoffs 10 --out " + path("rerun_b").string()).code, 0);
  for (const char* f : {"result.json", "metrics.csv", "base_params.json"}) {
    EXPECT_EQ(read_text_file(path("rerun_a") / f), read_text_file(path("rerun_b") / f)) << f;
  }
}

TEST_F(CliTest, PayloadModeNeedsBaseParameters) {
  const fs::path data = path("chain3_clean");
  if (!fs::exists(data)) {
    ASSERT_EQ(cli("simulate --fixture chain3 --traj " + chain3_trajectory().string() + " --out " + data.string()).code, 0);
  }
  EXPECT_EQ(cli("identify --mode payload --data " + data.string() + " --out " + path("p").string()).code, 1);
}

TEST_F(CliTest, PayloadModeRecoversAttachedObject) {
  const LinkInertialParams object = LinkInertialParams::from_com_frame(
      0.5, Eigen::Vector3d(0.1, 0.0, 0.0), 5e-4 * Eigen::Matrix3d::Identity());
  write_json_file(path("object.json"), to_json(object));
  const fs::path base = path("unloaded"), loaded = path("loaded");
  const std::string traj = chain3_trajectory().string();
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + traj + " --out " + base.string()).code, 0);
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + traj + " --payload-json " + path("object.json").string() +
                " --out " + loaded.string())
                .code,
            0);
  ASSERT_EQ(cli("identify --data " + base.string() + " --cutoffs none --out " + path("base_id").string()).code, 0);
  const CliRun r = cli("identify --mode payload --data " + loaded.string() + " --cutoffs none --base-params " +
                    (path("base_id") / "base_params.json").string() + " --out " + path("payload_id").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const Json result = read_json_file(path("payload_id") / "result.json");
  EXPECT_TRUE(result.contains("config_hash"));
  EXPECT_EQ(result["cutoffs"]["source"], "given");
  EXPECT_NEAR(link_params_from_json(result["payload"]["object"]).mass, 0.5, 1e-4);
  EXPECT_TRUE(fs::exists(path("payload_id") / "metrics.csv"));
}

TEST_F(CliTest, CorruptCsvNamesTheRow) {
  const fs::path data = path("corrupt");
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + chain3_trajectory().string() + " --out " + data.string()).code, 0);
  std::string text = read_text_file(data / "trial_000.csv");
  std::size_t pos = 0;
  for (int k = 0; k < 4; ++k) pos = text.find('\n', pos) + 1;
  text.insert(pos, "garbage,");
  write_text_file(data / "trial_000.csv", text);
  const CliRun r = cli("identify --data " + data.string() + " --out " + path("corrupt_id").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
}

TEST_F(CliTest, TuneFiltersAndReport) {
  const fs::path data = path("tune");
  ASSERT_EQ(cli("simulate --fixture chain3 --traj " + chain3_trajectory().string() +
                " --noise-rel 0.01 --out " + data.string())
                .code,
            0);
  ASSERT_EQ(cli("tune-filters --data " + data.string() + " --grid 0,5,10 --out " + path("tune.csv").string()).code, 0);
  std::istringstream csv(read_text_file(path("tune.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "position_hz,torque_hz,ok,residual");
  int rows = 0;
  while (std::getline(csv, line) && line.rfind("best", 0) != 0) ++rows;
  EXPECT_EQ(rows, 9);

  ASSERT_EQ(cli("identify --data " + data.string() + " --cutoffs 10 --out " + path("r1").string()).code, 0);
  EXPECT_EQ(read_json_file(path("r1") / "base_params.json")["sets"][0]["cutoffs"]["position_hz"], 10.0);
  ASSERT_EQ(cli("identify --mode payload --data " + data.string() + " --base-params " +
                (path("r1") / "base_params.json").string() + " --out " + path("reuse").string())
                .code,
            0);
  EXPECT_EQ(read_json_file(path("reuse") / "result.json")["cutoffs"]["source"], "base_params");
  ASSERT_EQ(cli("identify --data " + data.string() + " --cutoffs 8 --out " + path("r2").string()).code, 0);
  ASSERT_EQ(cli("report --runs " + path("r1").string() + " " + path("r2").string() + " --out " +
                path("report.csv").string())
                .code,
            0);
  const std::string report = read_text_file(path("report.csv"));
  EXPECT_EQ(report.rfind("method,link,runs,mass_pct_mean", 0), 0u) << report;
  EXPECT_NE(report.find("consistent,0,2,"), std::string::npos) << report;
}

TEST_F(CliTest, UsageErrorsAndHelp) {
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("export-fixture --name arm7 --out " + path("arm7.urdf").string()).code, 0);
  EXPECT_EQ(parse_robot_description(read_text_file(path("arm7.urdf"))).dof(), 7);
}

}  // namespace
}  // namespace physid
