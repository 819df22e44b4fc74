#include "../tools/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace markov_up {
namespace {

namespace fs = std::filesystem;

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "test.cfg");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
    return e.what();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return {};
}

TEST(Config, DefaultsWhenEmpty) {
  const ExperimentConfig cfg = parse_config_text("# nothing\n\n");
  EXPECT_DOUBLE_EQ(cfg.model.kappa.a, 0.5);
  EXPECT_DOUBLE_EQ(cfg.model.kappa.r, 0.5);
  EXPECT_DOUBLE_EQ(cfg.model.s, 0.5);
  EXPECT_EQ(cfg.model.floor_N, 5U);
  EXPECT_EQ(cfg.x_grid, (std::vector<State>{6, 10, 20}));
  EXPECT_EQ(cfg.m_list, (std::vector<unsigned>{1, 2, 3}));
  EXPECT_EQ(cfg.n_traj, 100'000U);
  EXPECT_EQ(cfg.max_steps, 1'000'000U);
}

TEST(Config, ParsesValuesAndComments) {
  const ExperimentConfig cfg = parse_config_text("a = 0.25  # gap\nx_grid = 7, 9\nseed=3\noutput_dir = runs/x\n");
  EXPECT_DOUBLE_EQ(cfg.model.kappa.a, 0.25);
  EXPECT_EQ(cfg.x_grid, (std::vector<State>{7, 9}));
  EXPECT_EQ(cfg.seed, 3U);
  EXPECT_EQ(cfg.output_dir, "runs/x");
}

TEST(Config, ErrorsNameLineAndField) {
  const std::string bad_r = config_error("a = 0.5\nr = 1.0\n");
  EXPECT_NE(bad_r.find("test.cfg:2:"), std::string::npos) << bad_r;
  EXPECT_NE(bad_r.find("'r'"), std::string::npos) << bad_r;

  const std::string unknown = config_error("\nalpha = 3\n");
  EXPECT_NE(unknown.find("test.cfg:2:"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("alpha"), std::string::npos) << unknown;

  const std::string not_number = config_error("n_traj = lots\n");
  EXPECT_NE(not_number.find("'n_traj'"), std::string::npos) << not_number;

  EXPECT_NE(config_error("s = 0\n").find("'s'"), std::string::npos);
  EXPECT_NE(config_error("m_list = 1, 0\n").find("m_list"), std::string::npos);
  EXPECT_NE(config_error("x_grid = 6,,7\n").find("x_grid"), std::string::npos);
  EXPECT_NE(config_error("seed = 1\nseed = 2\n").find("test.cfg:2:"), std::string::npos);
  EXPECT_NE(config_error("just text\n").find("test.cfg:1:"), std::string::npos);
}

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("markov_up_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& body) {
    const fs::path path = dir_ / "run.cfg";
    std::ofstream(path) << body << "output_dir = " << (dir_ / "out").string() << '\n';
    return path.string();
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / "out" / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

constexpr const char* kSmall = "x_grid = 6, 8\nm_list = 1, 2\nn_traj = 2000\ndump_trajectories = 25\n";

TEST_F(CommandTest, VerifyWritesReportAndCsvs) {
  cli::CommandOptions opts;
  opts.config_path = write_config(kSmall);
  opts.threads = 2;
  std::ostringstream out, err;
  const int code = cli::verify_command(opts, out, err);
  EXPECT_EQ(code, cli::kExitOk) << err.str();

  const Json report = Json::parse(read("report.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : report.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"config", "certificate", "bound_sets", "estimates", "verdicts", "timing",
                                            "warnings", "summary"}));
  EXPECT_FALSE(report["timing"].contains("wall_seconds"));
  EXPECT_EQ(report["timing"]["paths_simulated"], 4000);
  EXPECT_TRUE(report["summary"]["all_pass"].get<bool>());
  EXPECT_TRUE(report["warnings"].empty());
  EXPECT_NE(read("verdicts.csv").find("theorem,6,1,"), std::string::npos);
}

TEST_F(CommandTest, WallTimeOnlyWhenRequested) {
  cli::CommandOptions opts;
  opts.config_path = write_config("x_grid = 6\nm_list = 1\nn_traj = 200\n");
  opts.wall_time = true;
  std::ostringstream out, err;
  ASSERT_EQ(cli::verify_command(opts, out, err), cli::kExitOk) << err.str();
  EXPECT_TRUE(Json::parse(read("report.json"))["timing"].contains("wall_seconds"));
}

TEST_F(CommandTest, LowSampleWarning) {
  cli::CommandOptions opts;
  opts.config_path = write_config("x_grid = 6\nm_list = 1\nn_traj = 10\n");
  std::ostringstream out, err;
  cli::verify_command(opts, out, err);
  const Json report = Json::parse(read("report.json"));
  ASSERT_EQ(report["warnings"].size(), 1U);
  EXPECT_NE(report["warnings"][0].get<std::string>().find("low-sample"), std::string::npos);
  EXPECT_NE(err.str().find("low-sample"), std::string::npos);
}

TEST_F(CommandTest, ReportSchemaIsStableAcrossConfigs) {
  auto shape = [this](const std::string& body) {
    cli::CommandOptions opts;
    opts.config_path = write_config(body);
    std::ostringstream out, err;
    cli::verify_command(opts, out, err);
    const Json report = Json::parse(read("report.json"));
    std::map<std::string, std::vector<std::string>> keys;
    for (const auto& [k, v] : report.items()) {
      if (v.is_object()) {
        for (const auto& [kk, vv] : v.items()) keys[k].push_back(kk);
      } else {
        keys[k];
      }
    }
    for (const auto& [k, v] : report["verdicts"][0].items()) keys["verdict"].push_back(k);
    for (const auto& [k, v] : report["estimates"][0].items()) keys["estimate"].push_back(k);
    return keys;
  };
  EXPECT_EQ(shape("x_grid = 6\nm_list = 1\nn_traj = 300\n"),
            shape("a = 0.3\nr = 0.8\ns = 0.4\nx_grid = 9, 12\nm_list = 2\nn_traj = 500\n"));
}

TEST_F(CommandTest, TrajectoryDumpReproducesPathsCsv) {
  cli::CommandOptions opts;
  opts.config_path = write_config(kSmall);
  std::ostringstream out, err;
  ASSERT_EQ(cli::simulate_command(opts, out, err), cli::kExitOk) << err.str();

  std::ifstream traj_in(dir_ / "out" / "trajectories.csv");
  std::ifstream paths_in(dir_ / "out" / "paths.csv");
  const auto dumped = read_trajectories_csv(traj_in);
  const auto rows = read_paths_csv(paths_in);
  ASSERT_EQ(dumped.size(), 50U);
  ASSERT_EQ(rows.size(), 4000U);
  std::map<std::string, const PathRow*> by_id;
  for (const auto& r : rows) by_id[r.path_id] = &r;
  for (const auto& d : dumped) {
    const PathRow& row = *by_id.at(d.path_id);
    ASSERT_TRUE(row.tau.has_value());
    EXPECT_EQ(tau_of(d.states, 5), row.tau) << d.path_id;
    EXPECT_EQ(decompose_attempts(d.states, 5).attempts.size(), row.attempts) << d.path_id;
    EXPECT_EQ(*std::max_element(d.states.begin(), d.states.end()), row.max_state) << d.path_id;
  }
}

TEST_F(CommandTest, ReportCommandReadsBackVerdicts) {
  cli::CommandOptions opts;
  opts.config_path = write_config("x_grid = 6\nm_list = 1\nn_traj = 500\n");
  std::ostringstream out, err;
  ASSERT_EQ(cli::verify_command(opts, out, err), cli::kExitOk) << err.str();
  std::ostringstream table, table_err;
  EXPECT_EQ(cli::report_command((dir_ / "out" / "report.json").string(), table, table_err), cli::kExitOk);
  EXPECT_NE(table.str().find("theorem"), std::string::npos);
  EXPECT_NE(table.str().find("attempt_tail"), std::string::npos);
}

TEST_F(CommandTest, BadConfigExitsWithUsageCode) {
  cli::CommandOptions opts;
  opts.config_path = write_config("r = 1.5\n");
  std::ostringstream out, err;
  EXPECT_EQ(cli::verify_command(opts, out, err), cli::kExitUsage);
  EXPECT_NE(err.str().find("'r'"), std::string::npos);
  opts.config_path = (dir_ / "missing.cfg").string();
  EXPECT_EQ(cli::certify_command(opts, out, err), cli::kExitUsage);
}

TEST_F(CommandTest, SeedOverrideChangesSamples) {
  cli::CommandOptions opts;
  opts.config_path = write_config("x_grid = 10\nm_list = 1\nn_traj = 300\n");
  std::ostringstream out_a, out_b, err;
  cli::simulate_command(opts, out_a, err);
  const std::string first = read("paths.csv");
  opts.seed = 99;
  cli::simulate_command(opts, out_b, err);
  EXPECT_NE(read("paths.csv"), first);
}

}  // namespace
}  // namespace markov_up
