#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "bridgelab/experiment.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace bridgelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("bridgelab_test_" + std::to_string(::getpid()) + "_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

std::string failing_config() {
  return R"({"name": "hard", "mode": "bridge",
    "potential": {"kind": "NegLog", "dim": 1},
    "endpoints": {"x": 1.0, "y": 3.0},
    "T_values": [1, 2, 40],
    "solver": {"method": "shooting", "max_iter": 1, "restarts": 1}})";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BRIDGELAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesFullConfig) {
  const auto cfg = parse_config(R"({
    "name": "demo", "mode": "verify",
    "potential": {"kind": "QuadraticMatrix", "matrix": [[2, 0.5], [0.5, 1]]},
    "endpoints": {"x": [1, 2], "y": [0, -1]},
    "T_values": [1, 2.5],
    "theta_values": [0.5],
    "time_fractions": [0.1, 0.9],
    "solver": {"method": "action", "grid_points": 51, "tol_boundary": 1e-8},
    "outputs": {"csv_dir": "somewhere", "json_path": "elsewhere/s.json"}})");
  EXPECT_EQ(cfg.name, "demo");
  EXPECT_EQ(cfg.mode, ExperimentMode::Verify);
  ASSERT_TRUE(cfg.potential.has_value());
  EXPECT_EQ(cfg.potential->dim, 2);
  EXPECT_EQ(cfg.potential->build().kind(), PotentialKind::QuadraticMatrix);
  EXPECT_EQ(cfg.x.size(), 2);
  EXPECT_EQ(cfg.T_values, (std::vector<double>{1, 2.5}));
  EXPECT_EQ(cfg.solver.method, SolveMethod::Action);
  EXPECT_EQ(cfg.solver.grid_points, 51);
  EXPECT_EQ(cfg.csv_dir, "somewhere");
  EXPECT_EQ(cfg.json_path, "elsewhere/s.json");
}

TEST(Config, Defaults) {
  const auto cfg = parse_config(R"({"name": "g", "mode": "gaussian",
    "endpoints": {"x": 0, "y": 3}, "T_values": [10]})");
  EXPECT_FALSE(cfg.potential.has_value());
  EXPECT_EQ(cfg.csv_dir, "out/g");
  EXPECT_EQ(cfg.json_path, (fs::path("out/g") / "summary.json").string());
  EXPECT_EQ(cfg.theta_values.size(), 9u);
  EXPECT_EQ(cfg.time_fractions, (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(cfg.solver.method, SolveMethod::Auto);
}

TEST(Config, RejectsInvalidInput) {
  const std::vector<std::string> bad = {
      "not json",
      "[]",
      R"({"mode": "bridge", "endpoints": {"x": 1, "y": 1}, "T_values": [1]})",
      R"({"name": "a", "mode": "nope", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [1]})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "NegLog"},
          "endpoints": {"x": -1, "y": 1}, "T_values": [1]})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [2, 1]})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [1], "typo": 3})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "NegLog", "dim": 2},
          "endpoints": {"x": 1, "y": 1}, "T_values": [1]})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [1], "solver": {"max_iter": 0}})",
      R"({"name": "a", "mode": "sweep", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [2, 3, 4]})",
      R"({"name": "a", "mode": "verify", "potential": {"kind": "NegLog"},
          "endpoints": {"x": 1, "y": 1}, "T_values": [1], "theta_values": [1.0]})",
      R"({"name": "a", "mode": "bridge", "potential": {"kind": "QuadraticMatrix",
          "matrix": [[1, 2], [3]]}, "endpoints": {"x": [1, 1], "y": [1, 1]}, "T_values": [1]})",
  };
  for (const auto& text : bad) EXPECT_ERROR_CODE(parse_config(text), ErrorCode::Config);
}

TEST(Config, Builtins) {
  const auto names = builtin_config_names();
  EXPECT_GE(names.size(), 10u);
  for (const auto& n : names) {
    const auto cfg = load_config("builtin:" + n);
    EXPECT_EQ(cfg.name, n);
  }
  EXPECT_ERROR_CODE(load_config("builtin:missing"), ErrorCode::Config);
  EXPECT_ERROR_CODE(load_config("/nonexistent/config.json"), ErrorCode::Io);
}

TEST(Run, BridgeModeWritesArtifacts) {
  const auto dir = scratch("bridge");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.threads = 2;
  const auto res = run_experiment(load_config("builtin:neglog-A.1"), opts);
  EXPECT_EQ(res.exit_code, 0);
  EXPECT_EQ(res.failures, 0);
  for (const char* f : {"summary.csv", "summary.json", "bridge_T2.csv", "bridge_T50.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::ifstream in(dir / "bridge_T2.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x_1,v_1,E,phi_norm");
  std::ifstream js(dir / "summary.json");
  const auto doc = nlohmann::json::parse(js);
  EXPECT_EQ(doc["cases"].size(), 4u);
  EXPECT_EQ(doc["failures"], 0);
  fs::remove_all(dir);
}

TEST(Run, SolverFailureStopsUnlessKeepGoing) {
  const auto cfg = parse_config(failing_config());
  const auto dir = scratch("fail");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.threads = 1;
  const auto strict = run_experiment(cfg, opts);
  EXPECT_EQ(strict.exit_code, 2);
  EXPECT_EQ(strict.failures, 1);

  opts.keep_going = true;
  const auto loose = run_experiment(cfg, opts);
  EXPECT_EQ(loose.exit_code, 2);
  EXPECT_GE(loose.failures, 1);
  fs::remove_all(dir);
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  const auto a = scratch("t1"), b = scratch("t3");
  RunOptions o1, o3;
  o1.threads = 1;
  o1.out_dir = a.string();
  o3.threads = 3;
  o3.out_dir = b.string();
  const auto cfg = load_config("builtin:verify-neglog");
  ASSERT_EQ(run_experiment(cfg, o1).exit_code, 0);
  ASSERT_EQ(run_experiment(cfg, o3).exit_code, 0);
  EXPECT_EQ(read_tree(a), read_tree(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, BuiltinsAreDeterministicAndClean) {
  for (const auto& name : builtin_config_names()) {
    const auto a = scratch(name + "_a"), b = scratch(name + "_b");
    RunOptions oa, ob;
    oa.out_dir = a.string();
    ob.out_dir = b.string();
    const auto cfg = load_config("builtin:" + name);
    const auto ra = run_experiment(cfg, oa);
    const auto rb = run_experiment(cfg, ob);
    EXPECT_EQ(ra.exit_code, 0) << name;
    EXPECT_EQ(ra.bound_failures, 0) << name;
    EXPECT_EQ(rb.exit_code, 0) << name;
    const auto ta = read_tree(a), tb = read_tree(b);
    EXPECT_FALSE(ta.empty()) << name;
    EXPECT_TRUE(ta == tb) << name << " outputs differ between runs";
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Run, ExitCodesFromRunConfig) {
  const auto dir = scratch("codes");
  RunOptions opts;
  opts.out_dir = (dir / "out").string();
  EXPECT_EQ(run_config((dir / "absent.json").string(), opts), 1);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"name": "x"})";
  }
  EXPECT_EQ(run_config((dir / "bad.json").string(), opts), 1);
  {
    std::ofstream hard(dir / "hard.json");
    hard << failing_config();
  }
  EXPECT_EQ(run_config((dir / "hard.json").string(), opts), 2);
  EXPECT_EQ(run_config("builtin:flow-neglog", opts), 0);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string out = " --out-dir " + (dir / "out").string();
  EXPECT_EQ(run_cli("run builtin:gaussian-A.2" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "gaussian.csv"));
  EXPECT_EQ(run_cli("run builtin:quadratic-3.1.1 --threads 0 --keep-going" + out), 0);
  EXPECT_EQ(run_cli("run " + (dir / "missing.json").string() + out), 1);
  EXPECT_EQ(run_cli("run"), 1);
  EXPECT_EQ(run_cli("run builtin:flow-neglog --threads -2"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  {
    std::ofstream hard(dir / "hard.json");
    hard << failing_config();
  }
  EXPECT_EQ(run_cli("run " + (dir / "hard.json").string() + out), 2);
  EXPECT_EQ(run_cli("list-builtins"), 0);
  EXPECT_EQ(run_cli("show-builtin verify-neglog"), 0);
  fs::remove_all(dir);
}
