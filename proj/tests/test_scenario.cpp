#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikes/scenario.hpp"

using namespace spikes;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "spikes_scenario_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kSmallSde = R"(# small classical run
[model]
kind = classical-sde
lambda_tilde = 1
gamma = 1e3
Q0 = 0
R0 = 0

[grid]
dt = 1e-5
T = 2

[ensemble]
n_trajectories = 4
master_seed = 90210

[analysis]
tests = shape, max_law, prefactor

[output]
formats = csv, json
stride = 1000
)";

}  // namespace

TEST_CASE("parse a full config") {
  const auto path = write_config("full.cfg", kSmallSde);
  const Scenario s = parse_scenario(path.string());
  CHECK(s.name == "full");
  CHECK(s.kind == ScenarioKind::classical_sde);
  CHECK(s.sde.lambda_tilde == 1.0);
  CHECK(s.sde.gamma == 1e3);
  CHECK(s.sde.dt == 1e-5);
  CHECK(s.sde.T == 2.0);
  CHECK(s.n_trajectories == 4);
  CHECK(s.master_seed == 90210);
  CHECK(s.tests == std::vector<std::string>{"shape", "max_law", "prefactor"});
  CHECK(s.csv_output);
  CHECK(s.json_output);
  CHECK(s.stride == 1000);
  CHECK(s.projected_steps() == doctest::Approx(8e5));
}

TEST_CASE("missing file and malformed input") {
  CHECK_THROWS_AS(parse_scenario("/nonexistent/nope.cfg"), ScenarioError);
  try {
    parse_scenario("/nonexistent/nope.cfg");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);
  }

  const auto bad = write_config("bad.cfg", "[model]\nthis line has no equals\n");
  try {
    parse_scenario(bad.string());
    FAIL("expected a parse error");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unknown keys and sections are named in the error") {
  const auto p1 = write_config("unk1.cfg", "[model]\nbogus_key = 3\n");
  try {
    parse_scenario(p1.string());
    FAIL("expected a config error");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }

  const auto p2 = write_config("unk2.cfg", "[mdoel]\nkind = qubit\n");
  try {
    parse_scenario(p2.string());
    FAIL("expected a config error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("mdoel") != std::string::npos);
  }

  const auto p3 = write_config("unk3.cfg", "kind = qubit\n");
  CHECK_THROWS_AS(parse_scenario(p3.string()), ScenarioError);

  const auto p4 = write_config("unk4.cfg", "[model]\nkind = 17\n");
  CHECK_THROWS_AS(parse_scenario(p4.string()), ScenarioError);
}

TEST_CASE("budget guard trips with exit code 3") {
  Scenario s;
  s.kind = ScenarioKind::classical_sde;
  s.sde.dt = 1e-9;
  s.sde.T = 10.0;
  s.n_trajectories = 1000;
  s.out_dir = (fs::temp_directory_path() / "spikes_scenario_tests" / "budget").string();
  try {
    run_scenario(s, 1);
    FAIL("expected the resource guard");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 3);
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("invalid scenario parameters exit with code 2") {
  Scenario s;
  s.kind = ScenarioKind::classical_sde;
  s.sde.dt = -1.0;
  try {
    run_scenario(s, 1);
    FAIL("expected a validation error");
  } catch (const ScenarioError& e) {
    CHECK(e.exit_code == 2);
  }
}

TEST_CASE("run_scenario writes outputs and a complete report") {
  const auto path = write_config("run.cfg", kSmallSde);
  Scenario s = parse_scenario(path.string());
  const fs::path out = fs::temp_directory_path() / "spikes_scenario_tests" / "run_out";
  fs::remove_all(out);
  s.out_dir = out.string();
  const nlohmann::json report = run_scenario(s, 1);

  CHECK(fs::exists(out / "events.csv"));
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "report.json"));
  CHECK(slurp(out / "events.csv").rfind("trajectory,plateau,", 0) == 0);
  CHECK(slurp(out / "trajectory.csv").rfind("time,", 0) == 0);

  CHECK(report["name"] == "run");
  CHECK(report["version"] == kVersion);
  CHECK(report["master_seed"] == 90210);
  CHECK(report["n_trajectories"] == 4);
  CHECK(report["config"].contains("model.kind"));
  CHECK(report["totals"].contains("plateau_time_0"));
  CHECK(report["tests"].contains("shape"));
  CHECK(report["tests"].contains("max_law"));
  CHECK(report["tests"]["prefactor"].contains("fitted"));
  CHECK(report["wall_clock_s"].get<double>() >= 0.0);

  // Loading the written report back round-trips.
  const auto loaded = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(loaded["name"] == report["name"]);
}

TEST_CASE("worker count does not change the results") {
  const auto path = write_config("det.cfg", kSmallSde);
  Scenario s = parse_scenario(path.string());
  const fs::path base = fs::temp_directory_path() / "spikes_scenario_tests";
  s.out_dir = (base / "w1").string();
  const nlohmann::json r1 = run_scenario(s, 1);
  s.out_dir = (base / "w4").string();
  const nlohmann::json r4 = run_scenario(s, 4);

  CHECK(slurp(base / "w1" / "events.csv") == slurp(base / "w4" / "events.csv"));
  CHECK(slurp(base / "w1" / "trajectory.csv") == slurp(base / "w4" / "trajectory.csv"));
  CHECK(r1["totals"] == r4["totals"]);
  CHECK(r1["tests"]["max_law"] == r4["tests"]["max_law"]);
}

TEST_CASE("discrete scenario with the smoother comparison") {
  const auto path = write_config("toy.cfg", R"(
[model]
kind = discrete-toy
epsilon = 0.3
lambda = 5e-4

[grid]
n_steps = 200000

[ensemble]
n_trajectories = 1
master_seed = 7

[analysis]
tests = spikeless
level = 0.5

[output]
formats = json
)");
  Scenario s = parse_scenario(path.string());
  s.out_dir = (fs::temp_directory_path() / "spikes_scenario_tests" / "toy_out").string();
  const nlohmann::json report = run_scenario(s, 1);
  const auto& sp = report["tests"]["spikeless"];
  CHECK(sp["filtered_excursions"].get<std::size_t>() > 0);
  CHECK(sp["ratio"].get<double>() < 1.0);
}

TEST_CASE("wrong-prediction-only scenario skips the main ensemble") {
  Scenario s;
  s.kind = ScenarioKind::classical_sde;
  s.sde.lambda_tilde = 1.0;
  s.sde.gamma = 400.0;
  s.sde.dt = 1e-4;
  s.sde.T = 0.5;
  s.sde.Q0 = 0.0;
  s.n_trajectories = 20;
  s.master_seed = 99;
  s.tests = {"wrong_prediction"};
  s.t1 = 0.1;
  s.gap = 0.3;
  s.out_dir = (fs::temp_directory_path() / "spikes_scenario_tests" / "wp_out").string();
  const nlohmann::json report = run_scenario(s, 1);
  CHECK_FALSE(report.contains("totals"));
  const auto& wp = report["tests"]["wrong_prediction"];
  CHECK(wp["n"] == 20);
  CHECK(wp["gap"] == 0.3);
  CHECK(wp["ci_hi"].get<double>() <= 1.0);
}
