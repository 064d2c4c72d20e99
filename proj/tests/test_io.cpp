#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ringmodel/io.hpp"

using namespace ringmodel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ringlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int ringlab(const std::string& args) {
  const std::string cmd = std::string(RINGLAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_table(const fs::path& p, const std::vector<std::string>& cols = {}) {
  std::ifstream in(p);
  REQUIRE(in);
  return read_csv_strict(in, cols);
}

}  // namespace

TEST_CASE("strict csv") {
  std::istringstream ok("a,b\n1,2\n3,4.5\n");
  const CsvTable t = read_csv_strict(ok, {"a", "b"});
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][1] == 4.5);

  std::istringstream header("a,c\n1,2\n");
  CHECK_THROWS_AS(read_csv_strict(header, {"a", "b"}), ConfigError);
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv_strict(ragged), ConfigError);
  std::istringstream nan("a,b\n1,nan\n");
  CHECK_THROWS_AS(read_csv_strict(nan), ConfigError);
  std::istringstream word("a,b\n1,x\n");
  CHECK_THROWS_AS(read_csv_strict(word), ConfigError);
}

TEST_CASE("trajectory csv round trip") {
  ModelSpec s;
  s.n_modes = 2;
  s.j_weights = {9.0, -6.66};
  Trajectory tr;
  tr.times = {0.0, 0.5};
  tr.states = {CortexState(0.1, {Complex(0.2, -0.3), Complex(0.0, 1e-17)}),
               CortexState(-0.25, {Complex(1.0 / 3.0, 0.0), Complex(-2.5, 0.125)})};
  tr.stimulus_log = {DriveFrame::none(2), DriveFrame::none(2)};
  std::stringstream ss;
  ss.precision(17);
  write_trajectory_csv(ss, tr);
  const CsvTable t = read_csv_strict(ss, {"t", "v0", "re_z1", "im_z1", "re_z2", "im_z2", "peak_angle"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][2] == 1.0 / 3.0);
  CHECK(t.rows[0][5] == 1e-17);
  CHECK(t.rows[1][6] == peak_angle(tr.states[1]));
}

TEST_CASE("config parsing") {
  const RunConfig d = RunConfig::defaults();
  CHECK(RunConfig::from_json(d.to_json()).to_json() == d.to_json());
  CHECK(RunConfig::from_json(json::object()).to_json() == d.to_json());

  json j = d.to_json();
  j["model"]["gain"] = 12.5;
  j["model"]["j_weights"] = {2.0};
  j["stimulus"]["epsilon"] = 0.02;
  const RunConfig c = RunConfig::from_json(j);
  CHECK(c.model.gain == 12.5);
  CHECK(c.model.j_weights == std::vector<double>{2.0});
  CHECK(c.stimulus.epsilon == 0.02);
  CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());

  CHECK_THROWS_AS(RunConfig::from_json(json{{"modle", json::object()}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"model", {{"gian", 3.0}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"model", {{"gain", "high"}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"stimulus", {{"beta", 2.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"model", {{"n_modes", 2}}}}), std::invalid_argument);
  CHECK_THROWS_AS(model_from_json(json{{"quadrature_order", 8}}), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(json{{"kind", "spin"}}, Scenario::rotate_default()),
                  std::invalid_argument);
}

TEST_CASE("scenario and report serialization") {
  const Scenario m = Scenario::mixture_default();
  const Scenario back = scenario_from_json(to_json(m), Scenario::rotate_default());
  CHECK(to_json(back) == to_json(m));
  CHECK(back.kind == ScenarioKind::mixture);
  CHECK(back.ramp_duration == m.ramp_duration);
}

TEST_CASE("invariants round trip") {
  ModelSpec s;
  s.n_modes = 2;
  s.j_weights = {9.0, -6.66};
  const OrbitInvariants inv = reduce_invariants(std::vector<double>{0.5, 0.25, 0.0, -0.02}, s);
  const OrbitInvariants back = invariants_from_json(to_json(inv));
  CHECK(to_json(back) == to_json(inv));
  const OrbitPoint pt{0.1, 0.04, 0.02, 0.003};
  const InvariantValues a = inv.evaluate(1.3, pt), b = back.evaluate(1.3, pt);
  CHECK(a.b0 == b.b0);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.c == b.c);
  CHECK(a.d == b.d);
}

TEST_CASE("manifest round trip") {
  Manifest m;
  m.command = "simulate";
  m.options = {{"t_end", 5.0}};
  m.config = RunConfig::defaults().to_json();
  m.outputs = {"trajectory.csv"};
  m.diagnostics = {{"wall_seconds", 0.1}};
  const fs::path dir = scratch("manifest");
  write_json(dir / "m.json", m.to_json());
  const Manifest back = Manifest::from_json(read_json(dir / "m.json"));
  CHECK(back.to_json() == m.to_json());
  CHECK_THROWS_AS(Manifest::from_json(json{{"command", "x"}, {"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(Manifest::from_json(json::object()), ConfigError);
  CHECK_THROWS_AS(read_json(dir / "missing.json"), ConfigError);
}

TEST_CASE("command line: simulate from a tuned equilibrium stays put") {
  const fs::path out = scratch("simulate");
  REQUIRE(ringlab("--gain 15 --epsilon 0.01 --out " + out.string() + " simulate --init tc0 --t-end 50") == 0);
  const CsvTable t = read_table(out / "trajectory.csv", {"t", "v0", "re_z1", "im_z1", "peak_angle"});
  REQUIRE(t.rows.size() > 10);
  CHECK(t.rows.back()[0] == 50.0);
  for (const auto& r : t.rows) {
    CHECK(std::abs(r[1] - t.rows[0][1]) < 1e-10);
    CHECK(std::abs(r[2] - t.rows[0][2]) < 1e-10);
    CHECK(r[2] > 0.1);
  }
  CHECK(fs::exists(out / "trajectory.py"));
  const json man = read_json(out / "manifest.json");
  CHECK(man["status"] == "ok");
  CHECK(man["command"] == "simulate");

  // rerunning the manifest reproduces the output byte for byte
  const fs::path again = scratch("rerun");
  REQUIRE(ringlab("--out " + again.string() + " rerun " + (out / "manifest.json").string()) == 0);
  CHECK(slurp(again / "trajectory.csv") == slurp(out / "trajectory.csv"));
}

TEST_CASE("command line: threshold map") {
  const fs::path out = scratch("threshold");
  REQUIRE(ringlab("--out " + out.string() + " threshold-map --eps0 -1") == 0);
  const CsvTable t = read_table(out / "boundary.csv", {"theta", "j1_min", "eps0"});
  REQUIRE(!t.rows.empty());
  for (const auto& r : t.rows) {
    CHECK(r[2] == -1.0);
    CHECK(std::abs(r[1] - (10 * r[0] + 1)) <= 0.15 * (10 * r[0] + 1));
  }
}

TEST_CASE("command line: bad input exits with status 2") {
  const fs::path dir = scratch("bad");
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"model": {"gain": 15, "colour": "blue"}})";
  }
  CHECK(ringlab("--config " + (dir / "bad.json").string() + " --out " + dir.string() + " simulate") == 2);
  CHECK(ringlab("--config " + (dir / "nope.json").string() + " --out " + dir.string() + " simulate") == 2);
  CHECK(ringlab("--gain -1 --out " + dir.string() + " simulate") == 2);
  CHECK(ringlab("--out " + dir.string() + " frobnicate") == 2);
  CHECK(ringlab("--out " + dir.string() + " simulate --init sideways") == 2);
  // a validation failure inside a command still leaves a manifest
  const json man = read_json(dir / "manifest.json");
  CHECK(man["status"] == "validation_error");
}
