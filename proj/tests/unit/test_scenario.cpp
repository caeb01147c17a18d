#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lanekin/scenario.hpp"

using namespace lanekin;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lanekin_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("unknown keys are reported with their path") {
  CHECK(config_error_path(R"({"model": {"foo": 1}})") == "model.foo");
  CHECK(config_error_path(R"({"bogus": true})") == "bogus");
  CHECK(config_error_path(R"({"numerics": {"dt": 0.1, "cfll": 0.5}})") == "numerics.cfll");
  CHECK(config_error_path(R"({"model": {"external_action": {"target": [], "xbegin": 0}}})") ==
        "model.external_action.xbegin");
}

TEST_CASE("type errors are reported with their path") {
  CHECK(config_error_path(R"({"model": {"lanes": 2.5}})") == "model.lanes");
  CHECK(config_error_path(R"({"numerics": {"dt": "fast"}})") == "numerics.dt");
  CHECK(config_error_path(R"({"seed": -3})") == "seed");
  CHECK(config_error_path(R"({"initial": {"splits": ["sideways"]}})") == "initial.splits[0]");
  CHECK(config_error_path("{not json") == "<root>");
}

TEST_CASE("parsing overlays the base configuration") {
  const auto c = parse_config(R"({
    "mode": "diagram",
    "model": {"alpha": [0.3, 0.9], "lanes": 2, "table_policy": "strict"},
    "numerics": {"dt": 0.25, "dt_max": null, "time_unit": "interaction"},
    "initial": {"rho": {"from": 0.1, "to": 0.5, "count": 5}, "splits": ["slowest", [0.1, 0.2]]}
  })");
  CHECK(c.mode == "diagram");
  CHECK(c.alphas == std::vector<double>{0.3, 0.9});
  CHECK(c.lanes == 2);
  CHECK(c.strict_table);
  CHECK(c.dt == 0.25);
  CHECK(std::isinf(c.dt_max));
  REQUIRE(c.rho_values.size() == 5);
  CHECK(c.rho_values[2] == doctest::Approx(0.3));
  REQUIRE(c.splits.size() == 2);
  CHECK(c.splits[0].policy == InitPolicy::kSlowestFirst);
  CHECK(c.splits[1].policy == InitPolicy::kCustom);
  CHECK(c.classes == 6);
  CHECK(c.cells == 200);
}

TEST_CASE("presets") {
  const auto names = preset_names();
  CHECK(names.size() == 3);
  const auto d = preset("paper-diagram");
  CHECK(d.mode == "diagram");
  CHECK(d.alphas == std::vector<double>{0.95, 0.6, 0.3});
  CHECK(d.rho_values.size() == 50);
  const auto r = preset("paper-relax");
  CHECK(r.mode == "relax");
  CHECK(r.splits.size() == 3);
  const auto k = preset("paper-clusters");
  CHECK(k.lanes == 2);
  CHECK(k.t_end == doctest::Approx(1.61));
  for (const auto& n : names) CHECK_NOTHROW(validate(preset(n)));
  CHECK_THROWS_AS(preset("paper-nothing"), ConfigError);
}

TEST_CASE("resolved configuration round-trips through JSON") {
  for (const auto& n : preset_names()) {
    const auto c = preset(n);
    const std::string text = config_to_json(c);
    const auto back = parse_config(text);
    CHECK(config_to_json(back) == text);
  }
  ScenarioConfig c;
  c.alpha_profile = {{0.0, 0.2}, {0.5, 0.9}};
  c.external_action = ExternalAction{std::vector<double>(18, 0.01), 0.1, 0.3};
  c.splits = {{"custom0", InitPolicy::kCustom, {0.1, 0.1, 0.2}}};
  const std::string text = config_to_json(c);
  CHECK(config_to_json(parse_config(text)) == text);
}

TEST_CASE("semantic validation") {
  ScenarioConfig c;
  auto path_of = [](const ScenarioConfig& cfg) {
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  CHECK(path_of(c) == "<none>");
  c.alphas = {0.5, 1.5};
  CHECK(path_of(c) == "model.alpha[1]");
  c = {};
  c.cfl = 1.2;
  CHECK(path_of(c) == "numerics.cfl");
  c = {};
  c.gamma_eta = {1.0};
  CHECK(path_of(c) == "model.gamma_eta");
  c = {};
  c.mode = "clusters";
  CHECK(path_of(c) == "model.lanes");
  c = {};
  c.rho_values = {0.2, 1.2};
  CHECK(path_of(c) == "initial.rho[1]");
}

TEST_CASE("model parameters from a scenario") {
  ScenarioConfig c;
  c.alpha_profile = {{0.0, 0.2}, {1.0, 0.8}};
  const ModelParams p = model_params(c, 0.5);
  CHECK(p.alpha_at(0.5) == doctest::Approx(0.5));
  CHECK(p.alpha_at(0.25) == doctest::Approx(0.35));
  CHECK(p.gamma_eta.size() == 3);
}

TEST_CASE("audit run writes its artifacts and is reproducible") {
  ScenarioConfig c;
  c.mode = "audit";
  c.random_contexts = 2000;
  c.out_dir = scratch("audit_a").string();
  const auto s = run(c);
  CHECK(s.files.back() == "manifest.json");
  for (const auto& f : s.files) CHECK(fs::exists(fs::path(c.out_dir) / f));
  const std::string report = slurp(fs::path(c.out_dir) / "audit_report.csv");
  CHECK(report.find("coverage,1\n") != std::string::npos);
  CHECK(report.find("dual_lane_violations,0\n") != std::string::npos);

  // Replay from the manifest's embedded configuration.
  std::ifstream man(fs::path(c.out_dir) / "manifest.json");
  std::stringstream ss;
  ss << man.rdbuf();
  const std::string text = ss.str();
  const auto cfg_pos = text.find("\"config\"");
  REQUIRE(cfg_pos != std::string::npos);
  const auto open = text.find('{', cfg_pos);
  int depth = 0;
  std::size_t close = open;
  for (; close < text.size(); ++close) {
    if (text[close] == '{') ++depth;
    if (text[close] == '}' && --depth == 0) break;
  }
  ScenarioConfig replay = parse_config(text.substr(open, close - open + 1));
  CHECK(replay.out_dir == c.out_dir);
  replay.out_dir = scratch("audit_b").string();
  run(replay);
  for (const auto& f : s.files) {
    if (f == "manifest.json") continue;
    CHECK(slurp(fs::path(c.out_dir) / f) == slurp(fs::path(replay.out_dir) / f));
  }
  fs::remove_all(c.out_dir);
  fs::remove_all(replay.out_dir);
}

TEST_CASE("homogeneous and spatial runs write CSVs") {
  ScenarioConfig c;
  c.t_end = 1.0;
  c.dt = 0.1;
  c.rho_values = {0.3};
  c.out_dir = scratch("homog").string();
  auto s = run(c);
  REQUIRE(s.files.size() == 2);
  CHECK(s.files[0] == "trajectory_alpha0.6_rho0.3.csv");
  const std::string traj = slurp(fs::path(c.out_dir) / s.files[0]);
  CHECK(traj.rfind("t,lane,class,f\n0,1,1,", 0) == 0);
  fs::remove_all(c.out_dir);

  c.mode = "inhomogeneous";
  c.cells = 20;
  c.t_end = 0.05;
  c.snapshot_times = {0.0, 0.05};
  c.profile = "perturbed";
  c.out_dir = scratch("spatial").string();
  s = run(c);
  CHECK(s.files.size() == 4);
  const std::string macro = slurp(fs::path(c.out_dir) / "macro_alpha0.6_rho0.3.csv");
  CHECK(macro.rfind("t,x,lane,rho,q,U\n", 0) == 0);
  CHECK(std::count(macro.begin(), macro.end(), '\n') == 1 + 2 * 20 * 3);
  fs::remove_all(c.out_dir);
}
