// Command-line driver for the batch scenarios.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lanekin/error.hpp"
#include "lanekin/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool strict_table = false;
  std::optional<double> alpha;
  std::optional<int> lanes;
  std::optional<int> classes;
  std::optional<int> cells;
  std::optional<double> t_end;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON scenario file");
  cmd->add_option("--preset", f.preset, "built-in scenario: paper-diagram, paper-relax, paper-clusters");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "seed for randomized checks");
  cmd->add_option("--workers", f.workers, "worker threads for sweeps");
  cmd->add_flag("--strict-table", f.strict_table, "keep raw table rows (no renormalization)");
  cmd->add_option("--alpha", f.alpha, "road quality in [0, 1]");
  cmd->add_option("--lanes", f.lanes, "number of lanes");
  cmd->add_option("--classes", f.classes, "number of velocity classes");
  cmd->add_option("--cells", f.cells, "grid cells for spatial runs");
  cmd->add_option("--t-end", f.t_end, "final time");
  cmd->add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
}

// Preset, then file, then flags; later sources win.
lanekin::ScenarioConfig resolve(const Flags& f, const std::string& mode) {
  lanekin::ScenarioConfig c = f.preset.empty() ? lanekin::ScenarioConfig{} : lanekin::preset(f.preset);
  if (!f.config.empty()) c = lanekin::load_config(f.config, c);
  if (mode == "simulate") {
    if (c.mode != "inhomogeneous") c.mode = "homogeneous";
  } else {
    c.mode = mode;
  }
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.strict_table) c.strict_table = true;
  if (f.alpha) c.alphas = {*f.alpha};
  if (f.lanes) c.lanes = *f.lanes;
  if (f.classes) c.classes = *f.classes;
  if (f.cells) c.cells = *f.cells;
  if (f.t_end) c.t_end = *f.t_end;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilane discrete-velocity kinetic traffic simulator"};
  app.set_version_flag("--version", std::string(LANEKIN_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const char* commands[][2] = {
      {"simulate", "time-dependent run (homogeneous, or spatial with mode=inhomogeneous)"},
      {"diagram", "fundamental diagrams from steady states"},
      {"relax", "relaxation of lane densities toward equilibrium"},
      {"clusters", "two-cluster spatial experiment"},
      {"audit", "table normalization audit and dual-implementation check"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    const lanekin::ScenarioConfig config = resolve(flags, mode);
    if (flags.print_config) {
      lanekin::validate(config);
      std::cout << lanekin::config_to_json(config) << '\n';
      return 0;
    }
    const lanekin::RunSummary summary = lanekin::run(config);
    for (const auto& file : summary.files) std::cout << config.out_dir << '/' << file << '\n';
    std::cerr << "done in " << summary.wall_time_s << " s\n";
    return 0;
  } catch (const lanekin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lanekin::InvalidParamsError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lanekin::InvalidGridError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lanekin::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
