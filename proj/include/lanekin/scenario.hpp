#pragma once

// Batch scenarios: JSON configuration, built-in presets and the runner that
// writes CSV artifacts plus a manifest.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lanekin/core.hpp"
#include "lanekin/homogeneous.hpp"

namespace lanekin {

struct InitialSplit {
  std::string name;  ///< "equal", "slowest", "fastest" or "custom<k>"
  InitPolicy policy = InitPolicy::kEqualSplit;
  std::vector<double> lane_densities;  ///< kCustom only
};

struct ScenarioConfig {
  std::string mode = "homogeneous";  ///< homogeneous|diagram|relax|inhomogeneous|clusters|audit
  std::uint64_t seed = 20240601;
  int workers = 1;

  // model
  int classes = 6;
  int lanes = 3;
  std::vector<double> alphas{0.6};  ///< the scenario runs once per value
  std::vector<std::pair<double, double>> alpha_profile;  ///< (x, alpha) knots, overrides alphas
  double eta0 = 1.0;
  std::vector<double> gamma_eta;  ///< empty means 1 in every lane
  std::vector<double> gamma_mu;
  double xi_max = 0.1;
  bool strict_table = false;
  std::optional<ExternalAction> external_action;

  // numerics
  double dt = 1e-2;
  double t_end = 50.0;
  double cfl = 0.9;
  int cells = 200;
  std::string limiter = "minmod";    ///< minmod|none
  std::string splitting = "strang";  ///< strang|lie
  double source_positivity = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  std::vector<double> snapshot_times;
  double steady_tol = 1e-9;
  double t_max = 200.0;
  std::string time_unit = "physical";  ///< physical|interaction
  int sample_stride = 1;
  double sample_interval = 1.0;

  // initial condition
  std::vector<double> rho_values{0.4};
  std::vector<InitialSplit> splits{{"equal", InitPolicy::kEqualSplit, {}}};
  std::string profile = "uniform";  ///< uniform|perturbed|clusters (spatial runs)

  // audit
  std::vector<double> load_levels{0.0, 0.25, 0.5, 0.75, 1.0};
  long random_contexts = 10000;

  std::string out_dir = "out";
};

std::vector<std::string> preset_names();

/// Throws ConfigError for an unknown name.
ScenarioConfig preset(std::string_view name);

/// Parses JSON text on top of `base`. Keys absent from the text keep their
/// base values; unknown keys raise ConfigError naming the field path.
ScenarioConfig parse_config(std::string_view json_text, const ScenarioConfig& base = {});
ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base = {});

/// Fully resolved configuration, accepted back by parse_config.
std::string config_to_json(const ScenarioConfig& config, int indent = 2);

/// Throws ConfigError with the field path of the first invalid value.
void validate(const ScenarioConfig& config);

/// Model parameters for one alpha value of the scenario.
ModelParams model_params(const ScenarioConfig& config, double alpha);

struct RunSummary {
  std::vector<std::string> files;  ///< relative to out_dir, manifest last
  double wall_time_s = 0.0;
};

/// Validates, executes and writes every artifact into config.out_dir.
RunSummary run(const ScenarioConfig& config);

}  // namespace lanekin
