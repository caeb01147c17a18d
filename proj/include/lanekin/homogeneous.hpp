#pragma once

// Spatially homogeneous problem: an ODE system for the lanes x classes
// occupancies, integrated with classical RK4.

#include <optional>
#include <string>
#include <vector>

#include "lanekin/core.hpp"

namespace lanekin {

struct HomogeneousState {
  KineticField f;
  double t = 0.0;
};

/// Right-hand side: gain from every lane r whose admissible set contains the
/// destination lane, minus the loss eta_l * rho_l * f_il, plus the optional
/// external action. Perceived densities equal real densities here.
KineticField rhs_homogeneous(const KineticField& f, const ModelParams& params);

/// Largest dt with dt * eta_max * rho_max < 1, using the lane bound 1/L.
double positivity_dt_bound(const ModelParams& params, int lanes);

struct IntegrateOptions {
  double dt = 1e-2;
  double t_end = 1.0;
  int sample_stride = 1;  ///< keep every k-th step (the final state is always kept)
};

struct Trajectory {
  std::vector<HomogeneousState> samples;
  double max_mass_drift = 0.0;  ///< max over steps of |rho(t) - rho(0)|
  double min_entry = 0.0;       ///< smallest entry seen along the run
  double dt_positivity_bound = 0.0;
  long steps = 0;
};

/// Fixed-step RK4. Throws DivergenceError on NaN/Inf and PositivityError when
/// an entry drops below -1e-10.
Trajectory integrate(const HomogeneousState& state0, const ModelParams& params,
                     const IntegrateOptions& opts);

/// How dt and t_max are measured for steady-state searches. kInteraction
/// rescales both by 1/(eta0 * rho) so that sweeps over many densities use a
/// comparable number of steps per point.
enum class TimeUnit { kPhysical, kInteraction };

struct SteadyOptions {
  double steady_tol = 1e-9;
  double t_max = 200.0;
  double dt = 1e-2;
  TimeUnit time_unit = TimeUnit::kPhysical;
  double sample_interval = 0.0;  ///< physical time between kept samples; 0 keeps none
};

struct SteadyResult {
  HomogeneousState state;
  bool converged = false;
  double residual = 0.0;  ///< ||rhs||_1 at the returned state
  double min_entry = 0.0;
  double max_mass_drift = 0.0;
  long steps = 0;
  std::vector<HomogeneousState> samples;  ///< initial, periodic and final states when sampling
};

/// Integrates until ||rhs||_1 < steady_tol * eta0 * rho^2 or t_max is reached.
SteadyResult steady_state(const HomogeneousState& state0, const ModelParams& params,
                          const SteadyOptions& opts);

/// How a global density is split across lanes for the initial state.
enum class InitPolicy {
  kEqualSplit,     ///< rho/L in every lane
  kSlowestFirst,   ///< fill lane 0 up to 1/L, then lane 1, ...
  kFastestFirst,   ///< fill the fastest lane first
  kCustom,         ///< explicit per-lane densities
};

/// Initial state: lane densities per `policy`, each spread uniformly across
/// classes. Lane densities are clipped to 1/L.
KineticField initial_state(double rho, int lanes, int classes, InitPolicy policy,
                           const std::vector<double>& custom_lane_densities = {});

struct SweepSpec {
  std::vector<double> rho_values;
  double alpha = 0.6;
  InitPolicy init_policy = InitPolicy::kEqualSplit;
  int classes = 6;
  int lanes = 3;
  SteadyOptions steady{1e-9, 200.0, 1e-2, TimeUnit::kInteraction};
  int workers = 1;
};

struct DiagramRow {
  double rho_target = 0.0;
  int lane = -1;  ///< -1 for the global row
  double rho = 0.0;
  double q = 0.0;
  std::optional<double> U;
  std::optional<double> Theta;
  double alpha = 0.0;
  std::string status;  ///< "converged", "timeout" or "error: ..."
  double t_steady = 0.0;
  double min_entry = 0.0;  ///< smallest entry along the run
};

/// One steady state per density; emits L lane rows followed by the global
/// row for each density, in rho_values order. Points run on `workers`
/// threads; results do not depend on the worker count.
std::vector<DiagramRow> fundamental_diagram(const SweepSpec& spec, const ModelParams& params);

}  // namespace lanekin
