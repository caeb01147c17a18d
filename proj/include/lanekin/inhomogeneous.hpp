#pragma once

// Spatially inhomogeneous problem on the periodic unit road: linear transport
// of every (lane, class) profile plus the nonlocal interaction operator.

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "lanekin/core.hpp"

namespace lanekin {

/// Cell averages f[lane][class][cell] on a uniform periodic grid of [0, 1).
class SpatialField {
 public:
  SpatialField() = default;
  SpatialField(int lanes, int classes, int cells, double fill = 0.0);

  /// Every cell holds `f`.
  static SpatialField uniform(const KineticField& f, int cells);

  int lanes() const noexcept { return lanes_; }
  int classes() const noexcept { return classes_; }
  int cells() const noexcept { return cells_; }
  double dx() const noexcept { return 1.0 / cells_; }
  double cell_center(int c) const noexcept { return (c + 0.5) / cells_; }

  double& operator()(int lane, int cls, int cell) { return data_[index(lane, cls, cell)]; }
  double operator()(int lane, int cls, int cell) const { return data_[index(lane, cls, cell)]; }

  /// Contiguous profile of one class along the road.
  std::span<double> profile(int lane, int cls) {
    return std::span<double>(data_).subspan(index(lane, cls, 0), static_cast<std::size_t>(cells_));
  }
  std::span<const double> profile(int lane, int cls) const {
    return std::span<const double>(data_).subspan(index(lane, cls, 0),
                                                  static_cast<std::size_t>(cells_));
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double lane_density(int lane, int cell) const;
  /// Local state of one cell as a lanes x classes block.
  KineticField at(int cell) const;

  /// Integrals over the road (sum of f * dx).
  double total_mass() const;
  double lane_mass(int lane) const;
  double class_mass(int lane, int cls) const;

  double min_entry() const;
  bool all_finite() const;
  /// Sum over entries of |f - g| * dx.
  double l1_distance(const SpatialField& other) const;

  double t = 0.0;

 private:
  std::size_t index(int lane, int cls, int cell) const {
    return (static_cast<std::size_t>(lane) * static_cast<std::size_t>(classes_) +
            static_cast<std::size_t>(cls)) *
               static_cast<std::size_t>(cells_) +
           static_cast<std::size_t>(cell);
  }

  int lanes_ = 0;
  int classes_ = 0;
  int cells_ = 0;
  std::vector<double> data_;
};

enum class Limiter { kMinmod, kNone };

/// kStrang: half source, transport, half source, with SSPRK3 for the source.
/// kLie: transport then one forward-Euler source step.
enum class Splitting { kStrang, kLie };

struct SchemeConfig {
  double cfl = 0.9;
  Limiter limiter = Limiter::kMinmod;
  Splitting splitting = Splitting::kStrang;
  double source_positivity = 0.5;  ///< dt * eta_max * rho_max bound
  double dt_max = std::numeric_limits<double>::infinity();
};

/// Periodic total variation sum |f[j+1] - f[j]|.
double total_variation(std::span<const double> f);

/// One step of the slope-limited upwind scheme for f_t + v f_x = 0, v >= 0.
void advect_profile(std::span<double> f, double v, double dt, double dx, Limiter limiter);

/// Transports every class at its own speed. Throws StepSizeError when
/// dt exceeds cfl * dx / v_max.
SpatialField transport_step(const SpatialField& field, double dt, const SchemeConfig& config);

/// Perceived density of `lane` in every cell, from periodic central
/// differences of the lane density.
std::vector<double> perceived_density_profile(const SpatialField& field, int lane);

/// Interaction operator J (gain minus loss, plus the external action when
/// configured) for every entry.
SpatialField interaction_term(const SpatialField& field, const ModelParams& params);

/// J for a single (lane, class, cell). Same arithmetic as interaction_term.
double nonlocal_J(const SpatialField& field, int cell, int lane, int cls,
                  const ModelParams& params);

/// min(cfl * dx / v_max, source bound, dt_max) for the current field.
double stable_dt(const SpatialField& field, const ModelParams& params, const SchemeConfig& config);

/// Advances by exactly `dt` (field.t is updated).
SpatialField step(const SpatialField& field, const ModelParams& params, const SchemeConfig& config,
                  double dt);

/// Advances by stable_dt(field, params, config).
SpatialField step(const SpatialField& field, const ModelParams& params, const SchemeConfig& config);

struct SpatialRunOptions {
  double t_end = 1.0;
  std::vector<double> snapshot_times;  ///< hit exactly; times beyond t_end are ignored
  SchemeConfig scheme;
};

struct SpatialRun {
  std::vector<SpatialField> snapshots;
  std::vector<double> step_times;               ///< t after every step, t0 first
  std::vector<std::vector<double>> lane_masses;  ///< per entry of step_times
  double max_relative_drift = 0.0;
  double drift_per_unit_time = 0.0;
  double min_entry = 0.0;
  long admissibility_violations = 0;  ///< (step, cell, lane) with rho > 1/L
  double max_lane_density = 0.0;
  long steps = 0;
};

using StepObserver = std::function<void(const SpatialField&)>;

/// Integrates to t_end. The observer, when set, sees the initial field and
/// the field after every step. Throws PositivityError below -1e-10 and
/// DivergenceError on non-finite values.
SpatialRun integrate_spatial(const SpatialField& field0, const ModelParams& params,
                             const SpatialRunOptions& opts, const StepObserver& observer = {});

/// Two clusters in the slowest of two lanes: class 4 carries
/// 70 sin^2(10 pi (x-0.3)(x-0.4)) on [0.3, 0.4], class 3 carries
/// 50 sin^2(10 pi (x-0.5)(x-0.6)) on [0.5, 0.6]. Cell averages by
/// Gauss-Legendre quadrature. Six classes.
SpatialField cluster_initial_data(int cells);

/// Exact integral of the two cluster profiles (class 4, class 3).
std::pair<double, double> cluster_masses();

struct ClustersResult {
  SpatialRun run;
  /// Unwrapped argmax positions in lane 0 per entry of run.step_times.
  std::vector<double> fast_peak;  ///< class 4
  std::vector<double> slow_peak;  ///< class 3
};

ClustersResult run_clusters_scenario(double alpha, int cells, double t_end,
                                     const std::vector<double>& snapshot_times,
                                     const ModelParams& params, const SchemeConfig& scheme = {});

}  // namespace lanekin
