#pragma once

// Closure terms of the kinetic model: perceived density, encounter rate,
// external-action intensity and the visibility-zone weight function.

#include <vector>

#include "lanekin/core.hpp"

namespace lanekin {

/// Heaviside step with H(0) = 1.
inline double heaviside(double x) noexcept { return x >= 0.0 ? 1.0 : 0.0; }

/// Density felt by a driver: biased toward 1/L on positive gradients and
/// toward 0 on negative ones. Stays in [0, 1/L] whenever rho does.
double perceived_density(double rho, double drho_dx, int lanes);

/// eta0 * (1 + gamma_eta[lane] * L * rho_star).
double encounter_rate(double rho_star, int lane, int lanes, const ModelParams& params);

/// eta0 * (1 + gamma_mu[lane] * L * rho_star).
double action_intensity(double rho_star, int lane, int lanes, const ModelParams& params);

/// Relaxation toward the prescribed distribution: mu * (f_e - f).
double external_action(double f, double f_e, double rho_star, int lane, int lanes,
                       const ModelParams& params);

/// Visibility length alpha * xi_max.
inline double visibility_length(double alpha, double xi_max) noexcept { return alpha * xi_max; }

/// Forward interval [x, x + xi] on the periodic unit road.
class VisibilityZone {
 public:
  VisibilityZone(double x, double xi);

  double x() const noexcept { return x_; }
  double length() const noexcept { return xi_; }

  /// True when x_star lies in the zone after periodic wrap.
  bool contains(double x_star) const noexcept;

 private:
  double x_;
  double xi_;
};

/// Uniform weight: 1/xi inside the zone, 0 outside.
double weight(double x, double x_star, const VisibilityZone& zone);

/// Discrete weights for the zone anchored at the left face of `cell`. Each
/// weight is w * dx_covered and the row sums to 1. A zero-length zone
/// degenerates to the cell itself.
struct ZoneQuadrature {
  std::vector<int> cells;
  std::vector<double> weights;
};

ZoneQuadrature zone_quadrature(int cell, int ncells, double xi);

}  // namespace lanekin
