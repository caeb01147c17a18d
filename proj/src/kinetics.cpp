#include "lanekin/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanekin {

double perceived_density(double rho, double drho_dx, int lanes) {
  const double cap = 1.0 / lanes;
  // g / sqrt(1 + g^2) rewritten to stay finite for |g| up to DBL_MAX.
  double s;
  if (std::abs(drho_dx) > 1.0) {
    const double inv = 1.0 / drho_dx;
    s = std::copysign(1.0 / std::sqrt(1.0 + inv * inv), drho_dx);
  } else {
    s = drho_dx / std::sqrt(1.0 + drho_dx * drho_dx);
  }
  return rho + s * ((cap - rho) * heaviside(drho_dx) + rho * heaviside(-drho_dx));
}

double encounter_rate(double rho_star, int lane, int lanes, const ModelParams& params) {
  return params.eta0 * (1.0 + params.gamma_eta[static_cast<std::size_t>(lane)] * lanes * rho_star);
}

double action_intensity(double rho_star, int lane, int lanes, const ModelParams& params) {
  return params.eta0 * (1.0 + params.gamma_mu[static_cast<std::size_t>(lane)] * lanes * rho_star);
}

double external_action(double f, double f_e, double rho_star, int lane, int lanes,
                       const ModelParams& params) {
  return action_intensity(rho_star, lane, lanes, params) * (f_e - f);
}

VisibilityZone::VisibilityZone(double x, double xi) : x_(x), xi_(xi) {
  if (!(xi > 0.0 && xi <= 1.0)) {
    throw InvalidParamsError("visibility length must lie in (0, 1], got " + std::to_string(xi));
  }
}

bool VisibilityZone::contains(double x_star) const noexcept {
  double d = std::fmod(x_star - x_, 1.0);
  if (d < 0.0) d += 1.0;
  return d <= xi_;
}

double weight(double /*x*/, double x_star, const VisibilityZone& zone) {
  return zone.contains(x_star) ? 1.0 / zone.length() : 0.0;
}

ZoneQuadrature zone_quadrature(int cell, int ncells, double xi) {
  ZoneQuadrature q;
  const double dx = 1.0 / ncells;
  // Zone covers [cell*dx, cell*dx + xi]; measured in cell units from the face.
  const double span = std::clamp(xi, 0.0, 1.0) / dx;
  const int whole = static_cast<int>(std::floor(span));
  const double rest = span - whole;
  const int count = std::min(ncells, whole + (rest > 1e-12 ? 1 : 0));
  if (count == 0) {
    q.cells.push_back(cell);
    q.weights.push_back(1.0);
    return q;
  }
  double sum = 0.0;
  for (int k = 0; k < count; ++k) {
    const double covered = (k < whole) ? 1.0 : rest;
    q.cells.push_back((cell + k) % ncells);
    q.weights.push_back(covered);
    sum += covered;
  }
  for (double& w : q.weights) w /= sum;
  return q;
}

}  // namespace lanekin
