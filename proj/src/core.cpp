#include "lanekin/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanekin {

VelocityGrid::VelocityGrid(int n) {
  if (n < 2) {
    throw InvalidGridError("velocity grid needs at least 2 classes, got " + std::to_string(n));
  }
  values_.resize(static_cast<std::size_t>(n));
  // i / (n-1) is exact at both ends; interior spacing is uniform to roundoff.
  for (int i = 0; i < n; ++i) {
    values_[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n - 1);
  }
}

VelocityGrid build_velocity_grid(int n) { return VelocityGrid(n); }

std::vector<int> admissible_lanes(int r, int lanes) {
  if (lanes < 2) {
    throw LaneIndexError("lane count must be >= 2, got " + std::to_string(lanes));
  }
  if (r < 0 || r >= lanes) {
    throw LaneIndexError("lane " + std::to_string(r) + " out of range [0, " +
                         std::to_string(lanes) + ")");
  }
  if (r == 0) return {0, 1};
  if (r == lanes - 1) return {lanes - 2, lanes - 1};
  return {r - 1, r, r + 1};
}

KineticField::KineticField(int lanes, int classes, double fill)
    : lanes_(lanes), classes_(classes) {
  if (lanes < 1 || classes < 1) {
    throw InvalidGridError("kinetic field needs positive dimensions");
  }
  data_.assign(static_cast<std::size_t>(lanes) * static_cast<std::size_t>(classes), fill);
}

double KineticField::lane_density(int l) const {
  double s = 0.0;
  for (double v : lane(l)) s += v;
  return s;
}

double KineticField::total() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double KineticField::min_entry() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

bool KineticField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double KineticField::l1_norm() const {
  double s = 0.0;
  for (double v : data_) s += std::abs(v);
  return s;
}

double KineticField::l1_distance(const KineticField& other) const {
  if (other.lanes_ != lanes_ || other.classes_ != classes_) {
    throw InvalidGridError("l1_distance: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k) s += std::abs(data_[k] - other.data_[k]);
  return s;
}

LaneMoments lane_moments(std::span<const double> f, const VelocityGrid& grid) {
  LaneMoments m;
  for (std::size_t i = 0; i < f.size(); ++i) {
    m.rho += f[i];
    m.q += grid[static_cast<int>(i)] * f[i];
  }
  if (m.rho > 0.0) {
    const double u = m.q / m.rho;
    double var = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = grid[static_cast<int>(i)] - u;
      var += d * d * f[i];
    }
    m.U = u;
    m.Theta = var / m.rho;
  }
  return m;
}

Macroscopics macroscopics(std::span<const double> f, int lanes, const VelocityGrid& grid) {
  const auto n = static_cast<std::size_t>(grid.size());
  if (f.size() != n * static_cast<std::size_t>(lanes)) {
    throw InvalidGridError("macroscopics: field size does not match lanes x classes");
  }
  Macroscopics out;
  out.lanes.reserve(static_cast<std::size_t>(lanes));
  double u_sum = 0.0;
  double theta_sum = 0.0;
  bool all_defined = true;
  for (int l = 0; l < lanes; ++l) {
    LaneMoments m = lane_moments(f.subspan(static_cast<std::size_t>(l) * n, n), grid);
    out.rho += m.rho;
    out.q += m.q;
    if (m.U) {
      u_sum += *m.U;
      theta_sum += *m.Theta;
    } else {
      all_defined = false;
    }
    out.lanes.push_back(m);
  }
  if (all_defined) {
    out.U = u_sum / lanes;
    out.Theta = theta_sum;
  }
  return out;
}

Macroscopics macroscopics(const KineticField& field, const VelocityGrid& grid) {
  if (field.classes() != grid.size()) {
    throw InvalidGridError("macroscopics: class count does not match velocity grid");
  }
  return macroscopics(field.data(), field.lanes(), grid);
}

AdmissibilityReport check_admissible(const KineticField& field, double tol) {
  AdmissibilityReport rep;
  const double bound = 1.0 / field.lanes();
  for (int l = 0; l < field.lanes(); ++l) {
    const double rho = field.lane_density(l);
    if (rho > bound + tol) {
      ++rep.violations;
      rep.worst_excess = std::max(rep.worst_excess, rho - bound);
    }
  }
  return rep;
}

ModelParams ModelParams::defaults(int lanes, double alpha) {
  ModelParams p;
  p.gamma_eta.assign(static_cast<std::size_t>(lanes), 1.0);
  p.gamma_mu.assign(static_cast<std::size_t>(lanes), 1.0);
  p.alpha = alpha;
  return p;
}

void ModelParams::validate(int lanes, int classes) const {
  // eta0 = 0 switches interactions off (free streaming).
  if (!(eta0 >= 0.0) || !std::isfinite(eta0)) {
    throw InvalidParamsError("eta0 must be non-negative and finite");
  }
  if (gamma_eta.size() != static_cast<std::size_t>(lanes) ||
      gamma_mu.size() != static_cast<std::size_t>(lanes)) {
    throw InvalidParamsError("gamma_eta and gamma_mu need one entry per lane");
  }
  for (double g : gamma_eta) {
    if (!(g >= 0.0)) throw InvalidParamsError("gamma_eta must be >= 0");
  }
  for (double g : gamma_mu) {
    if (!(g >= 0.0)) throw InvalidParamsError("gamma_mu must be >= 0");
  }
  if (!(xi_max > 0.0 && xi_max <= 1.0)) {
    throw InvalidParamsError("xi_max must lie in (0, 1]");
  }
  auto check_alpha = [](double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidParamsError("alpha must lie in [0, 1]");
  };
  if (alpha_profile) {
    constexpr int kSamples = 1024;
    for (int k = 0; k <= kSamples; ++k) check_alpha(alpha_profile(static_cast<double>(k) / kSamples));
  } else {
    check_alpha(alpha);
  }
  if (external_action) {
    const auto expected = static_cast<std::size_t>(lanes) * static_cast<std::size_t>(classes);
    if (external_action->target.size() != expected) {
      throw InvalidParamsError("external action target needs lanes x classes entries");
    }
  }
}

}  // namespace lanekin
