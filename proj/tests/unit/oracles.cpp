#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include "lanekin/validation.hpp"

namespace oracle {

using lanekin::InteractionContext;
using lanekin::KineticField;

namespace {

bool reaches(int r, int l, int lanes) {
  if (r == 0) return l == 0 || l == 1;
  if (r == lanes - 1) return l == lanes - 2 || l == lanes - 1;
  return std::abs(l - r) <= 1;
}

// Gain into every (l, i) from lane r given the lane's class occupancies
// f_h (candidates) and g_p (field), with perceived densities rs.
std::vector<double> lane_gain(const std::vector<double>& fh, const std::vector<double>& gp, int r,
                              double alpha, const std::vector<double>& rs) {
  const int lanes = static_cast<int>(rs.size());
  const int n = static_cast<int>(fh.size());
  std::vector<double> gain(static_cast<std::size_t>(lanes * n), 0.0);
  for (int h = 0; h < n; ++h) {
    for (int p = 0; p < n; ++p) {
      const InteractionContext ctx{h, p, r, alpha, rs, n};
      const auto row = lanekin::validation::brute_force_row(ctx);
      double sum = 0.0;
      for (double v : row) sum += v;
      for (std::size_t k = 0; k < row.size(); ++k) gain[k] += row[k] / sum * fh[h] * gp[p];
    }
  }
  return gain;
}

}  // namespace

KineticField naive_rhs(const KineticField& f, double alpha, double eta0, double gamma) {
  const int L = f.lanes();
  const int n = f.classes();
  std::vector<double> rho(L, 0.0);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) rho[l] += f(l, i);
  }
  KineticField out(L, n);
  for (int r = 0; r < L; ++r) {
    std::vector<double> fr(n);
    for (int i = 0; i < n; ++i) fr[i] = f(r, i);
    const double eta = eta0 * (1.0 + gamma * L * rho[r]);
    const auto gain = lane_gain(fr, fr, r, alpha, rho);
    for (int l = 0; l < L; ++l) {
      if (!reaches(r, l, L)) continue;
      for (int i = 0; i < n; ++i) out(l, i) += eta * gain[l * n + i];
    }
  }
  for (int l = 0; l < L; ++l) {
    const double eta = eta0 * (1.0 + gamma * L * rho[l]);
    for (int i = 0; i < n; ++i) out(l, i) -= eta * rho[l] * f(l, i);
  }
  return out;
}

double perceived(double rho, double g, int lanes) {
  const double s = g / std::sqrt(1.0 + g * g);
  if (g >= 0.0) return rho + s * (1.0 / lanes - rho);
  return rho + s * rho;
}

double local_J(const lanekin::SpatialField& field, int cell, int lane, int cls, double alpha,
               double eta0, double gamma) {
  const int L = field.lanes();
  const int n = field.classes();
  const int N = field.cells();
  auto density = [&](int l, int c) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += field(l, i, (c + N) % N);
    return s;
  };
  std::vector<double> rs(L);
  for (int l = 0; l < L; ++l) {
    const double g = (density(l, cell + 1) - density(l, cell - 1)) / (2.0 / N);
    rs[l] = std::min(std::max(perceived(density(l, cell), g, L), 0.0), 1.0 / L);
  }
  double gain = 0.0;
  for (int r = 0; r < L; ++r) {
    if (!reaches(r, lane, L)) continue;
    std::vector<double> fr(n);
    for (int i = 0; i < n; ++i) fr[i] = field(r, i, cell);
    const double eta = eta0 * (1.0 + gamma * L * perceived(density(r, cell),
                                                           (density(r, cell + 1) - density(r, cell - 1)) * N / 2.0, L));
    gain += eta * lane_gain(fr, fr, r, alpha, rs)[lane * n + cls];
  }
  const double rho_l = density(lane, cell);
  const double eta_l =
      eta0 * (1.0 + gamma * L * perceived(rho_l, (density(lane, cell + 1) - density(lane, cell - 1)) * N / 2.0, L));
  return gain - eta_l * rho_l * field(lane, cls, cell);
}

std::vector<double> sine_averages(int n, double shift) {
  std::vector<double> out(n);
  const double dx = 1.0 / n;
  const double w = 2.0 * std::numbers::pi;
  for (int j = 0; j < n; ++j) {
    const double a = j * dx - shift;
    const double b = a + dx;
    out[j] = 1.0 + (std::cos(w * a) - std::cos(w * b)) / (w * dx);
  }
  return out;
}

}  // namespace oracle
