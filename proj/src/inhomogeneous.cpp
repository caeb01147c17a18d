#include "lanekin/inhomogeneous.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lanekin/kinetics.hpp"
#include "lanekin/table_of_games.hpp"

namespace lanekin {

SpatialField::SpatialField(int lanes, int classes, int cells, double fill)
    : lanes_(lanes), classes_(classes), cells_(cells) {
  if (lanes < 1) throw InvalidGridError("need at least one lane");
  if (classes < 2) throw InvalidGridError("need at least two velocity classes");
  if (cells < 1) throw InvalidGridError("need at least one cell");
  data_.assign(static_cast<std::size_t>(lanes) * static_cast<std::size_t>(classes) *
                   static_cast<std::size_t>(cells),
               fill);
}

SpatialField SpatialField::uniform(const KineticField& f, int cells) {
  SpatialField out(f.lanes(), f.classes(), cells);
  for (int l = 0; l < f.lanes(); ++l) {
    for (int i = 0; i < f.classes(); ++i) {
      auto prof = out.profile(l, i);
      std::fill(prof.begin(), prof.end(), f(l, i));
    }
  }
  return out;
}

double SpatialField::lane_density(int lane, int cell) const {
  double s = 0.0;
  for (int i = 0; i < classes_; ++i) s += (*this)(lane, i, cell);
  return s;
}

KineticField SpatialField::at(int cell) const {
  KineticField f(lanes_, classes_);
  for (int l = 0; l < lanes_; ++l) {
    for (int i = 0; i < classes_; ++i) f(l, i) = (*this)(l, i, cell);
  }
  return f;
}

double SpatialField::total_mass() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s * dx();
}

double SpatialField::lane_mass(int lane) const {
  double s = 0.0;
  for (int i = 0; i < classes_; ++i) {
    for (double v : profile(lane, i)) s += v;
  }
  return s * dx();
}

double SpatialField::class_mass(int lane, int cls) const {
  double s = 0.0;
  for (double v : profile(lane, cls)) s += v;
  return s * dx();
}

double SpatialField::min_entry() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

bool SpatialField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double SpatialField::l1_distance(const SpatialField& other) const {
  if (other.data_.size() != data_.size()) throw InvalidGridError("field shapes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k) s += std::abs(data_[k] - other.data_[k]);
  return s * dx();
}

// ---------------------------------------------------------------- transport

double total_variation(std::span<const double> f) {
  const std::size_t n = f.size();
  double tv = 0.0;
  for (std::size_t j = 0; j < n; ++j) tv += std::abs(f[(j + 1) % n] - f[j]);
  return tv;
}

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace

void advect_profile(std::span<double> f, double v, double dt, double dx, Limiter limiter) {
  if (v == 0.0 || f.empty()) return;
  const std::size_t n = f.size();
  const double nu = v * dt / dx;
  // flux[j] is the flux through the right face of cell j, divided by v.
  std::vector<double> flux(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double fm = f[(j + n - 1) % n];
    const double f0 = f[j];
    const double fp = f[(j + 1) % n];
    const double slope = limiter == Limiter::kMinmod ? minmod(fp - f0, f0 - fm) : 0.0;
    flux[j] = f0 + 0.5 * (1.0 - nu) * slope;
  }
  for (std::size_t j = 0; j < n; ++j) f[j] -= nu * (flux[j] - flux[(j + n - 1) % n]);
}

SpatialField transport_step(const SpatialField& field, double dt, const SchemeConfig& config) {
  const VelocityGrid grid(field.classes());
  const double dx = field.dx();
  if (!(dt >= 0.0)) throw StepSizeError("time step must be non-negative");
  if (dt * grid.max_speed() > config.cfl * dx * (1.0 + 1e-12)) {
    throw StepSizeError("dt=" + std::to_string(dt) + " violates CFL " + std::to_string(config.cfl) +
                        " (max " + std::to_string(config.cfl * dx / grid.max_speed()) + ")");
  }
  SpatialField out = field;
  for (int l = 0; l < field.lanes(); ++l) {
    for (int i = 0; i < field.classes(); ++i) {
      advect_profile(out.profile(l, i), grid[i], dt, dx, config.limiter);
    }
  }
  return out;
}

// -------------------------------------------------------------- interaction

std::vector<double> perceived_density_profile(const SpatialField& field, int lane) {
  const int N = field.cells();
  const int L = field.lanes();
  std::vector<double> rho(static_cast<std::size_t>(N));
  for (int c = 0; c < N; ++c) rho[static_cast<std::size_t>(c)] = field.lane_density(lane, c);
  std::vector<double> out(static_cast<std::size_t>(N));
  const double inv2dx = 0.5 * N;
  for (int c = 0; c < N; ++c) {
    const double g = (rho[static_cast<std::size_t>((c + 1) % N)] -
                      rho[static_cast<std::size_t>((c + N - 1) % N)]) *
                     inv2dx;
    out[static_cast<std::size_t>(c)] = perceived_density(rho[static_cast<std::size_t>(c)], g, L);
  }
  return out;
}

namespace {

// Per-cell closure quantities shared by every evaluation of J.
struct CellClosures {
  int lanes = 0;
  int cells = 0;
  std::vector<double> rho;         // [lane][cell]
  std::vector<double> rho_star;    // [lane][cell]
  std::vector<double> eta;         // [lane][cell]

  std::size_t at(int l, int c) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(cells) + static_cast<std::size_t>(c);
  }
};

CellClosures closures(const SpatialField& field, const ModelParams& params) {
  CellClosures cc;
  cc.lanes = field.lanes();
  cc.cells = field.cells();
  const std::size_t size = static_cast<std::size_t>(cc.lanes) * static_cast<std::size_t>(cc.cells);
  cc.rho.resize(size);
  cc.rho_star.resize(size);
  cc.eta.resize(size);
  for (int l = 0; l < cc.lanes; ++l) {
    const auto ps = perceived_density_profile(field, l);
    for (int c = 0; c < cc.cells; ++c) {
      cc.rho[cc.at(l, c)] = field.lane_density(l, c);
      cc.rho_star[cc.at(l, c)] = ps[static_cast<std::size_t>(c)];
      cc.eta[cc.at(l, c)] = encounter_rate(ps[static_cast<std::size_t>(c)], l, cc.lanes, params);
    }
  }
  return cc;
}

// B[h][k] = eta_r(c*) * sum_p A_r(c*)[h, p -> k] f_p^r(c*), k = l * n + i.
// Zero when lane r is empty at c*.
void field_block(const SpatialField& field, const CellClosures& cc, const ModelParams& params,
                 int cstar, int r, std::vector<double>& B) {
  const int L = field.lanes();
  const int n = field.classes();
  const std::size_t block = static_cast<std::size_t>(L) * static_cast<std::size_t>(n);
  B.assign(static_cast<std::size_t>(n) * block, 0.0);
  if (cc.rho[cc.at(r, cstar)] == 0.0) return;

  // Table arguments are saturated to the admissible range, as in the
  // homogeneous solver.
  std::vector<double> rs(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) rs[static_cast<std::size_t>(l)] = std::clamp(cc.rho_star[cc.at(l, cstar)], 0.0, 1.0 / L);
  const LaneTable table(r, params.alpha_at(field.cell_center(cstar)), rs, n, params.policy);
  const double eta = cc.eta[cc.at(r, cstar)];
  for (int h = 0; h < n; ++h) {
    double* out = B.data() + static_cast<std::size_t>(h) * block;
    for (int p = 0; p < n; ++p) {
      const double fp = field(r, p, cstar);
      if (fp == 0.0) continue;
      const auto dest = table.destinations(h, p);
      const double w = eta * fp;
      for (std::size_t k = 0; k < block; ++k) out[k] += w * dest[k];
    }
  }
}

ZoneQuadrature zone_for(const SpatialField& field, const ModelParams& params, int c) {
  const double xi = visibility_length(params.alpha_at(field.cell_center(c)), params.xi_max);
  return zone_quadrature(c, field.cells(), xi);
}

bool in_action_region(const ExternalAction& act, double x) {
  return x >= act.x_begin && x < act.x_end;
}

}  // namespace

SpatialField interaction_term(const SpatialField& field, const ModelParams& params) {
  const int L = field.lanes();
  const int n = field.classes();
  const int N = field.cells();
  params.validate(L, n);
  const CellClosures cc = closures(field, params);
  const std::size_t block = static_cast<std::size_t>(L) * static_cast<std::size_t>(n);
  const std::size_t per_cell = static_cast<std::size_t>(n) * block;

  // Field-side blocks for every (lane, cell).
  std::vector<double> blocks(static_cast<std::size_t>(L) * static_cast<std::size_t>(N) * per_cell);
  std::vector<double> B;
  for (int r = 0; r < L; ++r) {
    for (int cs = 0; cs < N; ++cs) {
      field_block(field, cc, params, cs, r, B);
      std::copy(B.begin(), B.end(), blocks.begin() + static_cast<std::ptrdiff_t>(cc.at(r, cs) * per_cell));
    }
  }

  SpatialField out(L, n, N);
  std::vector<double> conv(per_cell);
  std::vector<double> gain(block);
  std::vector<double> loss(static_cast<std::size_t>(L));
  for (int c = 0; c < N; ++c) {
    const ZoneQuadrature zq = zone_for(field, params, c);
    std::fill(gain.begin(), gain.end(), 0.0);
    for (int r = 0; r < L; ++r) {
      std::fill(conv.begin(), conv.end(), 0.0);
      for (std::size_t j = 0; j < zq.cells.size(); ++j) {
        const double w = zq.weights[j];
        const double* b = blocks.data() + cc.at(r, zq.cells[j]) * per_cell;
        for (std::size_t k = 0; k < per_cell; ++k) conv[k] += w * b[k];
      }
      const auto allowed = admissible_lanes(r, L);
      for (int h = 0; h < n; ++h) {
        const double fh = field(r, h, c);
        if (fh == 0.0) continue;
        const double* ch = conv.data() + static_cast<std::size_t>(h) * block;
        for (int l : allowed) {
          for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(l * n + i);
            gain[k] += fh * ch[k];
          }
        }
      }
    }
    std::fill(loss.begin(), loss.end(), 0.0);
    for (std::size_t j = 0; j < zq.cells.size(); ++j) {
      for (int l = 0; l < L; ++l) {
        const std::size_t a = cc.at(l, zq.cells[j]);
        loss[static_cast<std::size_t>(l)] += zq.weights[j] * cc.eta[a] * cc.rho[a];
      }
    }
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < n; ++i) {
        out(l, i, c) = gain[static_cast<std::size_t>(l * n + i)] - loss[static_cast<std::size_t>(l)] * field(l, i, c);
      }
    }
  }

  if (params.external_action) {
    const auto& act = *params.external_action;
    for (int c = 0; c < N; ++c) {
      if (!in_action_region(act, field.cell_center(c))) continue;
      for (int l = 0; l < L; ++l) {
        for (int i = 0; i < n; ++i) {
          out(l, i, c) += external_action(field(l, i, c), act.target[static_cast<std::size_t>(l * n + i)],
                                          cc.rho_star[cc.at(l, c)], l, L, params);
        }
      }
    }
  }
  return out;
}

double nonlocal_J(const SpatialField& field, int cell, int lane, int cls, const ModelParams& params) {
  const int L = field.lanes();
  const int n = field.classes();
  if (lane < 0 || lane >= L) throw LaneIndexError("lane out of range");
  if (cls < 0 || cls >= n || cell < 0 || cell >= field.cells()) {
    throw InvalidGridError("class or cell out of range");
  }
  params.validate(L, n);
  const CellClosures cc = closures(field, params);
  const std::size_t block = static_cast<std::size_t>(L) * static_cast<std::size_t>(n);
  const std::size_t k = static_cast<std::size_t>(lane * n + cls);
  const ZoneQuadrature zq = zone_for(field, params, cell);

  double gain = 0.0;
  std::vector<double> B;
  for (int r = 0; r < L; ++r) {
    const auto allowed = admissible_lanes(r, L);
    if (std::find(allowed.begin(), allowed.end(), lane) == allowed.end()) continue;
    for (std::size_t j = 0; j < zq.cells.size(); ++j) {
      field_block(field, cc, params, zq.cells[j], r, B);
      for (int h = 0; h < n; ++h) {
        gain += zq.weights[j] * field(r, h, cell) * B[static_cast<std::size_t>(h) * block + k];
      }
    }
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < zq.cells.size(); ++j) {
    const std::size_t a = cc.at(lane, zq.cells[j]);
    loss += zq.weights[j] * cc.eta[a] * cc.rho[a];
  }
  double J = gain - loss * field(lane, cls, cell);
  if (params.external_action && in_action_region(*params.external_action, field.cell_center(cell))) {
    J += external_action(field(lane, cls, cell), params.external_action->target[k],
                         cc.rho_star[cc.at(lane, cell)], lane, L, params);
  }
  return J;
}

// ----------------------------------------------------------------- stepping

double stable_dt(const SpatialField& field, const ModelParams& params, const SchemeConfig& config) {
  const VelocityGrid grid(field.classes());
  double dt = std::min(config.cfl * field.dx() / grid.max_speed(), config.dt_max);
  double gmax = 0.0;
  for (double g : params.gamma_eta) gmax = std::max(gmax, g);
  const double eta_max = params.eta0 * (1.0 + gmax);
  double rho_max = 0.0;
  for (int l = 0; l < field.lanes(); ++l) {
    for (int c = 0; c < field.cells(); ++c) rho_max = std::max(rho_max, field.lane_density(l, c));
  }
  if (eta_max * rho_max > 0.0) dt = std::min(dt, config.source_positivity / (eta_max * rho_max));
  return dt;
}

namespace {

void axpy(std::span<double> y, double a, std::span<const double> x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

// Third-order strong-stability-preserving Runge-Kutta for f' = J(f).
SpatialField source_ssprk3(const SpatialField& f, const ModelParams& params, double h) {
  SpatialField u1 = f;
  axpy(u1.data(), h, interaction_term(f, params).data());
  SpatialField u2 = u1;
  axpy(u2.data(), h, interaction_term(u1, params).data());
  {
    auto a = u2.data();
    const auto b = f.data();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.75 * b[k] + 0.25 * a[k];
  }
  SpatialField u3 = u2;
  axpy(u3.data(), h, interaction_term(u2, params).data());
  {
    auto a = u3.data();
    const auto b = f.data();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = b[k] / 3.0 + 2.0 * a[k] / 3.0;
  }
  return u3;
}

}  // namespace

SpatialField step(const SpatialField& field, const ModelParams& params, const SchemeConfig& config,
                  double dt) {
  SpatialField out;
  if (config.splitting == Splitting::kLie) {
    out = transport_step(field, dt, config);
    const SpatialField J = interaction_term(out, params);
    axpy(out.data(), dt, J.data());
  } else {
    out = source_ssprk3(field, params, 0.5 * dt);
    out = transport_step(out, dt, config);
    out = source_ssprk3(out, params, 0.5 * dt);
  }
  out.t = field.t + dt;
  return out;
}

SpatialField step(const SpatialField& field, const ModelParams& params, const SchemeConfig& config) {
  return step(field, params, config, stable_dt(field, params, config));
}

SpatialRun integrate_spatial(const SpatialField& field0, const ModelParams& params,
                             const SpatialRunOptions& opts, const StepObserver& observer) {
  params.validate(field0.lanes(), field0.classes());
  if (!(opts.scheme.cfl > 0.0 && opts.scheme.cfl <= 1.0)) {
    throw InvalidParamsError("cfl must lie in (0, 1]");
  }
  const double t0 = field0.t;
  const double t_end = t0 + opts.t_end;
  std::vector<double> targets;
  for (double ts : opts.snapshot_times) {
    if (ts >= t0 && ts <= t_end) targets.push_back(ts);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  SpatialRun run;
  const int L = field0.lanes();
  const double cap = 1.0 / L;
  const double m0 = field0.total_mass();
  run.min_entry = field0.min_entry();

  auto record = [&](const SpatialField& f) {
    run.step_times.push_back(f.t);
    std::vector<double> lm(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) lm[static_cast<std::size_t>(l)] = f.lane_mass(l);
    run.lane_masses.push_back(std::move(lm));
    for (int l = 0; l < L; ++l) {
      for (int c = 0; c < f.cells(); ++c) {
        const double rho = f.lane_density(l, c);
        run.max_lane_density = std::max(run.max_lane_density, rho);
        if (rho > cap + 1e-12) ++run.admissibility_violations;
      }
    }
    if (observer) observer(f);
  };

  SpatialField f = field0;
  record(f);
  std::size_t next = 0;
  while (next < targets.size() && targets[next] <= f.t) run.snapshots.push_back(f), ++next;

  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (f.t < t_end - eps) {
    double dt = stable_dt(f, params, opts.scheme);
    const double stop = next < targets.size() ? std::min(targets[next], t_end) : t_end;
    bool land = false;
    if (stop - f.t <= dt) {
      dt = stop - f.t;
      land = true;
    }
    f = step(f, params, opts.scheme, dt);
    if (land) f.t = stop;
    ++run.steps;

    if (!f.all_finite()) {
      throw DivergenceError("non-finite value at step " + std::to_string(run.steps), run.steps);
    }
    const double lo = f.min_entry();
    run.min_entry = std::min(run.min_entry, lo);
    if (lo < -1e-10) {
      throw PositivityError("entry " + std::to_string(lo) + " below -1e-10 at t=" +
                            std::to_string(f.t) + "; reduce cfl or source_positivity");
    }
    if (m0 > 0.0) {
      run.max_relative_drift = std::max(run.max_relative_drift, std::abs(f.total_mass() - m0) / m0);
    }
    record(f);
    while (next < targets.size() && targets[next] <= f.t + eps) run.snapshots.push_back(f), ++next;
  }
  if (opts.t_end > 0.0) run.drift_per_unit_time = run.max_relative_drift / opts.t_end;
  return run;
}

// ----------------------------------------------------------------- clusters

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

double bump(double x, double a, double b, double amp) {
  if (x < a || x > b) return 0.0;
  const double s = std::sin(10.0 * std::numbers::pi * (x - a) * (x - b));
  return amp * s * s;
}

double fast_cluster(double x) { return bump(x, 0.3, 0.4, 70.0); }
double slow_cluster(double x) { return bump(x, 0.5, 0.6, 50.0); }

// Composite 5-point Gauss-Legendre on [a, b] split into `parts` pieces.
template <class F>
double gauss(F&& f, double a, double b, int parts) {
  const double h = (b - a) / parts;
  double s = 0.0;
  for (int k = 0; k < parts; ++k) {
    const double mid = a + (k + 0.5) * h;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      s += kGaussWeights[q] * f(mid + 0.5 * h * kGaussNodes[q]);
    }
  }
  return 0.5 * h * s;
}

// Argmax of a periodic profile, unwrapped to the copy nearest `previous`.
double unwrapped_peak(std::span<const double> prof, double dx, double previous) {
  const auto it = std::max_element(prof.begin(), prof.end());
  const double x = (static_cast<double>(it - prof.begin()) + 0.5) * dx;
  return x + std::round(previous - x);
}

}  // namespace

SpatialField cluster_initial_data(int cells) {
  SpatialField f(2, 6, cells);
  const double dx = f.dx();
  auto average = [&](auto&& prof, double lo, double hi, int c) {
    // Only the part of the cell inside the support contributes.
    const double a = std::max(c * dx, lo);
    const double b = std::min((c + 1) * dx, hi);
    return b > a ? gauss(prof, a, b, 4) / dx : 0.0;
  };
  for (int c = 0; c < cells; ++c) {
    f(0, 4, c) = average(fast_cluster, 0.3, 0.4, c);
    f(0, 3, c) = average(slow_cluster, 0.5, 0.6, c);
  }
  return f;
}

std::pair<double, double> cluster_masses() {
  return {gauss(fast_cluster, 0.3, 0.4, 64), gauss(slow_cluster, 0.5, 0.6, 64)};
}

ClustersResult run_clusters_scenario(double alpha, int cells, double t_end,
                                     const std::vector<double>& snapshot_times,
                                     const ModelParams& params, const SchemeConfig& scheme) {
  ModelParams p = params;
  p.alpha = alpha;
  const SpatialField f0 = cluster_initial_data(cells);

  ClustersResult res;
  const double dx = f0.dx();
  double fast = 0.35;
  double slow = 0.55;
  auto track = [&](const SpatialField& f) {
    fast = unwrapped_peak(f.profile(0, 4), dx, fast);
    slow = unwrapped_peak(f.profile(0, 3), dx, slow);
    res.fast_peak.push_back(fast);
    res.slow_peak.push_back(slow);
  };
  res.run = integrate_spatial(f0, p, {t_end, snapshot_times, scheme}, track);
  return res;
}

}  // namespace lanekin
