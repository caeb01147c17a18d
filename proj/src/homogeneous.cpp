#include "lanekin/homogeneous.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "lanekin/kinetics.hpp"
#include "lanekin/table_of_games.hpp"

namespace lanekin {

namespace {

constexpr double kPositivityFloor = -1e-10;

// Table arguments are saturated to the admissible range [0, 1/L]; the solver
// reports density excursions separately through check_admissible.
double table_density(double rho, int lanes) { return std::clamp(rho, 0.0, 1.0 / lanes); }

void add_scaled(std::span<double> out, std::span<const double> a, double s,
                std::span<const double> b) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + s * b[k];
}

}  // namespace

KineticField rhs_homogeneous(const KineticField& f, const ModelParams& params) {
  const int L = f.lanes();
  const int n = f.classes();
  KineticField out(L, n);

  std::vector<double> rho(static_cast<std::size_t>(L));
  std::vector<double> rho_table(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    rho[static_cast<std::size_t>(l)] = f.lane_density(l);
    rho_table[static_cast<std::size_t>(l)] = table_density(rho[static_cast<std::size_t>(l)], L);
  }

  std::vector<double> gain(static_cast<std::size_t>(L) * static_cast<std::size_t>(n));
  for (int r = 0; r < L; ++r) {
    const double eta = encounter_rate(rho[static_cast<std::size_t>(r)], r, L, params);
    if (rho[static_cast<std::size_t>(r)] == 0.0) continue;
    const LaneTable table(r, params.alpha, rho_table, n, params.policy);
    std::fill(gain.begin(), gain.end(), 0.0);
    for (int h = 0; h < n; ++h) {
      const double fh = f(r, h);
      if (fh == 0.0) continue;
      for (int p = 0; p < n; ++p) {
        const double w = fh * f(r, p);
        if (w == 0.0) continue;
        const auto dest = table.destinations(h, p);
        for (std::size_t k = 0; k < dest.size(); ++k) gain[k] += w * dest[k];
      }
    }
    // Only lanes in admissible_lanes(r) receive mass from lane r.
    for (int l : admissible_lanes(r, L)) {
      for (int i = 0; i < n; ++i) {
        out(l, i) += eta * gain[static_cast<std::size_t>(l * n + i)];
      }
    }
  }

  for (int l = 0; l < L; ++l) {
    const double loss = encounter_rate(rho[static_cast<std::size_t>(l)], l, L, params) *
                        rho[static_cast<std::size_t>(l)];
    for (int i = 0; i < n; ++i) out(l, i) -= loss * f(l, i);
  }

  if (params.external_action) {
    const auto& target = params.external_action->target;
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < n; ++i) {
        out(l, i) += external_action(f(l, i), target[static_cast<std::size_t>(l * n + i)],
                                     rho[static_cast<std::size_t>(l)], l, L, params);
      }
    }
  }
  return out;
}

double positivity_dt_bound(const ModelParams& params, int lanes) {
  double gmax = 0.0;
  for (double g : params.gamma_eta) gmax = std::max(gmax, g);
  const double eta_max = params.eta0 * (1.0 + gmax);
  return 1.0 / (eta_max * (1.0 / lanes));
}

namespace {

// One classical RK4 step. `k1` must already hold rhs(f).
KineticField rk4_step(const KineticField& f, const KineticField& k1, double dt,
                      const ModelParams& params) {
  KineticField tmp(f.lanes(), f.classes());
  add_scaled(tmp.data(), f.data(), 0.5 * dt, k1.data());
  const KineticField k2 = rhs_homogeneous(tmp, params);
  add_scaled(tmp.data(), f.data(), 0.5 * dt, k2.data());
  const KineticField k3 = rhs_homogeneous(tmp, params);
  add_scaled(tmp.data(), f.data(), dt, k3.data());
  const KineticField k4 = rhs_homogeneous(tmp, params);

  KineticField next = f;
  auto out = next.data();
  const auto a = k1.data(), b = k2.data(), c = k3.data(), d = k4.data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] += dt / 6.0 * (a[k] + 2.0 * b[k] + 2.0 * c[k] + d[k]);
  }
  return next;
}

void check_state(const KineticField& f, long step, double t) {
  if (!f.all_finite()) {
    throw DivergenceError("non-finite value at step " + std::to_string(step) +
                              " (t=" + std::to_string(t) + ")",
                          step);
  }
  const double lo = f.min_entry();
  if (lo < kPositivityFloor) {
    throw PositivityError("entry " + std::to_string(lo) + " below -1e-10 at step " +
                          std::to_string(step) + "; reduce dt");
  }
}

}  // namespace

Trajectory integrate(const HomogeneousState& state0, const ModelParams& params,
                     const IntegrateOptions& opts) {
  if (!(opts.dt > 0.0)) throw InvalidParamsError("dt must be positive");
  if (opts.sample_stride < 1) throw InvalidParamsError("sample_stride must be >= 1");
  params.validate(state0.f.lanes(), state0.f.classes());

  Trajectory tr;
  tr.dt_positivity_bound = positivity_dt_bound(params, state0.f.lanes());
  tr.min_entry = state0.f.min_entry();
  tr.samples.push_back(state0);

  const double m0 = state0.f.total();
  HomogeneousState s = state0;
  const double t_end = state0.t + opts.t_end;
  long step = 0;
  while (s.t < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
    const double dt = std::min(opts.dt, t_end - s.t);
    const KineticField k1 = rhs_homogeneous(s.f, params);
    s.f = rk4_step(s.f, k1, dt, params);
    ++step;
    s.t = (t_end - s.t <= opts.dt) ? t_end : state0.t + step * opts.dt;
    check_state(s.f, step, s.t);
    tr.min_entry = std::min(tr.min_entry, s.f.min_entry());
    tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(s.f.total() - m0));
    if (step % opts.sample_stride == 0 || s.t >= t_end) {
      if (tr.samples.back().t != s.t) tr.samples.push_back(s);
    }
  }
  tr.steps = step;
  return tr;
}

SteadyResult steady_state(const HomogeneousState& state0, const ModelParams& params,
                          const SteadyOptions& opts) {
  if (!(opts.steady_tol > 0.0)) throw InvalidParamsError("steady_tol must be positive");
  if (!(opts.dt > 0.0)) throw InvalidParamsError("dt must be positive");
  params.validate(state0.f.lanes(), state0.f.classes());

  SteadyResult res;
  res.state = state0;
  res.min_entry = state0.f.min_entry();
  const double rho = state0.f.total();
  const double threshold = opts.steady_tol * params.eta0 * rho * rho;

  double dt = opts.dt;
  double t_max = opts.t_max;
  if (opts.time_unit == TimeUnit::kInteraction && rho > 0.0 && params.eta0 > 0.0) {
    dt /= params.eta0 * rho;
    t_max /= params.eta0 * rho;
  }

  HomogeneousState& s = res.state;
  const double t_stop = state0.t + t_max;
  const bool sampling = opts.sample_interval > 0.0;
  double next_sample = state0.t;
  long step = 0;
  while (true) {
    if (sampling && s.t >= next_sample - 1e-12) {
      res.samples.push_back(s);
      next_sample += opts.sample_interval;
    }
    const KineticField k1 = rhs_homogeneous(s.f, params);
    res.residual = k1.l1_norm();
    if (res.residual <= threshold) {
      res.converged = true;
      break;
    }
    if (s.t >= t_stop - 1e-12 * std::max(1.0, t_stop)) break;
    const double h = std::min(dt, t_stop - s.t);
    s.f = rk4_step(s.f, k1, h, params);
    ++step;
    s.t = (t_stop - s.t <= dt) ? t_stop : state0.t + step * dt;
    check_state(s.f, step, s.t);
    res.min_entry = std::min(res.min_entry, s.f.min_entry());
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(s.f.total() - rho));
  }
  res.steps = step;
  if (sampling && (res.samples.empty() || res.samples.back().t != s.t)) res.samples.push_back(s);
  return res;
}

KineticField initial_state(double rho, int lanes, int classes, InitPolicy policy,
                           const std::vector<double>& custom_lane_densities) {
  if (!(rho >= 0.0 && rho <= 1.0 + 1e-12)) {
    throw InvalidParamsError("global density must lie in [0, 1]");
  }
  const double cap = 1.0 / lanes;
  std::vector<double> lane_rho(static_cast<std::size_t>(lanes), 0.0);
  switch (policy) {
    case InitPolicy::kEqualSplit:
      for (double& v : lane_rho) v = std::min(rho / lanes, cap);
      break;
    case InitPolicy::kSlowestFirst:
    case InitPolicy::kFastestFirst: {
      double left = rho;
      for (int k = 0; k < lanes; ++k) {
        const int l = policy == InitPolicy::kSlowestFirst ? k : lanes - 1 - k;
        const double take = std::min(left, cap);
        lane_rho[static_cast<std::size_t>(l)] = take;
        left -= take;
      }
      break;
    }
    case InitPolicy::kCustom:
      if (custom_lane_densities.size() != static_cast<std::size_t>(lanes)) {
        throw InvalidParamsError("custom split needs one density per lane");
      }
      for (int l = 0; l < lanes; ++l) {
        const double v = custom_lane_densities[static_cast<std::size_t>(l)];
        if (v < 0.0) throw InvalidParamsError("lane density must be >= 0");
        lane_rho[static_cast<std::size_t>(l)] = std::min(v, cap);
      }
      break;
  }
  KineticField f(lanes, classes);
  for (int l = 0; l < lanes; ++l) {
    for (int i = 0; i < classes; ++i) f(l, i) = lane_rho[static_cast<std::size_t>(l)] / classes;
  }
  return f;
}

std::vector<DiagramRow> fundamental_diagram(const SweepSpec& spec, const ModelParams& params) {
  const VelocityGrid grid(spec.classes);
  ModelParams p = params;
  p.alpha = spec.alpha;
  p.validate(spec.lanes, spec.classes);

  const std::size_t points = spec.rho_values.size();
  const std::size_t per_point = static_cast<std::size_t>(spec.lanes) + 1;
  std::vector<DiagramRow> rows(points * per_point);

  auto run_point = [&](std::size_t k) {
    const double rho = spec.rho_values[k];
    DiagramRow* out = &rows[k * per_point];
    for (std::size_t j = 0; j < per_point; ++j) {
      out[j].rho_target = rho;
      out[j].alpha = spec.alpha;
      out[j].lane = j < static_cast<std::size_t>(spec.lanes) ? static_cast<int>(j) : -1;
    }
    try {
      const HomogeneousState s0{initial_state(rho, spec.lanes, spec.classes, spec.init_policy), 0.0};
      const SteadyResult res = steady_state(s0, p, spec.steady);
      const Macroscopics m = macroscopics(res.state.f, grid);
      const std::string status = res.converged ? "converged" : "timeout";
      for (int l = 0; l < spec.lanes; ++l) {
        DiagramRow& row = out[l];
        row.rho = m.lanes[static_cast<std::size_t>(l)].rho;
        row.q = m.lanes[static_cast<std::size_t>(l)].q;
        row.U = m.lanes[static_cast<std::size_t>(l)].U;
        row.Theta = m.lanes[static_cast<std::size_t>(l)].Theta;
        row.status = status;
        row.t_steady = res.state.t;
        row.min_entry = res.min_entry;
      }
      DiagramRow& g = out[spec.lanes];
      g.rho = m.rho;
      g.q = m.q;
      g.U = m.U;
      g.Theta = m.Theta;
      g.status = status;
      g.t_steady = res.state.t;
      g.min_entry = res.min_entry;
    } catch (const Error& e) {
      for (std::size_t j = 0; j < per_point; ++j) out[j].status = std::string("error: ") + e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(points)));
  if (workers == 1) {
    for (std::size_t k = 0; k < points; ++k) run_point(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < points; k = next++) run_point(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace lanekin
