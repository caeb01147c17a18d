#include <doctest.h>

#include <cmath>
#include <random>

#include "lanekin/homogeneous.hpp"
#include "lanekin/validation.hpp"
#include "oracles.hpp"

using namespace lanekin;

namespace {

KineticField random_state(std::mt19937_64& rng, int lanes, int classes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  KineticField f(lanes, classes);
  for (int l = 0; l < lanes; ++l) {
    const double rho = u(rng) / lanes;
    double s = 0.0;
    std::vector<double> w(static_cast<std::size_t>(classes));
    for (double& v : w) s += (v = u(rng));
    for (int i = 0; i < classes; ++i) f(l, i) = rho * w[static_cast<std::size_t>(i)] / s;
  }
  return f;
}

}  // namespace

TEST_CASE("empty road has no dynamics") {
  const KineticField f(3, 6);
  const auto out = rhs_homogeneous(f, ModelParams::defaults(3, 0.6));
  CHECK(out.l1_norm() == 0.0);
}

TEST_CASE("interactions conserve the total density") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const int lanes = 2 + k % 3;
    const int classes = 2 + k % 7;
    const KineticField f = random_state(rng, lanes, classes);
    const auto out = rhs_homogeneous(f, ModelParams::defaults(lanes, 0.1 + 0.004 * k));
    double s = 0.0;
    for (double v : out.data()) s += v;
    CHECK(std::abs(s) <= 1e-14);
  }
}

TEST_CASE("slowest-lane queue feeds the next lane") {
  // All mass in lane 0 at rest: only equal-speed encounters, moving up with
  // probability alpha * load(0) * (1 - load(1)).
  const double rho0 = 0.2, a = 0.6;
  KineticField f(3, 6);
  f(0, 0) = rho0;
  const auto out = rhs_homogeneous(f, ModelParams::defaults(3, a));
  const double eta = 1.0 + 3.0 * rho0;
  const double move = a * (3.0 * rho0);
  const double harmonic = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5;
  CHECK(out(0, 0) == doctest::Approx(-eta * rho0 * rho0 * move).epsilon(1e-14));
  for (int i = 1; i < 6; ++i) {
    CHECK(out(0, i) == 0.0);
    CHECK(out(1, i) == doctest::Approx(eta * rho0 * rho0 * move / i / harmonic).epsilon(1e-14));
  }
  CHECK(out(1, 0) == 0.0);
  for (int i = 0; i < 6; ++i) CHECK(out(2, i) == 0.0);
}

TEST_CASE("right-hand side agrees with the term-by-term oracle") {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 60; ++k) {
    const int lanes = 2 + k % 3;
    const int classes = 3 + k % 5;
    const double alpha = 0.05 + 0.015 * k;
    const KineticField f = random_state(rng, lanes, classes);
    const auto mine = rhs_homogeneous(f, ModelParams::defaults(lanes, alpha));
    const auto ref = oracle::naive_rhs(f, alpha, 1.0, 1.0);
    CHECK(mine.l1_distance(ref) <= 1e-13);
  }
}

TEST_CASE("integration conserves mass and stays nonnegative") {
  std::mt19937_64 rng(3);
  const KineticField f0 = random_state(rng, 3, 6);
  const auto tr = integrate({f0, 0.0}, ModelParams::defaults(3, 0.6), {0.05, 20.0, 10});
  CHECK(tr.max_mass_drift <= 1e-10);
  CHECK(tr.min_entry >= 0.0);
  CHECK(tr.samples.front().t == 0.0);
  CHECK(tr.samples.back().t == doctest::Approx(20.0));
  CHECK(tr.steps == 400);
  CHECK(tr.samples.size() == 41);
}

TEST_CASE("RK4 converges at fourth order") {
  std::mt19937_64 rng(8);
  KineticField f0 = random_state(rng, 3, 6);
  for (double& v : f0.data()) v *= 2.5;  // denser, faster dynamics
  const ModelParams p = ModelParams::defaults(3, 0.6);
  auto final_state = [&](double dt) {
    return integrate({f0, 0.0}, p, {dt, 2.0, 1000000}).samples.back().f;
  };
  const auto a = final_state(0.4), b = final_state(0.2), c = final_state(0.1);
  const double order = validation::convergence_order(a.l1_distance(b), b.l1_distance(c));
  CHECK(order >= 3.8);
}

TEST_CASE("huge steps are rejected") {
  std::mt19937_64 rng(1);
  KineticField f0 = random_state(rng, 3, 6);
  for (double& v : f0.data()) v *= 3.0;
  CHECK_THROWS_AS(integrate({f0, 0.0}, ModelParams::defaults(3, 0.6), {60.0, 600.0, 1}),
                  NumericalError);
  CHECK_THROWS_AS(integrate({f0, 0.0}, ModelParams::defaults(3, 0.6), {0.0, 1.0, 1}),
                  InvalidParamsError);
  CHECK(positivity_dt_bound(ModelParams::defaults(3, 0.6), 3) == doctest::Approx(1.5));
}

TEST_CASE("steady states") {
  const ModelParams p = ModelParams::defaults(3, 0.6);

  SUBCASE("empty road is already steady") {
    const auto res = steady_state({KineticField(3, 6), 0.0}, p, {});
    CHECK(res.converged);
    CHECK(res.steps == 0);
  }

  SUBCASE("every lane is used") {
    const KineticField f0 = initial_state(0.2, 3, 6, InitPolicy::kSlowestFirst);
    CHECK(f0.lane_density(0) == doctest::Approx(0.2));
    CHECK(f0.lane_density(2) == 0.0);
    const auto res = steady_state({f0, 0.0}, p, {1e-9, 2000.0, 0.1, TimeUnit::kInteraction});
    REQUIRE(res.converged);
    for (int l = 0; l < 3; ++l) CHECK(res.state.f.lane_density(l) > 1e-3);
    CHECK(res.max_mass_drift <= 1e-10);
  }

  SUBCASE("equilibrium does not depend on the initial split") {
    const SteadyOptions opts{1e-10, 3000.0, 0.1, TimeUnit::kInteraction};
    std::vector<KineticField> ends;
    for (auto policy : {InitPolicy::kSlowestFirst, InitPolicy::kEqualSplit, InitPolicy::kFastestFirst}) {
      const auto res = steady_state({initial_state(0.4, 3, 6, policy), 0.0}, p, opts);
      REQUIRE(res.converged);
      ends.push_back(res.state.f);
    }
    CHECK(ends[0].l1_distance(ends[1]) <= 1e-6);
    CHECK(ends[1].l1_distance(ends[2]) <= 1e-6);
  }

  SUBCASE("periodic samples") {
    const KineticField f0 = initial_state(0.3, 3, 6, InitPolicy::kFastestFirst);
    SteadyOptions opts{1e-9, 12.0, 0.05, TimeUnit::kPhysical};
    opts.sample_interval = 2.0;
    const auto res = steady_state({f0, 0.0}, p, opts);
    REQUIRE(res.samples.size() == 7);
    for (std::size_t k = 0; k < res.samples.size(); ++k) {
      CHECK(res.samples[k].t == doctest::Approx(2.0 * static_cast<double>(k)).epsilon(1e-9));
    }
    CHECK(res.samples.front().f == f0);
  }
}

TEST_CASE("initial splits") {
  const auto f = initial_state(0.5, 3, 6, InitPolicy::kFastestFirst);
  CHECK(f.lane_density(2) == doctest::Approx(1.0 / 3));
  CHECK(f.lane_density(1) == doctest::Approx(0.5 - 1.0 / 3));
  CHECK(f.lane_density(0) == 0.0);
  const auto c = initial_state(0.0, 2, 4, InitPolicy::kCustom, {0.1, 0.3});
  CHECK(c.lane_density(0) == doctest::Approx(0.1));
  CHECK(c(1, 2) == doctest::Approx(0.3 / 4));
  CHECK_THROWS_AS(initial_state(0.0, 2, 4, InitPolicy::kCustom, {0.1}), InvalidParamsError);
  CHECK_THROWS_AS(initial_state(1.5, 3, 6, InitPolicy::kEqualSplit), InvalidParamsError);
}

TEST_CASE("fundamental diagram rows") {
  SweepSpec spec;
  spec.rho_values = {0.05, 0.3, 0.6};
  spec.alpha = 0.6;
  spec.steady = {1e-9, 2000.0, 0.1, TimeUnit::kInteraction};
  const auto rows = fundamental_diagram(spec, ModelParams::defaults(3, 0.6));
  REQUIRE(rows.size() == 12);
  const VelocityGrid grid(6);
  for (std::size_t k = 0; k < 3; ++k) {
    double lane_rho = 0.0, lane_q = 0.0;
    for (int l = 0; l < 3; ++l) {
      const auto& r = rows[k * 4 + static_cast<std::size_t>(l)];
      CHECK(r.lane == l);
      CHECK(r.status == "converged");
      lane_rho += r.rho;
      lane_q += r.q;
    }
    const auto& g = rows[k * 4 + 3];
    CHECK(g.lane == -1);
    CHECK(g.rho_target == spec.rho_values[k]);
    CHECK(g.rho == doctest::Approx(spec.rho_values[k]).epsilon(1e-10));
    CHECK(g.rho == doctest::Approx(lane_rho).epsilon(1e-14));
    CHECK(g.q == doctest::Approx(lane_q).epsilon(1e-14));
    REQUIRE(g.U);
    CHECK(*g.U > 0.0);
    CHECK(*g.U < 1.0);
  }

  SUBCASE("worker count does not change results") {
    spec.workers = 3;
    const auto par = fundamental_diagram(spec, ModelParams::defaults(3, 0.6));
    REQUIRE(par.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(par[k].rho == rows[k].rho);
      CHECK(par[k].q == rows[k].q);
      CHECK(par[k].U == rows[k].U);
      CHECK(par[k].status == rows[k].status);
    }
  }
}

TEST_CASE("strict table drift follows the audited defect") {
  // d(mass)/dt = sum_r eta_r sum_{h,p} f_rh f_rp (raw_sum - 1).
  std::mt19937_64 rng(41);
  const KineticField f0 = random_state(rng, 3, 6);
  ModelParams p = ModelParams::defaults(3, 0.5);
  p.policy = TablePolicy::kStrict;

  double rate = 0.0;
  for (int r = 0; r < 3; ++r) {
    std::vector<double> rs;
    for (int l = 0; l < 3; ++l) rs.push_back(f0.lane_density(l));
    const double eta = 1.0 + 3.0 * rs[static_cast<std::size_t>(r)];
    for (int h = 0; h < 6; ++h) {
      for (int q = 0; q < 6; ++q) {
        const double raw = validation::brute_force_row_sum({h, q, r, 0.5, rs, 6});
        rate += eta * f0(r, h) * f0(r, q) * (raw - 1.0);
      }
    }
  }
  REQUIRE(std::abs(rate) > 1e-8);
  const double T = 0.05;
  const auto tr = integrate({f0, 0.0}, p, {0.005, T, 1});
  const double drift = tr.samples.back().f.total() - f0.total();
  CHECK(drift / (rate * T) >= 0.5);
  CHECK(drift / (rate * T) <= 2.0);
}
