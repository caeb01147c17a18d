#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lanekin/core.hpp"
#include "lanekin/homogeneous.hpp"
#include "lanekin/inhomogeneous.hpp"
#include "lanekin/kinetics.hpp"
#include "lanekin/scenario.hpp"
#include "lanekin/table_audit.hpp"
#include "lanekin/table_of_games.hpp"
#include "lanekin/validation.hpp"

namespace py = pybind11;
using namespace lanekin;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

KineticField to_field(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a (lanes, classes) array");
  KineticField f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), f.data().begin());
  return f;
}

Array from_field(const KineticField& f) {
  Array a({f.lanes(), f.classes()});
  std::copy(f.data().begin(), f.data().end(), a.mutable_data());
  return a;
}

Array from_spatial(const SpatialField& f) {
  Array a({f.lanes(), f.classes(), f.cells()});
  std::copy(f.data().begin(), f.data().end(), a.mutable_data());
  return a;
}

SpatialField to_spatial(const Array& a) {
  if (a.ndim() != 3) throw py::value_error("expected a (lanes, classes, cells) array");
  SpatialField f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), f.data().begin());
  return f;
}

py::dict row_dict(const TransitionRow& row) {
  py::list entries;
  for (const auto& e : row.entries) entries.append(py::make_tuple(e.cls, e.lane, e.prob));
  py::dict d;
  d["entries"] = entries;
  d["raw_sum"] = row.raw_sum;
  d["min_entry"] = row.min_entry;
  d["case"] = std::string(case_label(row.game_case));
  d["sum"] = row.sum();
  return d;
}

ModelParams params_or_default(const std::optional<ModelParams>& p, int lanes, double alpha) {
  if (p) return *p;
  return ModelParams::defaults(lanes, alpha);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multilane discrete-velocity kinetic traffic model";
  m.attr("__version__") = LANEKIN_VERSION;

  static py::exception<Error> base(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InvalidParamsError>(m, "InvalidParamsError", base.ptr());

  py::class_<ModelParams>(m, "ModelParams")
      .def_static("defaults", &ModelParams::defaults, py::arg("lanes"), py::arg("alpha"))
      .def_readwrite("eta0", &ModelParams::eta0)
      .def_readwrite("gamma_eta", &ModelParams::gamma_eta)
      .def_readwrite("gamma_mu", &ModelParams::gamma_mu)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("xi_max", &ModelParams::xi_max)
      .def_property(
          "strict_table", [](const ModelParams& p) { return p.policy == TablePolicy::kStrict; },
          [](ModelParams& p, bool s) { p.policy = s ? TablePolicy::kStrict : TablePolicy::kRenormalize; });

  m.def("velocity_grid", [](int n) {
    const VelocityGrid g(n);
    return std::vector<double>(g.values().begin(), g.values().end());
  });
  m.def("admissible_lanes", &admissible_lanes, py::arg("lane"), py::arg("lanes"));
  m.def("perceived_density", &perceived_density, py::arg("rho"), py::arg("drho_dx"), py::arg("lanes"));

  m.def(
      "transition_row",
      [](int h, int p, int r, double alpha, std::vector<double> rho_star, int classes, bool strict) {
        const InteractionContext ctx{h, p, r, alpha, rho_star, classes};
        return row_dict(transition_row(ctx, strict ? TablePolicy::kStrict : TablePolicy::kRenormalize));
      },
      py::arg("h"), py::arg("p"), py::arg("lane"), py::arg("alpha"), py::arg("rho_star"),
      py::arg("classes"), py::arg("strict") = false);
  m.def(
      "brute_force_row_sum",
      [](int h, int p, int r, double alpha, std::vector<double> rho_star, int classes) {
        return validation::brute_force_row_sum({h, p, r, alpha, rho_star, classes});
      },
      py::arg("h"), py::arg("p"), py::arg("lane"), py::arg("alpha"), py::arg("rho_star"),
      py::arg("classes"));

  m.def(
      "audit",
      [](int classes, int lanes, std::vector<double> alphas, std::vector<double> load_levels) {
        const AuditReport rep = audit_table({classes, lanes, alphas, load_levels});
        py::dict d;
        d["rows"] = rep.findings.size();
        d["max_deviation"] = rep.max_deviation;
        d["defective_rows"] = rep.defective_rows;
        d["negative_entries"] = rep.negative_entries;
        d["coverage"] = rep.coverage();
        py::dict per_case;
        for (int c = 0; c < kGameCaseCount; ++c) {
          per_case[py::str(std::string(case_label(static_cast<GameCase>(c))))] =
              rep.case_max_deviation[static_cast<std::size_t>(c)];
        }
        d["case_max_deviation"] = per_case;
        return d;
      },
      py::arg("classes") = 6, py::arg("lanes") = 3,
      py::arg("alphas") = std::vector<double>{0.3, 0.6, 0.95},
      py::arg("load_levels") = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  m.def(
      "initial_state",
      [](double rho, int lanes, int classes, const std::string& split) {
        InitPolicy p = InitPolicy::kEqualSplit;
        if (split == "slowest") p = InitPolicy::kSlowestFirst;
        else if (split == "fastest") p = InitPolicy::kFastestFirst;
        else if (split != "equal") throw py::value_error("split must be equal, slowest or fastest");
        return from_field(initial_state(rho, lanes, classes, p));
      },
      py::arg("rho"), py::arg("lanes") = 3, py::arg("classes") = 6, py::arg("split") = "equal");

  m.def(
      "rhs",
      [](const Array& f, double alpha, std::optional<ModelParams> params) {
        const KineticField k = to_field(f);
        return from_field(rhs_homogeneous(k, params_or_default(params, k.lanes(), alpha)));
      },
      py::arg("f"), py::arg("alpha") = 0.6, py::arg("params") = py::none());

  m.def(
      "integrate",
      [](const Array& f0, double alpha, double dt, double t_end, int stride,
         std::optional<ModelParams> params) {
        const KineticField k = to_field(f0);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = integrate({k, 0.0}, params_or_default(params, k.lanes(), alpha), {dt, t_end, stride});
        }
        Array states({static_cast<py::ssize_t>(tr.samples.size()), static_cast<py::ssize_t>(k.lanes()),
                      static_cast<py::ssize_t>(k.classes())});
        std::vector<double> times;
        double* out = states.mutable_data();
        for (const auto& s : tr.samples) {
          times.push_back(s.t);
          out = std::copy(s.f.data().begin(), s.f.data().end(), out);
        }
        py::dict d;
        d["t"] = times;
        d["f"] = states;
        d["max_mass_drift"] = tr.max_mass_drift;
        d["min_entry"] = tr.min_entry;
        return d;
      },
      py::arg("f0"), py::arg("alpha") = 0.6, py::arg("dt") = 1e-2, py::arg("t_end") = 1.0,
      py::arg("stride") = 1, py::arg("params") = py::none());

  m.def(
      "steady_state",
      [](const Array& f0, double alpha, double steady_tol, double t_max, double dt,
         std::optional<ModelParams> params) {
        const KineticField k = to_field(f0);
        SteadyResult res;
        {
          py::gil_scoped_release release;
          res = steady_state({k, 0.0}, params_or_default(params, k.lanes(), alpha),
                             {steady_tol, t_max, dt, TimeUnit::kPhysical});
        }
        py::dict d;
        d["f"] = from_field(res.state.f);
        d["t"] = res.state.t;
        d["converged"] = res.converged;
        d["residual"] = res.residual;
        return d;
      },
      py::arg("f0"), py::arg("alpha") = 0.6, py::arg("steady_tol") = 1e-9, py::arg("t_max") = 200.0,
      py::arg("dt") = 1e-2, py::arg("params") = py::none());

  m.def(
      "fundamental_diagram",
      [](std::vector<double> rho_values, double alpha, int lanes, int classes, double t_max,
         double dt, int workers) {
        SweepSpec spec;
        spec.rho_values = std::move(rho_values);
        spec.alpha = alpha;
        spec.lanes = lanes;
        spec.classes = classes;
        spec.steady = {1e-9, t_max, dt, TimeUnit::kInteraction};
        spec.workers = workers;
        std::vector<DiagramRow> rows;
        {
          py::gil_scoped_release release;
          rows = fundamental_diagram(spec, ModelParams::defaults(lanes, alpha));
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["rho"] = r.rho;
          d["lane"] = r.lane;
          d["q"] = r.q;
          d["U"] = r.U ? py::cast(*r.U) : py::none();
          d["status"] = r.status;
          out.append(d);
        }
        return out;
      },
      py::arg("rho_values"), py::arg("alpha"), py::arg("lanes") = 3, py::arg("classes") = 6,
      py::arg("t_max") = 2000.0, py::arg("dt") = 0.1, py::arg("workers") = 1);

  m.def(
      "advect",
      [](std::vector<double> f, double v, double dt, double dx, bool limiter) {
        advect_profile(f, v, dt, dx, limiter ? Limiter::kMinmod : Limiter::kNone);
        return f;
      },
      py::arg("f"), py::arg("v"), py::arg("dt"), py::arg("dx"), py::arg("limiter") = true);
  m.def("total_variation", [](std::vector<double> f) { return total_variation(f); });

  m.def(
      "interaction_term",
      [](const Array& f, double alpha, std::optional<ModelParams> params) {
        const SpatialField s = to_spatial(f);
        return from_spatial(interaction_term(s, params_or_default(params, s.lanes(), alpha)));
      },
      py::arg("f"), py::arg("alpha") = 0.6, py::arg("params") = py::none());

  m.def("cluster_initial_data", [](int cells) { return from_spatial(cluster_initial_data(cells)); },
        py::arg("cells") = 200);

  m.def(
      "run_clusters",
      [](double alpha, int cells, double t_end, std::vector<double> snapshot_times) {
        ClustersResult res;
        {
          py::gil_scoped_release release;
          res = run_clusters_scenario(alpha, cells, t_end, snapshot_times, ModelParams::defaults(2, alpha));
        }
        py::list snaps;
        for (const auto& s : res.run.snapshots) snaps.append(py::make_tuple(s.t, from_spatial(s)));
        py::dict d;
        d["snapshots"] = snaps;
        d["t"] = res.run.step_times;
        d["lane_masses"] = res.run.lane_masses;
        d["fast_peak"] = res.fast_peak;
        d["slow_peak"] = res.slow_peak;
        d["max_relative_drift"] = res.run.max_relative_drift;
        d["min_entry"] = res.run.min_entry;
        return d;
      },
      py::arg("alpha"), py::arg("cells") = 200, py::arg("t_end") = 1.61,
      py::arg("snapshot_times") = std::vector<double>{0.01, 0.35, 1.61});

  m.def("presets", &preset_names);
  m.def(
      "run_scenario",
      [](const std::string& json_text, const std::string& preset_name) {
        const ScenarioConfig base = preset_name.empty() ? ScenarioConfig{} : preset(preset_name);
        const ScenarioConfig cfg = parse_config(json_text, base);
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = run(cfg);
        }
        return s.files;
      },
      py::arg("config_json") = "{}", py::arg("preset") = "");
}
