#include "lanekin/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lanekin/inhomogeneous.hpp"
#include "lanekin/table_audit.hpp"
#include "lanekin/validation.hpp"

namespace lanekin {

using json = nlohmann::ordered_json;

namespace {

// ------------------------------------------------------------------ parsing

// Walks one JSON object, remembering its path and which keys were read so
// that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) out = as_number(*v, path(key));
  }
  void optional_number(const std::string& key, double& out, double null_value) {
    if (const json* v = get(key)) out = v->is_null() ? null_value : as_number(*v, path(key));
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = get(key)) out = static_cast<int>(as_integer(*v, path(key)));
  }
  void integer(const std::string& key, long& out) {
    if (const json* v = get(key)) out = static_cast<long>(as_integer(*v, path(key)));
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  /// A number or an array of numbers.
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = get(key)) out = as_numbers(*v, path(key));
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& p) {
    if (!v.is_number()) throw ConfigError(p, "expected a number");
    return v.get<double>();
  }
  static long long as_integer(const json& v, const std::string& p) {
    if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
    return v.get<long long>();
  }
  static std::vector<double> as_numbers(const json& v, const std::string& p) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(p, "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      out.push_back(as_number(v[k], p + "[" + std::to_string(k) + "]"));
    }
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

InitialSplit split_from_name(const std::string& name, const std::string& p) {
  if (name == "equal") return {name, InitPolicy::kEqualSplit, {}};
  if (name == "slowest") return {name, InitPolicy::kSlowestFirst, {}};
  if (name == "fastest") return {name, InitPolicy::kFastestFirst, {}};
  throw ConfigError(p, "unknown split '" + name + "' (equal, slowest, fastest or an array)");
}

void parse_model(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "model");
  r.integer("classes", c.classes);
  r.integer("lanes", c.lanes);
  r.numbers("alpha", c.alphas);
  if (const json* v = r.get("alpha_profile")) {
    const std::string p = r.path("alpha_profile");
    if (!v->is_array()) throw ConfigError(p, "expected an array of [x, alpha] pairs");
    c.alpha_profile.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string pk = p + "[" + std::to_string(k) + "]";
      const auto pair = ObjectReader::as_numbers((*v)[k], pk);
      if (pair.size() != 2) throw ConfigError(pk, "expected [x, alpha]");
      c.alpha_profile.emplace_back(pair[0], pair[1]);
    }
  }
  r.number("eta0", c.eta0);
  r.numbers("gamma_eta", c.gamma_eta);
  r.numbers("gamma_mu", c.gamma_mu);
  r.number("xi_max", c.xi_max);
  if (const json* v = r.get("table_policy")) {
    const std::string p = r.path("table_policy");
    if (!v->is_string()) throw ConfigError(p, "expected \"renormalize\" or \"strict\"");
    const auto s = v->get<std::string>();
    if (s != "renormalize" && s != "strict") throw ConfigError(p, "expected \"renormalize\" or \"strict\"");
    c.strict_table = s == "strict";
  }
  if (const json* v = r.get("external_action")) {
    if (v->is_null()) {
      c.external_action.reset();
    } else {
      ObjectReader e(*v, r.path("external_action"));
      ExternalAction act;
      e.numbers("target", act.target);
      e.number("x_begin", act.x_begin);
      e.number("x_end", act.x_end);
      e.finish();
      c.external_action = act;
    }
  }
  r.finish();
}

void parse_numerics(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "numerics");
  r.number("dt", c.dt);
  r.number("t_end", c.t_end);
  r.number("cfl", c.cfl);
  r.integer("cells", c.cells);
  r.string("limiter", c.limiter);
  r.string("splitting", c.splitting);
  r.number("source_positivity", c.source_positivity);
  r.optional_number("dt_max", c.dt_max, std::numeric_limits<double>::infinity());
  r.numbers("snapshot_times", c.snapshot_times);
  r.number("steady_tol", c.steady_tol);
  r.number("t_max", c.t_max);
  r.string("time_unit", c.time_unit);
  r.integer("sample_stride", c.sample_stride);
  r.number("sample_interval", c.sample_interval);
  r.finish();
}

void parse_initial(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "initial");
  if (const json* v = r.get("rho")) {
    const std::string p = r.path("rho");
    if (v->is_object()) {
      ObjectReader g(*v, p);
      double from = 0.0, to = 1.0;
      int count = 0;
      g.number("from", from);
      g.number("to", to);
      g.integer("count", count);
      g.finish();
      if (count < 1) throw ConfigError(p + ".count", "must be >= 1");
      c.rho_values.clear();
      for (int k = 0; k < count; ++k) {
        c.rho_values.push_back(count == 1 ? from : from + (to - from) * k / (count - 1));
      }
    } else {
      c.rho_values = ObjectReader::as_numbers(*v, p);
    }
  }
  if (const json* v = r.get("splits")) {
    const std::string p = r.path("splits");
    if (!v->is_array() || v->empty()) throw ConfigError(p, "expected a non-empty array");
    c.splits.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string pk = p + "[" + std::to_string(k) + "]";
      const json& s = (*v)[k];
      if (s.is_string()) {
        c.splits.push_back(split_from_name(s.get<std::string>(), pk));
      } else {
        c.splits.push_back({"custom" + std::to_string(k), InitPolicy::kCustom,
                            ObjectReader::as_numbers(s, pk)});
      }
    }
  }
  r.string("profile", c.profile);
  r.finish();
}

void parse_audit(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "audit");
  r.numbers("load_levels", c.load_levels);
  r.integer("random_contexts", c.random_contexts);
  r.finish();
}

void parse_output(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "output");
  r.string("dir", c.out_dir);
  r.finish();
}

json splits_to_json(const std::vector<InitialSplit>& splits) {
  json arr = json::array();
  for (const auto& s : splits) {
    if (s.policy == InitPolicy::kCustom) {
      arr.push_back(s.lane_densities);
    } else {
      arr.push_back(s.name);
    }
  }
  return arr;
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text, const ScenarioConfig& base) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ScenarioConfig c = base;
  ObjectReader r(j, "");
  r.string("mode", c.mode);
  if (const json* v = r.get("seed")) {
    if (!v->is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  r.integer("workers", c.workers);
  if (const json* v = r.get("model")) parse_model(*v, c);
  if (const json* v = r.get("numerics")) parse_numerics(*v, c);
  if (const json* v = r.get("initial")) parse_initial(*v, c);
  if (const json* v = r.get("audit")) parse_audit(*v, c);
  if (const json* v = r.get("output")) parse_output(*v, c);
  r.finish();
  return c;
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
  json j;
  j["mode"] = c.mode;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  json m;
  m["classes"] = c.classes;
  m["lanes"] = c.lanes;
  m["alpha"] = c.alphas;
  json prof = json::array();
  for (const auto& [x, a] : c.alpha_profile) prof.push_back({x, a});
  m["alpha_profile"] = prof;
  m["eta0"] = c.eta0;
  m["gamma_eta"] = c.gamma_eta;
  m["gamma_mu"] = c.gamma_mu;
  m["xi_max"] = c.xi_max;
  m["table_policy"] = c.strict_table ? "strict" : "renormalize";
  if (c.external_action) {
    m["external_action"] = {{"target", c.external_action->target},
                            {"x_begin", c.external_action->x_begin},
                            {"x_end", c.external_action->x_end}};
  } else {
    m["external_action"] = nullptr;
  }
  j["model"] = m;
  json n;
  n["dt"] = c.dt;
  n["t_end"] = c.t_end;
  n["cfl"] = c.cfl;
  n["cells"] = c.cells;
  n["limiter"] = c.limiter;
  n["splitting"] = c.splitting;
  n["source_positivity"] = c.source_positivity;
  if (std::isfinite(c.dt_max)) {
    n["dt_max"] = c.dt_max;
  } else {
    n["dt_max"] = nullptr;
  }
  n["snapshot_times"] = c.snapshot_times;
  n["steady_tol"] = c.steady_tol;
  n["t_max"] = c.t_max;
  n["time_unit"] = c.time_unit;
  n["sample_stride"] = c.sample_stride;
  n["sample_interval"] = c.sample_interval;
  j["numerics"] = n;
  j["initial"] = {{"rho", c.rho_values}, {"splits", splits_to_json(c.splits)}, {"profile", c.profile}};
  j["audit"] = {{"load_levels", c.load_levels}, {"random_contexts", c.random_contexts}};
  j["output"] = {{"dir", c.out_dir}};
  return j.dump(indent);
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() { return {"paper-diagram", "paper-relax", "paper-clusters"}; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "paper-diagram") {
    c.mode = "diagram";
    c.alphas = {0.95, 0.6, 0.3};
    c.rho_values.clear();
    for (int k = 1; k <= 50; ++k) c.rho_values.push_back(0.02 * k);
    // Steady states are approached at a rate proportional to rho, so the
    // search runs in interaction time units.
    c.time_unit = "interaction";
    c.dt = 0.1;
    c.t_max = 2000.0;
    c.steady_tol = 1e-9;
    c.out_dir = "out/paper-diagram";
  } else if (name == "paper-relax") {
    c.mode = "relax";
    c.alphas = {0.2, 0.6};
    c.rho_values = {0.2, 0.4, 0.6};
    c.splits = {{"slowest", InitPolicy::kSlowestFirst, {}},
                {"equal", InitPolicy::kEqualSplit, {}},
                {"fastest", InitPolicy::kFastestFirst, {}}};
    c.dt = 0.05;
    c.t_max = 20000.0;
    c.steady_tol = 1e-9;
    c.sample_interval = 5.0;
    c.out_dir = "out/paper-relax";
  } else if (name == "paper-clusters") {
    c.mode = "clusters";
    c.lanes = 2;
    c.classes = 6;
    c.alphas = {0.95, 0.3};
    c.cells = 200;
    c.t_end = 1.61;
    c.snapshot_times = {0.01, 0.35, 1.61};
    c.profile = "clusters";
    c.out_dir = "out/paper-clusters";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("--preset", "unknown preset '" + std::string(name) + "' (" + known + ")");
  }
  return c;
}

// ------------------------------------------------------------- validation

void validate(const ScenarioConfig& c) {
  static const std::set<std::string> modes{"homogeneous", "diagram", "relax",
                                           "inhomogeneous", "clusters", "audit"};
  if (!modes.count(c.mode)) throw ConfigError("mode", "unknown mode '" + c.mode + "'");
  if (c.workers < 1) throw ConfigError("workers", "must be >= 1");
  if (c.classes < 2) throw ConfigError("model.classes", "must be >= 2");
  if (c.lanes < 2) throw ConfigError("model.lanes", "must be >= 2");
  if (c.alphas.empty()) throw ConfigError("model.alpha", "needs at least one value");
  for (std::size_t k = 0; k < c.alphas.size(); ++k) {
    if (!(c.alphas[k] >= 0.0 && c.alphas[k] <= 1.0)) {
      throw ConfigError("model.alpha[" + std::to_string(k) + "]", "must lie in [0, 1]");
    }
  }
  for (std::size_t k = 0; k < c.alpha_profile.size(); ++k) {
    const auto [x, a] = c.alpha_profile[k];
    const std::string p = "model.alpha_profile[" + std::to_string(k) + "]";
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(p, "alpha must lie in [0, 1]");
    if (k > 0 && !(x > c.alpha_profile[k - 1].first)) throw ConfigError(p, "x must increase");
  }
  if (!(c.eta0 >= 0.0)) throw ConfigError("model.eta0", "must be >= 0");
  auto lane_vector = [&](const std::vector<double>& v, const std::string& p) {
    if (!v.empty() && v.size() != static_cast<std::size_t>(c.lanes)) {
      throw ConfigError(p, "needs one value per lane (" + std::to_string(c.lanes) + ")");
    }
    for (double g : v) {
      if (!(g >= 0.0)) throw ConfigError(p, "must be >= 0");
    }
  };
  lane_vector(c.gamma_eta, "model.gamma_eta");
  lane_vector(c.gamma_mu, "model.gamma_mu");
  if (!(c.xi_max > 0.0 && c.xi_max <= 1.0)) throw ConfigError("model.xi_max", "must lie in (0, 1]");
  if (c.external_action) {
    if (c.external_action->target.size() != static_cast<std::size_t>(c.lanes * c.classes)) {
      throw ConfigError("model.external_action.target", "needs lanes * classes values");
    }
    if (!(c.external_action->x_begin < c.external_action->x_end)) {
      throw ConfigError("model.external_action.x_end", "must exceed x_begin");
    }
  }
  if (!(c.dt > 0.0)) throw ConfigError("numerics.dt", "must be positive");
  if (!(c.t_end >= 0.0)) throw ConfigError("numerics.t_end", "must be >= 0");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("numerics.cfl", "must lie in (0, 1]");
  if (c.cells < 3) throw ConfigError("numerics.cells", "must be >= 3");
  if (c.limiter != "minmod" && c.limiter != "none") {
    throw ConfigError("numerics.limiter", "expected \"minmod\" or \"none\"");
  }
  if (c.splitting != "strang" && c.splitting != "lie") {
    throw ConfigError("numerics.splitting", "expected \"strang\" or \"lie\"");
  }
  if (!(c.source_positivity > 0.0 && c.source_positivity <= 1.0)) {
    throw ConfigError("numerics.source_positivity", "must lie in (0, 1]");
  }
  if (!(c.dt_max > 0.0)) throw ConfigError("numerics.dt_max", "must be positive");
  for (double t : c.snapshot_times) {
    if (!(t >= 0.0)) throw ConfigError("numerics.snapshot_times", "times must be >= 0");
  }
  if (!(c.steady_tol > 0.0)) throw ConfigError("numerics.steady_tol", "must be positive");
  if (!(c.t_max > 0.0)) throw ConfigError("numerics.t_max", "must be positive");
  if (c.time_unit != "physical" && c.time_unit != "interaction") {
    throw ConfigError("numerics.time_unit", "expected \"physical\" or \"interaction\"");
  }
  if (c.sample_stride < 1) throw ConfigError("numerics.sample_stride", "must be >= 1");
  if (!(c.sample_interval >= 0.0)) throw ConfigError("numerics.sample_interval", "must be >= 0");
  if (c.rho_values.empty()) throw ConfigError("initial.rho", "needs at least one value");
  for (std::size_t k = 0; k < c.rho_values.size(); ++k) {
    if (!(c.rho_values[k] >= 0.0 && c.rho_values[k] <= 1.0)) {
      throw ConfigError("initial.rho[" + std::to_string(k) + "]", "must lie in [0, 1]");
    }
  }
  for (std::size_t k = 0; k < c.splits.size(); ++k) {
    const auto& s = c.splits[k];
    if (s.policy != InitPolicy::kCustom) continue;
    const std::string p = "initial.splits[" + std::to_string(k) + "]";
    if (s.lane_densities.size() != static_cast<std::size_t>(c.lanes)) {
      throw ConfigError(p, "needs one density per lane");
    }
    for (double v : s.lane_densities) {
      if (!(v >= 0.0 && v <= 1.0 / c.lanes + 1e-12)) throw ConfigError(p, "lane densities must lie in [0, 1/L]");
    }
  }
  if (c.splits.empty()) throw ConfigError("initial.splits", "needs at least one split");
  if (c.profile != "uniform" && c.profile != "perturbed" && c.profile != "clusters") {
    throw ConfigError("initial.profile", "expected \"uniform\", \"perturbed\" or \"clusters\"");
  }
  if ((c.mode == "clusters" || c.profile == "clusters") && (c.lanes != 2 || c.classes != 6)) {
    throw ConfigError("model.lanes", "the cluster scenario needs 2 lanes and 6 classes");
  }
  if (c.load_levels.empty()) throw ConfigError("audit.load_levels", "needs at least one value");
  for (double v : c.load_levels) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("audit.load_levels", "loads must lie in [0, 1]");
  }
  if (c.random_contexts < 0) throw ConfigError("audit.random_contexts", "must be >= 0");
}

ModelParams model_params(const ScenarioConfig& c, double alpha) {
  ModelParams p = ModelParams::defaults(c.lanes, alpha);
  p.eta0 = c.eta0;
  if (!c.gamma_eta.empty()) p.gamma_eta = c.gamma_eta;
  if (!c.gamma_mu.empty()) p.gamma_mu = c.gamma_mu;
  p.xi_max = c.xi_max;
  p.policy = c.strict_table ? TablePolicy::kStrict : TablePolicy::kRenormalize;
  p.external_action = c.external_action;
  if (!c.alpha_profile.empty()) {
    // Piecewise linear through the knots, constant beyond the ends.
    p.alpha_profile = [knots = c.alpha_profile](double x) {
      if (x <= knots.front().first) return knots.front().second;
      for (std::size_t k = 1; k < knots.size(); ++k) {
        if (x <= knots[k].first) {
          const auto [x0, a0] = knots[k - 1];
          const auto [x1, a1] = knots[k];
          return a0 + (a1 - a0) * (x - x0) / (x1 - x0);
        }
      }
      return knots.back().second;
    };
  }
  return p;
}

// ------------------------------------------------------------------ running

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

class Writer {
 public:
  explicit Writer(const ScenarioConfig& c) : dir_(c.out_dir) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw ConfigError("output.dir", "cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
    return out;
  }

  const std::filesystem::path& dir() const { return dir_; }
  std::vector<std::string>& files() { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string run_tag(const ScenarioConfig& c, double alpha, double rho, const InitialSplit& s) {
  std::string t = "alpha" + tag(alpha) + "_rho" + tag(rho);
  if (c.splits.size() > 1) t += "_" + s.name;
  return t;
}

KineticField initial_block(const ScenarioConfig& c, double rho, const InitialSplit& s) {
  return initial_state(rho, c.lanes, c.classes, s.policy, s.lane_densities);
}

void run_homogeneous(const ScenarioConfig& c, Writer& w) {
  for (double alpha : c.alphas) {
    const ModelParams p = model_params(c, alpha);
    for (double rho : c.rho_values) {
      for (const auto& s : c.splits) {
        const Trajectory tr = integrate({initial_block(c, rho, s), 0.0}, p, {c.dt, c.t_end, c.sample_stride});
        auto out = w.open("trajectory_" + run_tag(c, alpha, rho, s) + ".csv");
        out << "t,lane,class,f\n";
        for (const auto& st : tr.samples) {
          for (int l = 0; l < c.lanes; ++l) {
            for (int i = 0; i < c.classes; ++i) {
              out << num(st.t) << ',' << l + 1 << ',' << i + 1 << ',' << num(st.f(l, i)) << '\n';
            }
          }
        }
      }
    }
  }
}

SteadyOptions steady_options(const ScenarioConfig& c) {
  SteadyOptions o;
  o.steady_tol = c.steady_tol;
  o.t_max = c.t_max;
  o.dt = c.dt;
  o.time_unit = c.time_unit == "interaction" ? TimeUnit::kInteraction : TimeUnit::kPhysical;
  return o;
}

void run_diagram(const ScenarioConfig& c, Writer& w) {
  for (double alpha : c.alphas) {
    SweepSpec spec;
    spec.rho_values = c.rho_values;
    spec.alpha = alpha;
    spec.init_policy = c.splits.front().policy;
    spec.classes = c.classes;
    spec.lanes = c.lanes;
    spec.steady = steady_options(c);
    spec.workers = c.workers;
    if (spec.init_policy == InitPolicy::kCustom) {
      throw ConfigError("initial.splits[0]", "diagram sweeps need equal, slowest or fastest");
    }
    const auto rows = fundamental_diagram(spec, model_params(c, alpha));
    auto out = w.open("diagram_alpha" + tag(alpha) + ".csv");
    out << "rho,lane,q,U,Theta,alpha,status\n";
    for (const auto& r : rows) {
      out << num(r.rho) << ',' << (r.lane < 0 ? std::string("all") : std::to_string(r.lane + 1)) << ','
          << num(r.q) << ',' << opt(r.U) << ',' << opt(r.Theta) << ',' << num(r.alpha) << ','
          << r.status << '\n';
    }
  }
}

void run_relax(const ScenarioConfig& c, Writer& w) {
  const VelocityGrid grid(c.classes);
  auto summary = w.open("relax_summary.csv");
  summary << "alpha,rho,split,lane,rho_lane,q,U,status,t_steady,residual\n";
  SteadyOptions o = steady_options(c);
  o.sample_interval = c.sample_interval;
  for (double alpha : c.alphas) {
    const ModelParams p = model_params(c, alpha);
    for (double rho : c.rho_values) {
      for (const auto& s : c.splits) {
        const SteadyResult res = steady_state({initial_block(c, rho, s), 0.0}, p, o);
        const std::string name = "relax_alpha" + tag(alpha) + "_rho" + tag(rho) + "_" + s.name + ".csv";
        auto out = w.open(name);
        out << "t,lane,rho\n";
        for (const auto& st : res.samples) {
          for (int l = 0; l < c.lanes; ++l) out << num(st.t) << ',' << l + 1 << ',' << num(st.f.lane_density(l)) << '\n';
        }
        const Macroscopics m = macroscopics(res.state.f, grid);
        const std::string status = res.converged ? "converged" : "timeout";
        for (int l = 0; l <= c.lanes; ++l) {
          const bool global = l == c.lanes;
          const LaneMoments lm = global ? LaneMoments{m.rho, m.q, m.U, m.Theta} : m.lanes[static_cast<std::size_t>(l)];
          summary << num(alpha) << ',' << num(rho) << ',' << s.name << ','
                  << (global ? std::string("all") : std::to_string(l + 1)) << ',' << num(lm.rho) << ','
                  << num(lm.q) << ',' << opt(lm.U) << ',' << status << ',' << num(res.state.t) << ','
                  << num(res.residual) << '\n';
        }
      }
    }
  }
}

SchemeConfig scheme_config(const ScenarioConfig& c) {
  SchemeConfig s;
  s.cfl = c.cfl;
  s.limiter = c.limiter == "none" ? Limiter::kNone : Limiter::kMinmod;
  s.splitting = c.splitting == "lie" ? Splitting::kLie : Splitting::kStrang;
  s.source_positivity = c.source_positivity;
  s.dt_max = c.dt_max;
  return s;
}

void write_spatial(const std::string& suffix, const SpatialRun& run, int lanes, int classes, Writer& w) {
  const VelocityGrid grid(classes);
  auto snap = w.open("snapshots_" + suffix + ".csv");
  auto macro = w.open("macro_" + suffix + ".csv");
  snap << "t,x,lane,class,f\n";
  macro << "t,x,lane,rho,q,U\n";
  std::vector<double> block(static_cast<std::size_t>(classes));
  for (const auto& f : run.snapshots) {
    for (int c = 0; c < f.cells(); ++c) {
      const std::string tx = num(f.t) + ',' + num(f.cell_center(c)) + ',';
      for (int l = 0; l < lanes; ++l) {
        for (int i = 0; i < classes; ++i) {
          block[static_cast<std::size_t>(i)] = f(l, i, c);
          snap << tx << l + 1 << ',' << i + 1 << ',' << num(f(l, i, c)) << '\n';
        }
        const LaneMoments m = lane_moments(block, grid);
        macro << tx << l + 1 << ',' << num(m.rho) << ',' << num(m.q) << ',' << opt(m.U) << '\n';
      }
    }
  }
  auto mass = w.open("lane_mass_" + suffix + ".csv");
  mass << "t,lane,mass\n";
  for (std::size_t k = 0; k < run.step_times.size(); ++k) {
    for (int l = 0; l < lanes; ++l) {
      mass << num(run.step_times[k]) << ',' << l + 1 << ',' << num(run.lane_masses[k][static_cast<std::size_t>(l)]) << '\n';
    }
  }
}

SpatialField spatial_initial(const ScenarioConfig& c, double rho, const InitialSplit& s) {
  if (c.profile == "clusters") return cluster_initial_data(c.cells);
  SpatialField f = SpatialField::uniform(initial_block(c, rho, s), c.cells);
  if (c.profile == "perturbed") {
    for (int l = 0; l < c.lanes; ++l) {
      for (int i = 0; i < c.classes; ++i) {
        auto prof = f.profile(l, i);
        for (int k = 0; k < c.cells; ++k) {
          // Cell average of 1 + 0.5 sin(2 pi x).
          const double a = static_cast<double>(k) / c.cells;
          const double b = static_cast<double>(k + 1) / c.cells;
          const double avg = 1.0 + 0.5 * (std::cos(2.0 * std::numbers::pi * a) - std::cos(2.0 * std::numbers::pi * b)) /
                                       (2.0 * std::numbers::pi * (b - a));
          prof[static_cast<std::size_t>(k)] *= avg;
        }
      }
    }
  }
  return f;
}

void run_inhomogeneous(const ScenarioConfig& c, Writer& w) {
  for (double alpha : c.alphas) {
    const ModelParams p = model_params(c, alpha);
    for (double rho : c.rho_values) {
      for (const auto& s : c.splits) {
        const SpatialRun run = integrate_spatial(spatial_initial(c, rho, s), p,
                                                 {c.t_end, c.snapshot_times, scheme_config(c)});
        write_spatial(run_tag(c, alpha, rho, s), run, c.lanes, c.classes, w);
      }
    }
  }
}

void run_clusters(const ScenarioConfig& c, Writer& w) {
  for (double alpha : c.alphas) {
    const ClustersResult res = run_clusters_scenario(alpha, c.cells, c.t_end, c.snapshot_times,
                                                     model_params(c, alpha), scheme_config(c));
    const std::string suffix = "alpha" + tag(alpha);
    write_spatial(suffix, res.run, c.lanes, c.classes, w);
    auto peaks = w.open("peaks_" + suffix + ".csv");
    peaks << "t,fast_peak,slow_peak\n";
    for (std::size_t k = 0; k < res.fast_peak.size(); ++k) {
      peaks << num(res.run.step_times[k]) << ',' << num(res.fast_peak[k]) << ',' << num(res.slow_peak[k]) << '\n';
    }
  }
}

void run_audit(const ScenarioConfig& c, Writer& w) {
  AuditGrid grid;
  grid.classes = c.classes;
  grid.lanes = c.lanes;
  grid.alphas = c.alphas;
  grid.load_levels = c.load_levels;
  const AuditReport rep = audit_table(grid);
  {
    auto out = w.open("audit.csv");
    write_audit_csv(rep, out);
  }
  {
    auto out = w.open("audit_summary.csv");
    write_audit_summary_csv(rep, out);
  }
  const auto dual = validation::dual_implementation_check(c.classes, c.lanes, c.random_contexts, c.seed);
  auto out = w.open("audit_report.csv");
  out << "metric,value\n";
  out << "rows," << rep.findings.size() << '\n';
  out << "max_deviation," << num(rep.max_deviation) << '\n';
  out << "defective_rows," << rep.defective_rows << '\n';
  out << "negative_entries," << rep.negative_entries << '\n';
  out << "coverage," << num(rep.coverage()) << '\n';
  out << "dual_contexts," << dual.contexts << '\n';
  out << "dual_max_sum_discrepancy," << num(dual.max_sum_discrepancy) << '\n';
  out << "dual_max_entry_discrepancy," << num(dual.max_entry_discrepancy) << '\n';
  out << "dual_lane_violations," << dual.lane_violations << '\n';
}

}  // namespace

RunSummary run(const ScenarioConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  Writer w(config);
  if (config.mode == "homogeneous") {
    run_homogeneous(config, w);
  } else if (config.mode == "diagram") {
    run_diagram(config, w);
  } else if (config.mode == "relax") {
    run_relax(config, w);
  } else if (config.mode == "inhomogeneous") {
    run_inhomogeneous(config, w);
  } else if (config.mode == "clusters") {
    run_clusters(config, w);
  } else {
    run_audit(config, w);
  }
  RunSummary summary;
  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["version"] = LANEKIN_VERSION;
  manifest["seed"] = config.seed;
  manifest["wall_time_s"] = summary.wall_time_s;
  manifest["files"] = w.files();
  manifest["config"] = json::parse(config_to_json(config));
  {
    std::ofstream out(w.dir() / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  summary.files = w.files();
  summary.files.push_back("manifest.json");
  return summary;
}

}  // namespace lanekin
