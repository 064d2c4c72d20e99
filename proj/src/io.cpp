#include "ringmodel/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace ringmodel {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError(where + "." + key + ": must be finite");
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

template <class E>
E enum_from(const json& j, const char* key, E cur, E (*parse)(const std::string&),
            const std::string& where) {
  if (!j.contains(key)) return cur;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  try {
    return parse(j.at(key).get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

JacobianMode jacobian_mode_from_string(const std::string& s) {
  if (s == "finite_difference") return JacobianMode::finite_difference;
  if (s == "analytic") return JacobianMode::analytic;
  throw std::invalid_argument("unknown jacobian mode '" + s + "'");
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : traj.states.front().n_modes();
  os << "t,v0";
  for (int k = 1; k <= n; ++k) os << ",re_z" << k << ",im_z" << k;
  os << ",peak_angle\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const CortexState& s = traj.states[i];
    os << fmt(traj.times[i]) << ',' << fmt(s.v0);
    for (const Complex& z : s.z) os << ',' << fmt(z.real()) << ',' << fmt(z.imag());
    os << ',' << fmt(peak_angle(s)) << '\n';
  }
}

void write_branch_csv(std::ostream& os, const Branch& branch) {
  os << "step";
  for (const auto& p : branch.param_names) os << ',' << p;
  for (const auto& s : branch.state_names) os << ',' << s;
  os << ",n_unstable,is_fold\n";
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& p = branch.points[i];
    os << i;
    for (double v : p.params) os << ',' << fmt(v);
    for (Eigen::Index k = 0; k < p.state.size(); ++k) os << ',' << fmt(p.state(k));
    os << ',' << p.n_unstable << ',' << (p.is_fold() ? 1 : 0) << '\n';
  }
}

json branch_sidecar(const Branch& branch) {
  json j;
  j["param_names"] = branch.param_names;
  j["state_names"] = branch.state_names;
  j["n_points"] = branch.points.size();
  j["termination"] = branch.termination;
  json sp = json::array();
  for (const auto& s : branch.special_points)
    sp.push_back({{"index", s.index}, {"kind", to_string(s.kind)}, {"params", s.params}});
  j["special_points"] = sp;
  return j;
}

void write_boundary_csv(std::ostream& os, const std::vector<ThresholdBoundary>& boundaries) {
  os << "theta,j1_min,eps0\n";
  for (const auto& b : boundaries)
    for (const auto& [theta, j1] : b.samples)
      if (std::isfinite(j1)) os << fmt(theta) << ',' << fmt(j1) << ',' << b.eps0 << '\n';
}

CsvTable read_csv_strict(std::istream& is, const std::vector<std::string>& expected) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: empty input");
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) t.columns.push_back(c);
  }
  if (!expected.empty() && t.columns != expected) throw ConfigError("csv: unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw ConfigError("csv: non-numeric cell '" + c + "'");
      }
      if (used != c.size() || !std::isfinite(v)) throw ConfigError("csv: bad cell '" + c + "'");
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) throw ConfigError("csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

json to_json(const ModelSpec& s) {
  return {{"n_modes", s.n_modes},         {"j0_sign", s.j0_sign},
          {"j_weights", s.j_weights},     {"gain", s.gain},
          {"threshold", s.threshold},     {"time_constant", s.time_constant},
          {"homotopy_mu", s.homotopy_mu}, {"sigmoid", to_string(s.sigmoid)},
          {"quadrature_order", s.quadrature_order}};
}

json to_json(const DriveSpec& d) {
  return {{"beta", d.beta}, {"x0", d.x0}, {"epsilon", d.epsilon},
          {"second_mode_ratio", d.second_mode_ratio}};
}

json to_json(const ContinuationConfig& c) {
  return {{"ds", c.ds},
          {"ds_min", c.ds_min},
          {"ds_max", c.ds_max},
          {"newton_tol", c.newton_tol},
          {"newton_max_iters", c.newton_max_iters},
          {"max_steps", c.max_steps},
          {"jacobian", c.jacobian == JacobianMode::analytic ? "analytic" : "finite_difference"},
          {"fd_step", c.fd_step},
          {"special_tol", c.special_tol},
          {"max_turn", c.max_turn},
          {"growth", c.growth}};
}

json to_json(const Scenario& s) {
  return {{"kind", to_string(s.kind)},
          {"beta", s.beta},
          {"epsilon", s.epsilon},
          {"angle_a", s.angle_a},
          {"angle_b", s.angle_b},
          {"final_angle", s.final_angle},
          {"angle_offset", s.angle_offset},
          {"ramp_start", s.ramp_start},
          {"ramp_duration", s.ramp_duration},
          {"switch_time", s.switch_time},
          {"t_end", s.t_end},
          {"dt", s.dt},
          {"sample_every", s.sample_every},
          {"initial", to_string(s.initial)},
          {"preflight", s.preflight}};
}

ModelSpec model_from_json(const json& j, ModelSpec s) {
  const std::string w = "model";
  check_keys(j, {"n_modes", "j0_sign", "j_weights", "gain", "threshold", "time_constant",
                 "homotopy_mu", "sigmoid", "quadrature_order"},
             w);
  read(j, "n_modes", s.n_modes, w);
  read(j, "j0_sign", s.j0_sign, w);
  read(j, "j_weights", s.j_weights, w);
  read(j, "gain", s.gain, w);
  read(j, "threshold", s.threshold, w);
  read(j, "time_constant", s.time_constant, w);
  read(j, "homotopy_mu", s.homotopy_mu, w);
  read(j, "quadrature_order", s.quadrature_order, w);
  s.sigmoid = enum_from(j, "sigmoid", s.sigmoid, &sigmoid_kind_from_string, w);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return s;
}

DriveSpec drive_from_json(const json& j, DriveSpec d) {
  const std::string w = "stimulus";
  check_keys(j, {"beta", "x0", "epsilon", "second_mode_ratio"}, w);
  read(j, "beta", d.beta, w);
  read(j, "x0", d.x0, w);
  read(j, "epsilon", d.epsilon, w);
  read(j, "second_mode_ratio", d.second_mode_ratio, w);
  if (!(d.beta >= 0.0 && d.beta <= 1.0)) throw ConfigError("stimulus.beta must lie in [0, 1]");
  if (!(d.epsilon >= 0.0)) throw ConfigError("stimulus.epsilon must be >= 0");
  return d;
}

ContinuationConfig continuation_from_json(const json& j, ContinuationConfig c) {
  const std::string w = "continuation";
  check_keys(j, {"ds", "ds_min", "ds_max", "newton_tol", "newton_max_iters", "max_steps", "jacobian",
                 "fd_step", "special_tol", "max_turn", "growth"},
             w);
  read(j, "ds", c.ds, w);
  read(j, "ds_min", c.ds_min, w);
  read(j, "ds_max", c.ds_max, w);
  read(j, "newton_tol", c.newton_tol, w);
  read(j, "newton_max_iters", c.newton_max_iters, w);
  read(j, "max_steps", c.max_steps, w);
  read(j, "fd_step", c.fd_step, w);
  read(j, "special_tol", c.special_tol, w);
  read(j, "max_turn", c.max_turn, w);
  read(j, "growth", c.growth, w);
  c.jacobian = enum_from(j, "jacobian", c.jacobian, &jacobian_mode_from_string, w);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("continuation: ") + e.what());
  }
  return c;
}

Scenario scenario_from_json(const json& j, Scenario s) {
  const std::string w = "scenario";
  check_keys(j, {"kind", "beta", "epsilon", "angle_a", "angle_b", "final_angle", "angle_offset",
                 "ramp_start", "ramp_duration", "switch_time", "t_end", "dt", "sample_every",
                 "initial", "preflight"},
             w);
  if (j.contains("kind")) {
    // Switching kind resets the timeline to that protocol's defaults.
    const ScenarioKind k = enum_from(j, "kind", s.kind, &scenario_kind_from_string, w);
    if (k != s.kind) {
      const ModelSpec spec = s.spec;
      s = k == ScenarioKind::mixture ? Scenario::mixture_default() : Scenario::rotate_default();
      s.kind = k;
      s.spec = spec;
    }
  }
  read(j, "beta", s.beta, w);
  read(j, "epsilon", s.epsilon, w);
  read(j, "angle_a", s.angle_a, w);
  read(j, "angle_b", s.angle_b, w);
  read(j, "final_angle", s.final_angle, w);
  read(j, "angle_offset", s.angle_offset, w);
  read(j, "ramp_start", s.ramp_start, w);
  read(j, "ramp_duration", s.ramp_duration, w);
  read(j, "switch_time", s.switch_time, w);
  read(j, "t_end", s.t_end, w);
  read(j, "dt", s.dt, w);
  read(j, "sample_every", s.sample_every, w);
  read(j, "preflight", s.preflight, w);
  s.initial = enum_from(j, "initial", s.initial, &initial_condition_from_string, w);
  if (s.initial == InitialCondition::custom)
    throw ConfigError("scenario.initial: custom states are only available through the library");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

json to_json(const OrbitInvariants& inv) {
  json j;
  j["variables"] = {"lambda", "v0", "pi1", "pi2", "pi3"};
  j["degree"] = inv.degree;
  j["alpha"] = inv.alpha;
  j["fit_error"] = inv.fit_error;
  j["j0_sign"] = inv.j0_sign;
  j["j_weights"] = inv.j_weights;
  auto poly = [](const InvariantPoly& p) {
    json terms = json::array();
    for (const auto& [k, v] : p.terms)
      terms.push_back({{"exponents", k}, {"coefficient", v}});
    return terms;
  };
  j["b0"] = poly(inv.b0);
  j["a"] = poly(inv.a);
  j["b"] = poly(inv.b);
  j["c"] = poly(inv.c);
  j["d"] = poly(inv.d);
  return j;
}

OrbitInvariants invariants_from_json(const json& j) {
  const std::string w = "invariants";
  check_keys(j, {"variables", "degree", "alpha", "fit_error", "j0_sign", "j_weights", "b0", "a", "b",
                 "c", "d"},
             w);
  OrbitInvariants inv;
  read(j, "degree", inv.degree, w);
  read(j, "alpha", inv.alpha, w);
  read(j, "fit_error", inv.fit_error, w);
  read(j, "j0_sign", inv.j0_sign, w);
  std::vector<double> jw;
  read(j, "j_weights", jw, w);
  if (jw.size() != 2) throw ConfigError("invariants.j_weights: expected two entries");
  inv.j_weights = {jw[0], jw[1]};
  auto poly = [&](const char* key, InvariantPoly& p) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(w + "." + key + ": missing");
    for (const auto& t : j.at(key)) {
      check_keys(t, {"exponents", "coefficient"}, w + "." + key);
      try {
        p.add(t.at("exponents").get<std::array<int, 5>>(), t.at("coefficient").get<double>());
      } catch (const json::exception&) {
        throw ConfigError(w + "." + key + ": malformed term");
      }
    }
  };
  poly("b0", inv.b0);
  poly("a", inv.a);
  poly("b", inv.b);
  poly("c", inv.c);
  poly("d", inv.d);
  return inv;
}

json to_json(const OutcomeReport& r) {
  return {{"kind", to_string(r.kind)},
          {"final_peak_angle", r.final_peak_angle},
          {"final_stimulus_angle", r.final_stimulus_angle},
          {"basin", to_string(r.basin)},
          {"asymptotic_basin", to_string(r.asymptotic_basin)},
          {"illusion_detected", r.illusion_detected},
          {"final_state",
           {{"v0", r.final_state.v0},
            {"re_z1", r.final_state.z.empty() ? 0.0 : r.final_state.z[0].real()},
            {"im_z1", r.final_state.z.empty() ? 0.0 : r.final_state.z[0].imag()}}},
          {"notes", r.notes}};
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.model.gain = 15.0;
  c.stimulus.epsilon = 0.01;
  c.scenario.spec = c.model;
  return c;
}

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, {"model", "stimulus", "continuation", "scenario", "seed"}, "config");
  RunConfig c = defaults();
  if (j.contains("model")) c.model = model_from_json(j.at("model"), c.model);
  if (j.contains("stimulus")) c.stimulus = drive_from_json(j.at("stimulus"), c.stimulus);
  if (j.contains("continuation"))
    c.continuation = continuation_from_json(j.at("continuation"), c.continuation);
  c.scenario.spec = c.model;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), c.scenario);
  read(j, "seed", c.seed, "config");
  return c;
}

json RunConfig::to_json() const {
  return {{"model", ringmodel::to_json(model)},
          {"stimulus", ringmodel::to_json(stimulus)},
          {"continuation", ringmodel::to_json(continuation)},
          {"scenario", ringmodel::to_json(scenario)},
          {"seed", seed}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) { return RunConfig::from_json(read_json(path)); }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setw(2) << j << '\n';
}

json Manifest::to_json() const {
  return {{"command", command}, {"options", options},   {"config", config},
          {"outputs", outputs}, {"status", status}, {"diagnostics", diagnostics}};
}

Manifest Manifest::from_json(const json& j) {
  check_keys(j, {"command", "options", "config", "outputs", "status", "diagnostics"}, "manifest");
  Manifest m;
  read(j, "command", m.command, "manifest");
  if (j.contains("options")) m.options = j.at("options");
  if (j.contains("config")) m.config = j.at("config");
  read(j, "outputs", m.outputs, "manifest");
  read(j, "status", m.status, "manifest");
  if (j.contains("diagnostics")) m.diagnostics = j.at("diagnostics");
  if (m.command.empty()) throw ConfigError("manifest: missing command");
  return m;
}

void write_plot_script(const std::filesystem::path& path, const std::string& kind,
                       const std::vector<std::string>& csv_files, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "import os\nimport sys\nimport pandas as pd\nimport matplotlib\nmatplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n\n"
         "here = os.path.dirname(os.path.abspath(__file__))\nfiles = [";
  for (std::size_t i = 0; i < csv_files.size(); ++i) out << (i ? ", " : "") << "'" << csv_files[i] << "'";
  out << "]\nfig, ax = plt.subplots(figsize=(6, 4))\n";
  if (kind == "branch") {
    out << "for f in files:\n"
           "    d = pd.read_csv(os.path.join(here, f))\n"
           "    x = d.columns[1]\n"
           "    y = d.columns[2 + (len(d.columns) > 5 and d.columns[2] == 'v0')]\n"
           "    st = d['n_unstable'] == 0\n"
           "    ax.plot(d[x].where(st), d[y].where(st), 'k-', lw=1.2)\n"
           "    ax.plot(d[x].where(~st), d[y].where(~st), 'k--', lw=0.8)\n"
           "    fo = d[d['is_fold'] == 1]\n"
           "    ax.plot(fo[x], fo[y], 'ro', ms=4)\n"
           "ax.set_xlabel(x)\nax.set_ylabel(y)\n";
  } else if (kind == "boundary") {
    out << "for f in files:\n"
           "    d = pd.read_csv(os.path.join(here, f))\n"
           "    for e, g in d.groupby('eps0'):\n"
           "        ax.plot(g['theta'], g['j1_min'], 'o-', ms=3, label='eps0=%d' % e)\n"
           "ax.set_xlabel('theta')\nax.set_ylabel('J1')\nax.legend()\n";
  } else if (kind == "trajectory") {
    out << "for f in files:\n"
           "    d = pd.read_csv(os.path.join(here, f))\n"
           "    ax.plot(d['t'], d['peak_angle'], lw=1, label='cortex')\n"
           "    if 'stimulus_angle' in d:\n"
           "        ax.plot(d['t'], d['stimulus_angle'], lw=1, ls='--', label='stimulus')\n"
           "ax.set_xlabel('t')\nax.set_ylabel('orientation (rad)')\nax.legend()\n";
  } else if (kind == "curves") {
    out << "for f in files:\n"
           "    d = pd.read_csv(os.path.join(here, f))\n"
           "    for c in d.columns[1:]:\n"
           "        ax.plot(d[d.columns[0]], d[c], label=c)\n"
           "ax.set_xlabel('x')\nax.set_ylabel('activity')\nax.legend(fontsize=7)\n";
  } else if (kind == "locus") {
    out << "for f in files:\n"
           "    d = pd.read_csv(os.path.join(here, f))\n"
           "    ax.plot(d['epsilon'], d['lambda'], 'k-')\n"
           "ax.set_xlabel('epsilon')\nax.set_ylabel('lambda')\n";
  } else {
    throw std::invalid_argument("unknown plot kind '" + kind + "'");
  }
  out << "ax.set_title('" << title << "')\nfig.tight_layout()\n"
         "fig.savefig(os.path.splitext(os.path.abspath(__file__))[0] + '.png', dpi=150)\n";
}

}  // namespace ringmodel
