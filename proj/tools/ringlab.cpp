// ringlab: command-line driver for the ring model library.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "ringmodel/chebyshev.hpp"
#include "ringmodel/equilibria.hpp"
#include "ringmodel/errors.hpp"
#include "ringmodel/io.hpp"
#include "ringmodel/orbit_space.hpp"
#include "ringmodel/ring1.hpp"
#include "ringmodel/scenarios.hpp"

namespace fs = std::filesystem;
using namespace ringmodel;

namespace {

constexpr double kPi = std::numbers::pi;

struct Context {
  RunConfig cfg;
  json options;
  fs::path out;
  Manifest* manifest;

  template <class T>
  T opt(const char* key, T fallback) const {
    return options.contains(key) ? options.at(key).get<T>() : fallback;
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out / name);
    if (!f) throw std::runtime_error("cannot write '" + (out / name).string() + "'");
    f << std::setprecision(17);
    manifest->outputs.push_back(name);
    return f;
  }

  void json_out(const std::string& name, const json& j) const {
    write_json(out / name, j);
    manifest->outputs.push_back(name);
  }

  void plot(const std::string& name, const std::string& kind, const std::vector<std::string>& csv,
            const std::string& title) const {
    write_plot_script(out / name, kind, csv, title);
    manifest->outputs.push_back(name);
  }
};

bool real_drive(const DriveFrame& f) {
  for (const Complex& c : f.ik)
    if (c.imag() != 0.0) return false;
  return true;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// ---- simulate ----

void cmd_simulate(Context& c) {
  const ModelSpec& spec = c.cfg.model;
  const DriveFrame frame = c.cfg.stimulus.frame(spec);
  const std::string init = c.opt<std::string>("init", "rest");
  CortexState s0 = CortexState::zero(spec.n_modes);
  if (init != "rest") {
    const auto eq = drive_equilibria(spec, frame);
    double scale = 0.0;
    for (const auto& e : eq) scale = std::max(scale, std::abs(e.z[0]));
    const Basin want = init == "tc0" ? Basin::tc0 : init == "tc90" ? Basin::tc90 : Basin::untuned;
    if (init != "tc0" && init != "tc90" && init != "untuned")
      throw ConfigError("simulate: --init must be rest, tc0, tc90 or untuned");
    bool found = false;
    for (const auto& e : eq)
      if (label_state(e, scale, 0.25 * kPi, c.cfg.stimulus.x0) == want) {
        s0 = e;
        found = true;
        break;
      }
    if (!found) throw ConfigError("simulate: no " + init + " equilibrium at these parameters");
  }
  const GalerkinModel model(spec);
  IntegrateOptions io;
  io.sample_every = c.opt<int>("sample_every", 10);
  const Trajectory tr = integrate(model, s0, Stimulus{frame, {}}, c.opt<double>("t_end", 100.0),
                                  c.opt<double>("dt", 0.05), io);
  auto f = c.open("trajectory.csv");
  write_trajectory_csv(f, tr);
  c.plot("trajectory.py", "trajectory", {"trajectory.csv"}, "simulation");
  const CortexState& fin = tr.final_state();
  c.manifest->diagnostics["final_peak_angle"] = peak_angle(fin);
  c.manifest->diagnostics["final_residual"] =
      model.rhs(fin.to_vector(), frame).lpNorm<Eigen::Infinity>();
}

// ---- equilibria ----

void cmd_equilibria(Context& c) {
  const ModelSpec& spec = c.cfg.model;
  const DriveFrame frame = c.cfg.stimulus.frame(spec);
  const auto eq = drive_equilibria(spec, frame);
  const GalerkinModel model(spec);
  const bool sym_ok = real_drive(frame);
  auto f = c.open("equilibria.csv");
  f << "index,v0";
  for (int k = 1; k <= spec.n_modes; ++k) f << ",re_z" << k << ",im_z" << k;
  f << ",n_unstable,n_unstable_symmetric,peak_angle\n";
  double scale = 0.0;
  for (const auto& e : eq) scale = std::max(scale, std::abs(e.z[0]));
  json labels = json::array();
  for (std::size_t i = 0; i < eq.size(); ++i) {
    const CortexState& s = eq[i];
    const int nu = stability(model, s, frame).n_unstable;
    int nus = -1;
    bool in_fix = true;
    for (const Complex& z : s.z) in_fix = in_fix && std::abs(z.imag()) < 1e-10;
    if (sym_ok && in_fix) {
      const EquilibriumProblem p(spec, c.cfg.stimulus, Chart::symmetric);
      const Vec u = p.encode(s);
      const NewtonResult r = solve_equilibrium(p, u);
      if (r.converged()) nus = stability(p, r.x).n_unstable;
    }
    f << i << ',' << fmt(s.v0);
    for (const Complex& z : s.z) f << ',' << fmt(z.real()) << ',' << fmt(z.imag());
    f << ',' << nu << ',' << nus << ',' << fmt(peak_angle(s)) << '\n';
    labels.push_back(to_string(label_state(s, scale, 0.39269908169872414, c.cfg.stimulus.x0)));
  }
  c.manifest->diagnostics["count"] = eq.size();
  c.manifest->diagnostics["labels"] = labels;
}

// ---- continue ----

void write_branch(Context& c, const Branch& b, const std::string& stem) {
  auto f = c.open(stem + ".csv");
  write_branch_csv(f, b);
  json side = branch_sidecar(b);
  side["model"] = to_json(c.cfg.model);
  side["continuation"] = to_json(c.cfg.continuation);
  c.json_out(stem + ".json", side);
}

void continue_polar(Context& c, double lo, double hi, std::vector<std::string>& files) {
  const ModelSpec& spec = c.cfg.model;
  const DriveSpec& d = c.cfg.stimulus;
  int k = 0;
  for (Parity par : {Parity::even, Parity::odd}) {
    // Distinct polar equilibria of this parity at the configured gain.
    std::vector<Vec> roots;
    for (double v0 = -1.0; v0 <= 1.0; v0 += 0.1)
      for (double rho = 0.0; rho <= 1.0; rho += 0.05) {
        const NewtonResult r = solve_polar_equilibrium(par, v0, rho, spec, d.beta, d.epsilon);
        if (!r.converged() || r.x(1) < 0.0) continue;
        bool dup = false;
        for (const Vec& q : roots) dup = dup || (q - r.x).norm() < 1e-6;
        if (!dup) roots.push_back(r.x);
      }
    // Roots on the same family are covered by one continuation.
    std::vector<Branch> done;
    for (const Vec& r : roots) {
      bool covered = false;
      for (const Branch& b : done)
        for (std::size_t i = 1; i < b.points.size(); ++i) {
          const auto& p = b.points[i - 1];
          const auto& q = b.points[i];
          const double a = p.params[0] - spec.gain, e = q.params[0] - spec.gain;
          if (a * e > 0.0 || a == e) continue;
          const double w = a / (a - e);
          covered = covered || ((1.0 - w) * p.state + w * q.state - r.head(2)).norm() < 1e-3;
        }
      if (covered) continue;
      const Branch back = continue_polar_branch(par, r(0), r(1), spec, d.beta, d.epsilon, lo, hi,
                                                c.cfg.continuation, -1);
      const Branch fwd = continue_polar_branch(par, r(0), r(1), spec, d.beta, d.epsilon, lo, hi,
                                               c.cfg.continuation, +1);
      const Branch b = join_branches(back, fwd);
      const std::string stem =
          std::string("branch_") + (par == Parity::even ? "even_" : "odd_") + std::to_string(k++);
      write_branch(c, b, stem);
      files.push_back(stem + ".csv");
      for (const auto* fp : b.folds())
        c.manifest->diagnostics["folds"].push_back({{"branch", stem}, {"lambda", fp->params[0]}});
      done.push_back(b);
    }
  }
}

void cmd_continue(Context& c) {
  const ModelSpec& spec = c.cfg.model;
  const std::string mode = c.opt<std::string>("mode", "auto");
  const Param param = param_from_string(c.opt<std::string>("param", "lambda"));
  const double lo = c.opt<double>("lo", 0.0), hi = c.opt<double>("hi", 20.0);
  if (!(lo < hi)) throw ConfigError("continue: need lo < hi");
  std::vector<std::string> files;

  if (mode == "orbit") {
    if (spec.n_modes != 2) throw ConfigError("continue --mode orbit needs n_modes = 2");
    const ChebyshevFit fit = chebyshev_fit(SigmoidKind::centered, c.opt<double>("alpha", 14.0),
                                           c.opt<double>("max_error", 0.01));
    ModelSpec s = spec;
    s.sigmoid = SigmoidKind::centered;
    const OrbitSystem sys = make_orbit_system(fit, s);
    const OrbitSkeleton sk = orbit_skeleton(sys, lo, hi, c.cfg.continuation);
    write_branch(c, sk.trivial, "orbit_trivial");
    files.push_back("orbit_trivial.csv");
    for (std::size_t i = 0; i < sk.branches.size(); ++i) {
      const std::string stem = "orbit_branch_" + std::to_string(i + 1);
      write_branch(c, sk.branches[i], stem);
      files.push_back(stem + ".csv");
    }
    c.manifest->diagnostics["critical_gains"] = sk.critical_gains;
    c.manifest->diagnostics["critical_modes"] = sk.critical_modes;
    c.manifest->diagnostics["fit_degree"] = fit.degree();
    c.manifest->diagnostics["fit_error"] = fit.max_error;
  } else if (mode == "homotopy") {
    ModelSpec s = spec;
    s.sigmoid = SigmoidKind::homotopy;
    s.homotopy_mu = 0.0;
    const EquilibriumProblem p(s, c.cfg.stimulus, Chart::symmetric);
    const HomotopyResult h = homotopy_start(p, spec.gain, c.cfg.continuation);
    write_branch(c, h.trivial, "homotopy_trivial");
    files.push_back("homotopy_trivial.csv");
    int k = 0;
    for (const auto* set : {&h.switched, &h.mu_branches, &h.contrast_branches}) {
      const char* tag = set == &h.switched ? "switched" : set == &h.mu_branches ? "mu" : "contrast";
      for (const Branch& b : *set) write_branch(c, b, std::string("homotopy_") + tag + "_" + std::to_string(k++));
    }
    json eqs = json::array();
    for (const Vec& u : h.equilibria) eqs.push_back(std::vector<double>(u.data(), u.data() + u.size()));
    c.manifest->diagnostics["critical_gains"] = h.critical_gains;
    c.manifest->diagnostics["equilibria"] = eqs;
    c.manifest->diagnostics["notes"] = h.notes;
  } else if (mode == "auto" || mode == "polar" || mode == "chart") {
    const DriveFrame frame = c.cfg.stimulus.frame(spec);
    const bool polar = spec.n_modes == 1 && param == Param::gain && c.cfg.stimulus.x0 == 0.0 &&
                       spec.sigmoid == SigmoidKind::standard;
    if (mode == "polar" && !polar)
      throw ConfigError("continue --mode polar needs N=1, standard sigmoid, x0=0 and param lambda");
    if (polar && mode != "chart") {
      continue_polar(c, lo, hi, files);
    } else {
      const Chart chart = real_drive(frame) ? Chart::symmetric : Chart::full;
      const EquilibriumProblem p(spec, c.cfg.stimulus, chart);
      const auto eq = enumerate_equilibria(p, seed_grid(p, -1.0, 1.0, -1.0, 1.0, 21));
      int k = 0;
      for (const Vec& u : eq) {
        const Branch back = continue_branch(p, u, param, lo, hi, c.cfg.continuation, -1);
        const Branch fwd = continue_branch(p, u, param, lo, hi, c.cfg.continuation, +1);
        const std::string stem = "branch_" + std::to_string(k++);
        write_branch(c, join_branches(back, fwd), stem);
        files.push_back(stem + ".csv");
      }
      c.manifest->diagnostics["chart"] = to_string(chart);
    }
  } else {
    throw ConfigError("continue: unknown mode '" + mode + "'");
  }
  c.plot("branches.py", "branch", files, "continuation");
}

// ---- fold-locus ----

void cmd_fold_locus(Context& c) {
  const ModelSpec& spec = c.cfg.model;
  if (spec.n_modes != 1) throw ConfigError("fold-locus works on the N=1 model");
  if (c.cfg.stimulus.x0 != 0.0) throw ConfigError("fold-locus needs x0 = 0");
  const EquilibriumProblem p(spec, c.cfg.stimulus, Chart::symmetric);
  const auto eq = enumerate_equilibria(p, seed_grid(p, -1.0, 1.0, -1.0, 1.0, 21));
  // The orthogonal tuned state (most negative z1) sits on the branch with the fold.
  const Vec* start = nullptr;
  for (const Vec& u : eq)
    if (!start || u(1) < (*start)(1)) start = &u;
  if (!start) throw NumericalError("fold-locus: no equilibrium at the configured gain");
  const Branch b = continue_branch(p, *start, Param::gain, 0.0, spec.gain, c.cfg.continuation, -1);
  const auto folds = b.folds();
  if (folds.empty()) throw NumericalError("fold-locus: no fold below the configured gain");
  const BranchPoint seed = *folds.front();
  const FoldLocus fl = fold_locus(p.with(Param::gain, seed.params[0]), seed, c.cfg.continuation,
                                  c.opt<double>("eps_lo", 0.0), c.opt<double>("eps_hi", 0.1),
                                  c.opt<double>("lambda_lo", 0.0), c.opt<double>("lambda_hi", 30.0));
  auto f = c.open("fold_locus.csv");
  f << "epsilon,lambda\n";
  for (const auto& pt : fl.branch.points) f << fmt(pt.params[0]) << ',' << fmt(pt.params[1]) << '\n';
  c.plot("fold_locus.py", "locus", {"fold_locus.csv"}, "fold locus");
  c.manifest->diagnostics["seed_lambda"] = seed.params[0];
  if (fl.lambda_at_zero) c.manifest->diagnostics["lambda_at_zero"] = *fl.lambda_at_zero;
  if (const auto pf = pitchfork_condition(spec.weight_magnitude(1), spec.threshold, spec.j0_sign))
    c.manifest->diagnostics["pitchfork_lambda"] = pf->lambda;
}

// ---- threshold-map ----

void cmd_threshold_map(Context& c) {
  ThresholdGrids g = ThresholdGrids::defaults();
  const double j1_max = c.opt<double>("j1_max", 12.0);
  g.j1.clear();
  for (int i = 0; i * 0.1 <= j1_max + 1e-12; ++i) g.j1.push_back(0.1 * i);
  std::vector<ThresholdBoundary> out;
  for (int e : c.opt<std::vector<int>>("eps0", {-1, 1})) {
    if (e != -1 && e != 1) throw ConfigError("threshold-map: eps0 must be -1 or 1");
    out.push_back(threshold_boundary(e, g));
  }
  auto f = c.open("boundary.csv");
  write_boundary_csv(f, out);
  c.plot("boundary.py", "boundary", {"boundary.csv"}, "pitchfork existence boundary");
  json missing = json::array();
  for (const auto& b : out)
    for (const auto& [th, j1] : b.samples)
      if (!std::isfinite(j1)) missing.push_back({{"eps0", b.eps0}, {"theta", th}});
  c.manifest->diagnostics["no_boundary_in_grid"] = missing;
}

// ---- orbit-reduce ----

void cmd_orbit_reduce(Context& c) {
  const ModelSpec& spec = c.cfg.model;
  if (spec.n_modes != 2) throw ConfigError("orbit-reduce needs n_modes = 2");
  const ChebyshevFit fit =
      chebyshev_fit(sigmoid_kind_from_string(c.opt<std::string>("fit_sigmoid", "centered")),
                    c.opt<double>("alpha", 14.0), c.opt<double>("max_error", 0.01));
  c.json_out("invariants.json", to_json(reduce_invariants(fit, spec)));
  c.manifest->diagnostics["fit_degree"] = fit.degree();
  c.manifest->diagnostics["fit_error"] = fit.max_error;
}

// ---- tuning-curve ----

void cmd_tuning_curve(Context& c) {
  ModelSpec spec = c.cfg.model;
  const int n = c.opt<int>("points", 256);
  const auto grid = ring_grid(n);
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  if (c.opt<std::string>("mode", "equilibria") == "orbit") {
    if (spec.n_modes != 2) throw ConfigError("tuning-curve --mode orbit needs n_modes = 2");
    spec.sigmoid = SigmoidKind::centered;
    const ChebyshevFit fit = chebyshev_fit(SigmoidKind::centered, 14.0, 0.01);
    const OrbitSystem sys = make_orbit_system(fit, spec);
    const OrbitSkeleton sk = orbit_skeleton(sys, c.opt<double>("lo", 0.1), c.opt<double>("hi", 3.0),
                                            c.cfg.continuation);
    const double rel = c.opt<double>("above_onset", 0.1);
    for (std::size_t i = 0; i < sk.branches.size(); ++i) {
      const double target = sk.critical_gains[i] * (1.0 + rel);
      const BranchPoint* best = nullptr;
      for (const auto& p : sk.branches[i].points)
        if (!best || std::abs(p.params[0] - target) < std::abs(best->params[0] - target)) best = &p;
      if (!best) continue;
      ModelSpec at = spec;
      at.gain = best->params[0];
      const auto curve = tuning_curve_n2(OrbitPoint::from_vector(best->state), at, n);
      names.push_back("branch" + std::to_string(i + 1));
      cols.push_back(curve);
      c.manifest->diagnostics["curves"].push_back({{"branch", i + 1},
                                                   {"lambda", at.gain},
                                                   {"peaks", count_peaks(curve)},
                                                   {"n_unstable", best->n_unstable}});
    }
  } else {
    const DriveFrame frame = c.cfg.stimulus.frame(spec);
    const auto eq = drive_equilibria(spec, frame);
    const GalerkinModel model(spec);
    for (std::size_t i = 0; i < eq.size(); ++i) {
      std::vector<double> curve(n);
      for (int j = 0; j < n; ++j) curve[j] = reconstruct_activity(eq[i], spec, grid[j]);
      names.push_back("eq" + std::to_string(i));
      cols.push_back(curve);
      double z2 = eq[i].n_modes() > 1 ? std::abs(eq[i].z[1]) : 0.0;
      c.manifest->diagnostics["curves"].push_back(
          {{"name", names.back()},
           {"peak_angle", peak_angle(eq[i])},
           {"abs_z1", std::abs(eq[i].z[0])},
           {"abs_z2", z2},
           {"n_unstable", stability(model, eq[i], frame).n_unstable},
           {"peaks", count_peaks(curve)}});
    }
  }
  auto f = c.open("tuning_curves.csv");
  f << "x";
  for (const auto& nm : names) f << ',' << nm;
  f << '\n';
  for (int j = 0; j < n; ++j) {
    f << fmt(grid[j]);
    for (const auto& col : cols) f << ',' << fmt(col[j]);
    f << '\n';
  }
  c.plot("tuning_curves.py", "curves", {"tuning_curves.csv"}, "tuning curves");
}

// ---- illusion ----

void write_outcome_csv(std::ofstream& f, const OutcomeReport& r) {
  f << "t,v0,re_z1,im_z1,peak_angle,stimulus_angle\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const CortexState& s = r.trajectory.states[i];
    const double sa = std::isfinite(r.stimulus_angle[i]) ? r.stimulus_angle[i] : 0.0;
    f << fmt(r.times[i]) << ',' << fmt(s.v0) << ',' << fmt(s.z[0].real()) << ','
      << fmt(s.z[0].imag()) << ',' << fmt(r.phase_track[i]) << ',' << fmt(sa) << '\n';
  }
}

void cmd_illusion(Context& c) {
  Scenario scn = c.cfg.scenario;
  scn.spec = c.cfg.model;
  const std::string protocol = c.opt<std::string>("protocol", to_string(scn.kind));
  if (protocol != to_string(scn.kind)) scn = scenario_from_json(json{{"kind", protocol}}, scn);
  const OutcomeReport rep = run_scenario(scn);
  const std::string stem = "illusion_" + to_string(scn.kind);
  {
    auto f = c.open(stem + ".csv");
    write_outcome_csv(f, rep);
  }
  json o = to_json(rep);
  o["scenario"] = to_json(scn);
  c.json_out(stem + ".json", o);
  c.plot(stem + ".py", "trajectory", {stem + ".csv"}, to_string(scn.kind) + " protocol");
  c.manifest->diagnostics["basin"] = to_string(rep.basin);
  c.manifest->diagnostics["illusion_detected"] = rep.illusion_detected;

  const auto ramps = c.opt<std::vector<double>>("scan_ramps", {});
  if (!ramps.empty()) {
    if (scn.kind != ScenarioKind::rotate) throw ConfigError("illusion: ramp scan needs the rotate protocol");
    const RampScan scan = ramp_duration_scan(scn, ramps, c.opt<int>("bisection_steps", 6));
    auto f = c.open("ramp_scan.csv");
    f << "ramp_duration,illusion,basin_code\n";
    for (const auto& s : scan.samples)
      f << fmt(s.ramp_duration) << ',' << (s.illusion ? 1 : 0) << ',' << static_cast<int>(s.basin) << '\n';
    c.manifest->diagnostics["basin_codes"] = {"TC0", "TC90", "untuned", "other", "undecided"};
    if (scan.critical_duration) c.manifest->diagnostics["critical_ramp_duration"] = *scan.critical_duration;
  }
}

using Handler = void (*)(Context&);

Handler handler_for(const std::string& cmd) {
  if (cmd == "simulate") return cmd_simulate;
  if (cmd == "equilibria") return cmd_equilibria;
  if (cmd == "continue") return cmd_continue;
  if (cmd == "fold-locus") return cmd_fold_locus;
  if (cmd == "threshold-map") return cmd_threshold_map;
  if (cmd == "orbit-reduce") return cmd_orbit_reduce;
  if (cmd == "tuning-curve") return cmd_tuning_curve;
  if (cmd == "illusion") return cmd_illusion;
  throw ConfigError("unknown command '" + cmd + "'");
}

// Runs one command into `out`, always leaving a manifest behind.
int run_command(const std::string& cmd, const json& config, const json& options, const fs::path& out) {
  fs::create_directories(out);
  Manifest m;
  m.command = cmd;
  m.options = options;
  m.config = config;
  int code = 0;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Context c{RunConfig::from_json(config), options, out, &m};
    m.config = c.cfg.to_json();
    handler_for(cmd)(c);
  } catch (const NumericalError& e) {
    m.status = "numerical_error";
    m.diagnostics["error"] = e.what();
    code = 3;
  } catch (const std::invalid_argument& e) {
    m.status = "validation_error";
    m.diagnostics["error"] = e.what();
    code = 2;
  } catch (const json::exception& e) {
    m.status = "validation_error";
    m.diagnostics["error"] = e.what();
    code = 2;
  }
  m.diagnostics["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(out / "manifest.json", m.to_json());
  if (code != 0) std::cerr << cmd << ": " << m.diagnostics["error"].get<std::string>() << '\n';
  return code;
}

int repro_all(const json& config, const fs::path& out) {
  struct Job {
    std::string dir, cmd;
    json config_patch, options;
  };
  const double l1 = pitchfork_condition(9.0, 0.0, -1)->lambda;
  const json n2 = {{"n_modes", 2}, {"j_weights", {9.0, 6.66}}, {"gain", 1.0}};
  const std::vector<Job> jobs{
      {"threshold_map", "threshold-map", json::object(), {{"eps0", {-1, 1}}}},
      {"ring1_branches", "continue", json::object(), {{"param", "lambda"}, {"lo", 0.0}, {"hi", 20.0}}},
      {"ring1_tuning", "tuning-curve", json::object(), json::object()},
      {"n2_skeleton", "continue", {{"model", n2}}, {{"mode", "orbit"}, {"lo", 0.2}, {"hi", 3.0}}},
      {"n2_tuning", "tuning-curve", {{"model", n2}}, {{"mode", "orbit"}, {"lo", 0.2}, {"hi", 3.0}}},
      {"driven_n2_tuning", "tuning-curve",
       {{"model", {{"n_modes", 2}, {"j_weights", {9.0, 6.66}}, {"gain", 1.02 * l1}}},
        {"stimulus", {{"beta", 0.05}, {"epsilon", 0.01}, {"second_mode_ratio", 0.1}}}},
       json::object()},
      {"rotate", "illusion", json::object(), {{"protocol", "rotate"}}},
      {"mixture", "illusion", json::object(), {{"protocol", "mixture"}}},
      {"fold_locus", "fold-locus", json::object(), json::object()},
      {"invariants", "orbit-reduce", {{"model", n2}}, json::object()},
  };
  int worst = 0;
  json index = json::array();
  for (const Job& j : jobs) {
    json cfg = config;
    for (const auto& [k, v] : j.config_patch.items()) {
      if (!cfg.contains(k)) cfg[k] = json::object();
      for (const auto& [kk, vv] : v.items()) cfg[k][kk] = vv;
    }
    const int code = run_command(j.cmd, cfg, j.options, out / j.dir);
    std::cout << std::left << std::setw(20) << j.dir << (code == 0 ? "ok" : "FAILED") << '\n';
    index.push_back({{"dir", j.dir}, {"command", j.cmd}, {"exit", code}});
    worst = std::max(worst, code);
  }
  write_json(out / "index.json", index);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ringlab: ring model of orientation tuning"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");

  // Global overrides of the configuration.
  std::optional<int> n_modes, eps0, seed;
  std::optional<double> gain, theta, epsilon, beta, x0, ratio;
  std::vector<double> j_weights;
  std::optional<std::string> sigmoid;
  app.add_option("--n-modes", n_modes);
  app.add_option("--j0-sign", eps0);
  app.add_option("--j-weights", j_weights);
  app.add_option("--gain", gain);
  app.add_option("--theta", theta);
  app.add_option("--sigmoid", sigmoid);
  app.add_option("--epsilon", epsilon);
  app.add_option("--beta", beta);
  app.add_option("--x0", x0);
  app.add_option("--second-mode-ratio", ratio);
  app.add_option("--seed", seed);

  json options = json::object();

  // Each subcommand records its explicitly given options into `options`.
  std::vector<std::function<void()>> collectors;
  auto opt_d = [&](CLI::App* s, const char* flag, const char* key) {
    auto h = std::make_shared<double>();
    auto o = s->add_option(flag, *h);
    collectors.push_back([&options, h, o, key]() {
      if (o->count()) options[key] = *h;
    });
  };
  auto opt_i = [&](CLI::App* s, const char* flag, const char* key) {
    auto h = std::make_shared<int>();
    auto o = s->add_option(flag, *h);
    collectors.push_back([&options, h, o, key]() {
      if (o->count()) options[key] = *h;
    });
  };
  auto opt_s = [&](CLI::App* s, const char* flag, const char* key) {
    auto h = std::make_shared<std::string>();
    auto o = s->add_option(flag, *h);
    collectors.push_back([&options, h, o, key]() {
      if (o->count()) options[key] = *h;
    });
  };
  auto opt_vd = [&](CLI::App* s, const char* flag, const char* key) {
    auto h = std::make_shared<std::vector<double>>();
    auto o = s->add_option(flag, *h);
    collectors.push_back([&options, h, o, key]() {
      if (o->count()) options[key] = *h;
    });
  };
  auto opt_vi = [&](CLI::App* s, const char* flag, const char* key) {
    auto h = std::make_shared<std::vector<int>>();
    auto o = s->add_option(flag, *h);
    collectors.push_back([&options, h, o, key]() {
      if (o->count()) options[key] = *h;
    });
  };

  auto* sim = app.add_subcommand("simulate", "integrate the Galerkin system under a static drive");
  opt_d(sim, "--t-end", "t_end");
  opt_d(sim, "--dt", "dt");
  opt_i(sim, "--sample-every", "sample_every");
  opt_s(sim, "--init", "init");
  auto* eqs = app.add_subcommand("equilibria", "all equilibria of the static drive");
  auto* cont = app.add_subcommand("continue", "one-parameter continuation");
  opt_s(cont, "--param", "param");
  opt_d(cont, "--lo", "lo");
  opt_d(cont, "--hi", "hi");
  opt_s(cont, "--mode", "mode");
  opt_d(cont, "--alpha", "alpha");
  opt_d(cont, "--max-error", "max_error");
  auto* fold = app.add_subcommand("fold-locus", "two-parameter fold continuation in (epsilon, lambda)");
  opt_d(fold, "--eps-lo", "eps_lo");
  opt_d(fold, "--eps-hi", "eps_hi");
  opt_d(fold, "--lambda-lo", "lambda_lo");
  opt_d(fold, "--lambda-hi", "lambda_hi");
  auto* thr = app.add_subcommand("threshold-map", "(theta, J1) boundary of the pitchfork");
  opt_vi(thr, "--eps0", "eps0");
  opt_d(thr, "--j1-max", "j1_max");
  auto* red = app.add_subcommand("orbit-reduce", "invariant polynomials of the N=2 orbit space");
  opt_d(red, "--alpha", "alpha");
  opt_d(red, "--max-error", "max_error");
  opt_s(red, "--fit-sigmoid", "fit_sigmoid");
  auto* tc = app.add_subcommand("tuning-curve", "activity profiles of equilibria");
  opt_i(tc, "--points", "points");
  opt_s(tc, "--mode", "mode");
  opt_d(tc, "--lo", "lo");
  opt_d(tc, "--hi", "hi");
  opt_d(tc, "--above-onset", "above_onset");
  auto* ill = app.add_subcommand("illusion", "rotate / mixture stimulus protocols");
  opt_s(ill, "--protocol", "protocol");
  opt_vd(ill, "--scan-ramps", "scan_ramps");
  opt_i(ill, "--bisection-steps", "bisection_steps");
  auto* rep = app.add_subcommand("repro-all", "every reference dataset with plot scripts");
  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun->add_option("manifest", manifest_path)->required();
  (void)eqs;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (auto& f : collectors) f();

  json config = json::object();
  try {
    if (!config_path.empty()) config = read_json(config_path);
    auto set = [&](const char* sec, const char* key, const json& v) {
      if (!config.contains(sec)) config[sec] = json::object();
      config[sec][key] = v;
    };
    if (n_modes) set("model", "n_modes", *n_modes);
    if (eps0) set("model", "j0_sign", *eps0);
    if (!j_weights.empty()) set("model", "j_weights", j_weights);
    if (gain) set("model", "gain", *gain);
    if (theta) set("model", "threshold", *theta);
    if (sigmoid) set("model", "sigmoid", *sigmoid);
    if (epsilon) set("stimulus", "epsilon", *epsilon);
    if (beta) set("stimulus", "beta", *beta);
    if (x0) set("stimulus", "x0", *x0);
    if (ratio) set("stimulus", "second_mode_ratio", *ratio);
    if (seed) config["seed"] = *seed;
    RunConfig::from_json(config);  // validate before any output is written
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }

  if (rep->parsed()) return repro_all(config, out_dir);
  if (rerun->parsed()) {
    try {
      const Manifest m = Manifest::from_json(read_json(manifest_path));
      return run_command(m.command, m.config, m.options, out_dir);
    } catch (const std::invalid_argument& e) {
      std::cerr << "manifest error: " << e.what() << '\n';
      return 2;
    }
  }
  for (CLI::App* sub : app.get_subcommands())
    return run_command(sub->get_name(), config, options, out_dir);
  return 2;
}
