#include "ringmodel/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ringmodel/errors.hpp"

namespace ringmodel {

namespace {
constexpr double kPi = std::numbers::pi;

double ramp(double t, double start, double duration) {
  if (t <= start) return 0.0;
  if (duration <= 0.0) return 1.0;
  return std::min((t - start) / duration, 1.0);
}

double basin_angle(Basin b, double reference) {
  return b == Basin::tc90 ? reference + 0.5 * kPi : reference;
}
}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::rotate: return "rotate";
    case ScenarioKind::mixture: return "mixture";
    case ScenarioKind::static_stimulus: return "static";
  }
  return "rotate";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "rotate") return ScenarioKind::rotate;
  if (name == "mixture") return ScenarioKind::mixture;
  if (name == "static") return ScenarioKind::static_stimulus;
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

std::string to_string(Basin basin) {
  switch (basin) {
    case Basin::tc0: return "TC0";
    case Basin::tc90: return "TC90";
    case Basin::untuned: return "untuned";
    case Basin::other: return "other";
    case Basin::undecided: return "undecided";
  }
  return "undecided";
}

std::string to_string(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::tc0: return "tc0";
    case InitialCondition::untuned: return "untuned";
    case InitialCondition::rest: return "rest";
    case InitialCondition::custom: return "custom";
  }
  return "tc0";
}

InitialCondition initial_condition_from_string(const std::string& name) {
  if (name == "tc0") return InitialCondition::tc0;
  if (name == "untuned") return InitialCondition::untuned;
  if (name == "rest") return InitialCondition::rest;
  if (name == "custom") return InitialCondition::custom;
  throw std::invalid_argument("unknown initial condition '" + name + "'");
}

Scenario Scenario::rotate_default() {
  Scenario s;
  s.kind = ScenarioKind::rotate;
  s.spec.gain = 15.0;
  s.angle_a = 0.0;
  s.angle_b = 0.5 * kPi;
  s.final_angle = 0.0;
  s.ramp_start = 0.0;
  s.ramp_duration = 1000.0;
  s.switch_time = 2e4;
  s.t_end = 2.5e4;
  return s;
}

Scenario Scenario::mixture_default() {
  Scenario s;
  s.kind = ScenarioKind::mixture;
  s.spec.gain = 15.0;
  s.angle_a = 0.0;
  s.angle_b = 0.5 * kPi;
  s.final_angle = 0.5 * kPi;
  s.ramp_start = 1000.0;
  s.ramp_duration = 9000.0;
  s.switch_time = 1.2e4;
  s.t_end = 1.2e4;
  return s;
}

void Scenario::validate() const {
  spec.validate();
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (!(ramp_start >= 0.0)) throw std::invalid_argument("ramp_start must be >= 0");
  if (!(ramp_duration >= 0.0)) throw std::invalid_argument("ramp_duration must be >= 0");
  const double ramp_end = ramp_start + ramp_duration;
  if (kind == ScenarioKind::rotate) {
    if (!(ramp_end <= switch_time && switch_time < t_end))
      throw std::invalid_argument("rotate timeline must satisfy ramp end <= switch_time < t_end");
  } else if (kind == ScenarioKind::mixture) {
    if (!(ramp_end <= t_end)) throw std::invalid_argument("mixture ramp must end by t_end");
  }
  if (initial == InitialCondition::custom) {
    if (!initial_state) throw std::invalid_argument("custom initial condition needs initial_state");
    if (initial_state->n_modes() != spec.n_modes)
      throw std::invalid_argument("initial_state has the wrong number of modes");
  }
}

Stimulus Scenario::stimulus() const {
  const ModelSpec s = spec;
  const double b = beta, e = epsilon, off = angle_offset;
  switch (kind) {
    case ScenarioKind::static_stimulus: return make_lgn_stimulus(b, angle_a + off, e, s);
    case ScenarioKind::rotate: {
      const double a0 = angle_a, a1 = angle_b, fin = final_angle, r0 = ramp_start,
                   rd = ramp_duration, ts = switch_time;
      Stimulus st{lgn_frame(b, a0 + off, e, s), {}};
      st.schedule = [=](double t) {
        const double x0 = t < ts ? a0 + (a1 - a0) * ramp(t, r0, rd) : fin;
        return lgn_frame(b, x0 + off, e, s);
      };
      return st;
    }
    case ScenarioKind::mixture: {
      const DriveFrame fa = lgn_frame(b, angle_a + off, e, s);
      const DriveFrame fb = lgn_frame(b, angle_b + off, e, s);
      const double r0 = ramp_start, rd = ramp_duration;
      Stimulus st{fa, {}};
      st.schedule = [=](double t) { return blend(fa, fb, ramp(t, r0, rd)); };
      return st;
    }
  }
  return make_lgn_stimulus(b, angle_a + off, e, s);
}

double Scenario::final_stimulus_angle() const {
  switch (kind) {
    case ScenarioKind::static_stimulus: return wrap_orientation(angle_a + angle_offset);
    case ScenarioKind::rotate: return wrap_orientation(final_angle + angle_offset);
    case ScenarioKind::mixture: {
      const double psi = ramp(t_end, ramp_start, ramp_duration);
      return wrap_orientation((psi >= 0.5 ? angle_b : angle_a) + angle_offset);
    }
  }
  return 0.0;
}

Basin label_state(const CortexState& state, double tuned_scale, double angle_window,
                  double reference) {
  if (state.z.empty()) return Basin::untuned;
  if (std::abs(state.z[0]) < std::max(0.2 * tuned_scale, 1e-6)) return Basin::untuned;
  const double phi = peak_angle(state);
  if (std::abs(wrap_orientation(phi - reference)) <= angle_window) return Basin::tc0;
  if (std::abs(wrap_orientation(phi - reference - 0.5 * kPi)) <= angle_window) return Basin::tc90;
  return Basin::other;
}

std::vector<CortexState> drive_equilibria(const ModelSpec& spec, const DriveFrame& frame) {
  const GalerkinModel model(spec);
  const int n = spec.n_modes;
  NewtonConfig cfg;
  cfg.max_iters = 40;
  const VectorFn f = [&](const Vec& u) { return model.rhs(u, frame); };
  const MatrixFn jac = [&](const Vec& u) { return model.jacobian(u); };
  std::vector<CortexState> out;
  for (double v0 = -1.0; v0 <= 1.0 + 1e-12; v0 += 0.25)
    for (double rho : {0.0, 0.05, 0.2, 0.4, 0.7})
      for (int a = 0; a < (rho == 0.0 ? 1 : 8); ++a) {
        CortexState seed = CortexState::zero(n);
        seed.v0 = v0;
        seed.z[0] = std::polar(rho, 2.0 * kPi * a / 8.0);
        const NewtonResult r = newton_solve(f, seed.to_vector(), cfg, jac);
        if (!r.converged()) continue;
        const CortexState s = CortexState::from_vector(r.x);
        const bool dup = std::any_of(out.begin(), out.end(), [&](const CortexState& o) {
          return (o.to_vector() - r.x).norm() < 1e-6;
        });
        if (!dup) out.push_back(s);
      }
  return out;
}

BasinResult classify_basin(const CortexState& state, const ModelSpec& spec, const DriveFrame& frame,
                           const ClassifyOptions& opts) {
  const GalerkinModel model(spec);
  const Stimulus stim{frame, {}};
  BasinResult res;
  CortexState s = state;
  const double chunk = 10.0;
  double t = 0.0;
  res.residual = model.rhs(s.to_vector(), frame).lpNorm<Eigen::Infinity>();
  while (res.residual >= opts.rhs_tol && t < opts.t_max) {
    s = integrate_final(model, s, stim, chunk, opts.dt);
    t += chunk;
    res.residual = model.rhs(s.to_vector(), frame).lpNorm<Eigen::Infinity>();
  }
  res.steady = s;
  res.settle_time = t;
  if (res.residual >= opts.rhs_tol) {
    res.basin = Basin::undecided;
    return res;
  }
  const std::vector<CortexState> eq = drive_equilibria(spec, frame);
  double scale = 0.0;
  for (const auto& e : eq) scale = std::max(scale, std::abs(e.z[0]));
  const CortexState* nearest = nullptr;
  double best = 0.0;
  for (const auto& e : eq) {
    const double d = (e.to_vector() - s.to_vector()).norm();
    if (!nearest || d < best) {
      nearest = &e;
      best = d;
    }
  }
  res.matched = nearest && best <= opts.match_radius;
  if (scale == 0.0) scale = std::abs(s.z[0]);
  res.basin = label_state(res.matched ? *nearest : s, scale, opts.angle_window,
                          opts.reference_angle);
  return res;
}

BistabilityCheck check_bistable(const ModelSpec& spec, double beta, double epsilon,
                                double angle_offset) {
  BistabilityCheck out;
  DriveSpec d;
  d.beta = beta;
  d.epsilon = epsilon;
  const EquilibriumProblem p(spec, d, Chart::symmetric);
  const auto eq = enumerate_equilibria(p, seed_grid(p, -1.0, 1.0, -1.0, 1.0, 21));
  double scale = 0.0;
  for (const Vec& u : eq) scale = std::max(scale, std::abs(u(1)));
  int stable_tuned_pos = 0, stable_tuned_neg = 0;
  for (const Vec& u : eq) {
    const CortexState s = group_act(p.decode(u), angle_offset);
    const bool st = stability(p, u).stable();
    const Basin b = label_state(p.decode(u), scale, 0.25 * kPi);
    if (b == Basin::tc0 && st) {
      ++stable_tuned_pos;
      out.tc0 = s;
    } else if (b == Basin::tc90 && st) {
      ++stable_tuned_neg;
      out.tc90 = s;
    } else if (b == Basin::untuned) {
      out.untuned = s;
    }
  }
  out.bistable = stable_tuned_pos == 1 && stable_tuned_neg == 1;
  out.message = std::to_string(eq.size()) + " equilibria, " + std::to_string(stable_tuned_pos) +
                " stable at the stimulus orientation, " + std::to_string(stable_tuned_neg) +
                " stable orthogonal to it";
  return out;
}

OutcomeReport run_scenario(const Scenario& scn) {
  scn.validate();
  OutcomeReport rep;
  rep.kind = scn.kind;
  const BistabilityCheck pre = check_bistable(scn.spec, scn.beta, scn.epsilon, scn.angle_offset);
  if (scn.preflight && !pre.bistable)
    throw std::invalid_argument("model is not bistable at these parameters: " + pre.message);
  rep.notes.push_back("preflight: " + pre.message);

  const double start_angle = scn.angle_a;
  CortexState init;
  switch (scn.initial) {
    case InitialCondition::tc0:
      if (!pre.tc0) throw std::invalid_argument("no tuned equilibrium to start from");
      init = group_act(*pre.tc0, start_angle);
      break;
    case InitialCondition::untuned:
      if (!pre.untuned) throw std::invalid_argument("no untuned equilibrium to start from");
      init = group_act(*pre.untuned, start_angle);
      break;
    case InitialCondition::rest: init = CortexState::zero(scn.spec.n_modes); break;
    case InitialCondition::custom: init = *scn.initial_state; break;
  }

  const GalerkinModel model(scn.spec);
  const Stimulus stim = scn.stimulus();
  IntegrateOptions io;
  io.sample_every = scn.sample_every;
  rep.trajectory = integrate(model, init, stim, scn.t_end, scn.dt, io);

  double max_rho = 0.0;
  for (const auto& s : rep.trajectory.states) max_rho = std::max(max_rho, std::abs(s.z[0]));
  int weak = 0, jumps = 0;
  for (std::size_t i = 0; i < rep.trajectory.states.size(); ++i) {
    const CortexState& s = rep.trajectory.states[i];
    const DriveFrame& f = rep.trajectory.stimulus_log[i];
    rep.times.push_back(rep.trajectory.times[i]);
    rep.phase_track.push_back(peak_angle(s));
    rep.amplitude.push_back(std::abs(s.z[0]));
    rep.stimulus_angle.push_back(std::abs(f.ik[0]) > 0.0 ? wrap_orientation(0.5 * std::arg(f.ik[0]))
                                                          : std::nan(""));
    if (std::abs(s.z[0]) < 1e-3 * max_rho) ++weak;
    if (i > 0 && std::abs(wrap_orientation(rep.phase_track[i] - rep.phase_track[i - 1])) > 0.1) ++jumps;
  }
  if (weak > 0) rep.notes.push_back(std::to_string(weak) + " samples with |z1| near 0 (phase undefined)");
  if (jumps > 0) rep.notes.push_back(std::to_string(jumps) + " phase jumps above 0.1 rad between samples");

  rep.final_state = rep.trajectory.final_state();
  rep.final_peak_angle = peak_angle(rep.final_state);
  rep.final_stimulus_angle = scn.final_stimulus_angle();
  double scale = 0.0;
  for (const auto& e : {pre.tc0, pre.tc90})
    if (e) scale = std::max(scale, std::abs(e->z[0]));
  rep.basin = label_state(rep.final_state, scale, ClassifyOptions{}.angle_window, scn.angle_offset);
  ClassifyOptions co;
  co.dt = scn.dt;
  co.reference_angle = scn.angle_offset;
  const BasinResult b = classify_basin(rep.final_state, scn.spec, stim.at(scn.t_end), co);
  rep.asymptotic_basin = b.basin;
  if (!b.matched && b.basin != Basin::undecided)
    rep.notes.push_back("steady state not matched to a precomputed equilibrium");
  if (b.basin != rep.basin)
    rep.notes.push_back("continued integration under the final drive settles in " +
                        to_string(b.basin) + " (t = " + std::to_string(b.settle_time) + ")");
  const bool tuned = rep.basin == Basin::tc0 || rep.basin == Basin::tc90;
  rep.illusion_detected =
      tuned && std::abs(wrap_orientation(basin_angle(rep.basin, scn.angle_offset) -
                                         rep.final_stimulus_angle)) > 0.25 * kPi;
  return rep;
}

OutcomeReport rotate_protocol(const Scenario& scn) {
  if (scn.kind != ScenarioKind::rotate) throw std::invalid_argument("rotate_protocol: wrong kind");
  return run_scenario(scn);
}

OutcomeReport mixture_protocol(const Scenario& scn) {
  if (scn.kind != ScenarioKind::mixture) throw std::invalid_argument("mixture_protocol: wrong kind");
  return run_scenario(scn);
}

RampScan ramp_duration_scan(const Scenario& base, const std::vector<double>& durations,
                            int bisection_steps) {
  if (base.kind != ScenarioKind::rotate) throw std::invalid_argument("ramp scan needs a rotate scenario");
  RampScan scan;
  Scenario s = base;
  auto run = [&](double d) {
    s.ramp_duration = d;
    const OutcomeReport r = run_scenario(s);
    s.preflight = false;
    scan.samples.push_back({d, r.basin, r.illusion_detected});
    return r.illusion_detected;
  };
  std::vector<double> ds = durations;
  std::sort(ds.begin(), ds.end());
  for (double d : ds) run(d);

  // Shortest duration from which every longer sample keeps the illusion.
  auto sorted = scan.samples;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.ramp_duration < b.ramp_duration; });
  int k = static_cast<int>(sorted.size());
  while (k > 0 && sorted[k - 1].illusion) --k;
  if (k == static_cast<int>(sorted.size()) || k == 0) return scan;
  double lo = sorted[k - 1].ramp_duration, hi = sorted[k].ramp_duration;
  for (int i = 0; i < bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (run(mid) ? hi : lo) = mid;
  }
  scan.critical_duration = hi;
  std::sort(scan.samples.begin(), scan.samples.end(),
            [](const auto& a, const auto& b) { return a.ramp_duration < b.ramp_duration; });
  return scan;
}

}  // namespace ringmodel
