#include "ringmodel/integrate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ringmodel/errors.hpp"

namespace ringmodel {

namespace {
constexpr double kPi = std::numbers::pi;

long step_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  return std::max(1L, std::lround(t_end / dt));
}

void check_finite(const Vec& u, double t) {
  if (!u.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at t = " << t;
    throw NumericalError(os.str());
  }
}

template <class Sink>
void run_rk4(const GalerkinModel& model, const CortexState& state0, const Stimulus& stim,
             double t_end, double dt, Sink&& sink) {
  if (state0.n_modes() != model.n_modes())
    throw std::invalid_argument("initial state mode count does not match the model");
  const long n = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(n);
  auto f = [&](double t, const Vec& u) { return model.rhs(u, stim.at(t)); };
  Vec u = state0.to_vector();
  sink(0L, 0.0, u);
  for (long i = 1; i <= n; ++i) {
    const double t0 = (i - 1) * h;
    u = rk4_step(f, t0, u, h);
    const double t = (i == n) ? t_end : i * h;
    check_finite(u, t);
    sink(i, t, u);
  }
}
}  // namespace

Trajectory integrate(const GalerkinModel& model, const CortexState& state0, const Stimulus& stim,
                     double t_end, double dt, IntegrateOptions opts) {
  if (opts.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  const long n = step_count(t_end, dt);
  Trajectory traj;
  run_rk4(model, state0, stim, t_end, dt, [&](long i, double t, const Vec& u) {
    if (i % opts.sample_every == 0 || i == n) {
      traj.times.push_back(t);
      traj.states.push_back(CortexState::from_vector(u));
      traj.stimulus_log.push_back(stim.at(t));
    }
  });
  return traj;
}

CortexState integrate_final(const GalerkinModel& model, const CortexState& state0,
                            const Stimulus& stim, double t_end, double dt) {
  Vec last;
  run_rk4(model, state0, stim, t_end, dt, [&](long, double, const Vec& u) { last = u; });
  return CortexState::from_vector(last);
}

std::vector<double> ring_grid(int m) {
  std::vector<double> x(m);
  for (int j = 0; j < m; ++j) x[j] = -0.5 * kPi + j * kPi / m;
  return x;
}

Vec sample_voltage(const CortexState& state, const ModelSpec& spec, int m) {
  const auto x = ring_grid(m);
  Vec v(m);
  for (int j = 0; j < m; ++j) v(j) = reconstruct_voltage(state, spec, x[j]);
  return v;
}

Complex field_mode(const Vec& field, int p) {
  const int m = static_cast<int>(field.size());
  const auto x = ring_grid(m);
  Complex acc{};
  for (int j = 0; j < m; ++j) acc += field(j) * std::polar(1.0, 2.0 * p * x[j]);
  return 2.0 * acc / static_cast<double>(m);
}

CortexState project_field(const Vec& field, const ModelSpec& spec) {
  CortexState s = CortexState::zero(spec.n_modes);
  s.v0 = field.mean();
  for (int p = 1; p <= spec.n_modes; ++p)
    s.z[p - 1] = field_mode(field, p) / std::sqrt(spec.weight_magnitude(p));
  return s;
}

RingTrajectory full_ring_simulate(const Vec& v_init, const Stimulus& stim, const ModelSpec& spec,
                                  double t_end, double dt, int sample_every) {
  spec.validate();
  const int m = static_cast<int>(v_init.size());
  if (m < 4 * spec.n_modes + 2)
    throw std::invalid_argument("full_ring_simulate: need at least 4N+2 grid points");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  const long n = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(n);
  const Nonlinearity f = Nonlinearity::for_spec(spec);

  RingTrajectory out;
  out.grid = ring_grid(m);
  // Kernel matrix K_ij = J(x_i - x_j) / M (trapezoid weight pi/M, times 1/pi).
  Mat kernel(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double d = out.grid[i] - out.grid[j];
      double jv = spec.j0_sign;
      for (int p = 1; p <= spec.n_modes; ++p) jv += spec.j_weights[p - 1] * std::cos(2.0 * p * d);
      kernel(i, j) = jv / m;
    }
  auto drive_field = [&](double t) {
    const DriveFrame fr = stim.at(t);
    Vec d(m);
    for (int j = 0; j < m; ++j) d(j) = reconstruct_drive(fr, spec, out.grid[j]);
    return d;
  };
  const bool is_static = stim.is_static();
  const Vec static_drive = drive_field(0.0);
  const double offset = spec.v0_offset();
  auto rhs = [&](double t, const Vec& v) {
    Vec a(m);
    for (int j = 0; j < m; ++j) a(j) = f.value(spec.gain * v(j));
    Vec dv = -v + kernel * a + (is_static ? static_drive : drive_field(t));
    dv.array() += offset;
    return Vec(dv / spec.time_constant);
  };

  Vec v = v_init;
  out.times.push_back(0.0);
  out.fields.push_back(v);
  for (long i = 1; i <= n; ++i) {
    v = rk4_step(rhs, (i - 1) * h, v, h);
    const double t = (i == n) ? t_end : i * h;
    check_finite(v, t);
    if (i % sample_every == 0 || i == n) {
      out.times.push_back(t);
      out.fields.push_back(v);
    }
  }
  return out;
}

}  // namespace ringmodel
