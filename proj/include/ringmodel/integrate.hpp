#pragma once

#include <functional>
#include <vector>

#include "ringmodel/galerkin.hpp"

namespace ringmodel {

struct Trajectory {
  std::vector<double> times;
  std::vector<CortexState> states;
  std::vector<DriveFrame> stimulus_log;

  const CortexState& final_state() const { return states.back(); }
};

struct IntegrateOptions {
  int sample_every = 1;  // keep every k-th step (the last step is always kept)
};

/// Classic RK4 step for an autonomous-or-not real vector field f(t, u).
template <class F>
Vec rk4_step(const F& f, double t, const Vec& u, double dt) {
  const Vec k1 = f(t, u);
  const Vec k2 = f(t + 0.5 * dt, u + 0.5 * dt * k1);
  const Vec k3 = f(t + 0.5 * dt, u + 0.5 * dt * k2);
  const Vec k4 = f(t + dt, u + dt * k3);
  return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 of the Galerkin system; the schedule is sampled at every
/// stage time. The number of steps is round(t_end / dt) and the last step is
/// shortened or lengthened so the trajectory ends exactly at t_end.
/// Throws NumericalError on a non-finite state.
Trajectory integrate(const GalerkinModel& model, const CortexState& state0, const Stimulus& stim,
                     double t_end, double dt, IntegrateOptions opts = {});

/// Same, returning only the final state (no sampling overhead).
CortexState integrate_final(const GalerkinModel& model, const CortexState& state0,
                            const Stimulus& stim, double t_end, double dt);

/// Ring field sampled on M points x_j = -pi/2 + j pi / M.
struct RingTrajectory {
  std::vector<double> grid;
  std::vector<double> times;
  std::vector<Vec> fields;
};

std::vector<double> ring_grid(int m);

/// Samples the Galerkin voltage of `state` on the M-point grid.
Vec sample_voltage(const CortexState& state, const ModelSpec& spec, int m);

/// Galerkin coordinates of a sampled field (discrete Fourier projection).
CortexState project_field(const Vec& field, const ModelSpec& spec);

/// Discrete Fourier coefficient 2 mean(V e^{2ipx}) of an arbitrary mode p.
Complex field_mode(const Vec& field, int p);

/// Method-of-lines simulation of the untruncated ring equation
///   tau V' = -V + (1/pi) int J(x - y) f(lambda V(y)) dy + eps I(x) + offset
/// with trapezoidal convolution on the grid. Requires M >= 4N + 2.
RingTrajectory full_ring_simulate(const Vec& v_init, const Stimulus& stim, const ModelSpec& spec,
                                  double t_end, double dt, int sample_every = 1);

}  // namespace ringmodel
