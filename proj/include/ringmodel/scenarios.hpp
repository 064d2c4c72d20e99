#pragma once

// Dynamic-stimulus protocols (rotate-and-snap, contrast mixture) and basin
// classification for the driven ring model.

#include <optional>
#include <string>
#include <vector>

#include "ringmodel/equilibria.hpp"
#include "ringmodel/integrate.hpp"

namespace ringmodel {

enum class ScenarioKind { rotate, mixture, static_stimulus };
enum class Basin { tc0, tc90, untuned, other, undecided };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);
std::string to_string(Basin basin);

enum class InitialCondition { tc0, untuned, rest, custom };
std::string to_string(InitialCondition ic);
InitialCondition initial_condition_from_string(const std::string& name);

/// One protocol run. Times are in units of tau.
///  rotate:  x0 = a + (b - a) min(max(t - ramp_start, 0) / ramp_duration, 1)
///           until switch_time, then x0 = final_angle.
///  mixture: psi = 0 before ramp_start, linear to 1 at ramp_start + ramp_duration,
///           drive (1 - psi) I_a + psi I_b.
///  static:  x0 = angle_a throughout.
/// Every angle is shifted by angle_offset.
struct Scenario {
  ScenarioKind kind = ScenarioKind::rotate;
  ModelSpec spec;
  double beta = 0.1;
  double epsilon = 0.01;
  double angle_a = 0.0;
  double angle_b = 0.0;
  double final_angle = 0.0;
  double angle_offset = 0.0;
  double ramp_start = 0.0;
  double ramp_duration = 1000.0;
  double switch_time = 2e4;
  double t_end = 2.5e4;
  double dt = 0.05;
  int sample_every = 20;
  InitialCondition initial = InitialCondition::tc0;
  std::optional<CortexState> initial_state;  // for InitialCondition::custom
  bool preflight = true;

  static Scenario rotate_default();
  static Scenario mixture_default();

  void validate() const;
  Stimulus stimulus() const;
  /// Orientation of the stimulus at t_end (mod pi).
  double final_stimulus_angle() const;
};

struct ClassifyOptions {
  double t_max = 5000.0;
  double dt = 0.05;
  double rhs_tol = 1e-9;
  double match_radius = 1e-4;
  double angle_window = 0.39269908169872414;  // pi / 8
  double reference_angle = 0.0;               // orientation labelled TC0
};

struct BasinResult {
  Basin basin = Basin::undecided;
  CortexState steady;
  double residual = 0.0;
  double settle_time = 0.0;
  bool matched = false;  // nearest precomputed equilibrium within radius
};

/// Labels a tuned/untuned equilibrium by its peak angle (absolute: TC0 peaks
/// at `reference`, TC90 at reference + pi/2). `tuned_scale` is the |z1| of a
/// tuned state; anything below a fifth of it counts as untuned.
Basin label_state(const CortexState& state, double tuned_scale, double angle_window,
                  double reference = 0.0);

/// All equilibria of the static drive `frame` in the full chart.
std::vector<CortexState> drive_equilibria(const ModelSpec& spec, const DriveFrame& frame);

/// Integrates under the static frame until |rhs| < rhs_tol or t_max, then
/// matches against drive_equilibria. Unconverged runs are "undecided".
BasinResult classify_basin(const CortexState& state, const ModelSpec& spec, const DriveFrame& frame,
                           const ClassifyOptions& opts = {});

struct BistabilityCheck {
  bool bistable = false;
  std::optional<CortexState> tc0, tc90, untuned;
  std::string message;
};

/// Both tuned equilibria of the x0 = offset drive are stable within the
/// reflection-invariant subspace.
BistabilityCheck check_bistable(const ModelSpec& spec, double beta, double epsilon,
                                double angle_offset = 0.0);

struct OutcomeReport {
  ScenarioKind kind = ScenarioKind::rotate;
  double final_peak_angle = 0.0;
  double final_stimulus_angle = 0.0;
  Basin basin = Basin::undecided;             // from the state at t_end
  Basin asymptotic_basin = Basin::undecided;  // after settling under the final drive
  bool illusion_detected = false;
  std::vector<double> times;
  std::vector<double> phase_track;
  std::vector<double> stimulus_angle;
  std::vector<double> amplitude;
  CortexState final_state;
  Trajectory trajectory;
  std::vector<std::string> notes;
};

/// Runs the scenario (any kind). Throws std::invalid_argument if the
/// preflight bistability check fails.
OutcomeReport run_scenario(const Scenario& scn);
OutcomeReport rotate_protocol(const Scenario& scn);
OutcomeReport mixture_protocol(const Scenario& scn);

struct RampScanSample {
  double ramp_duration;
  Basin basin;
  bool illusion;
};

struct RampScan {
  std::vector<RampScanSample> samples;
  std::optional<double> critical_duration;  // shortest duration that keeps the illusion
};

/// Rotate protocol over the given ramp durations, then bisection between the
/// longest failing and the shortest succeeding duration (if both occur).
RampScan ramp_duration_scan(const Scenario& base, const std::vector<double>& durations,
                            int bisection_steps = 6);

}  // namespace ringmodel
