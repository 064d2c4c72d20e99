#pragma once

// Single-mode (N = 1) analysis in polar coordinates z1 = rho e^{2 i phi},
// for the canonical drive with x0 = 0.

#include <optional>
#include <vector>

#include "ringmodel/continuation.hpp"
#include "ringmodel/model.hpp"
#include "ringmodel/newton.hpp"
#include "ringmodel/quadrature.hpp"

namespace ringmodel {

struct PolarState {
  double v0 = 0.0;
  double rho = 0.0;
  double phi = 0.0;
};

/// Derivative (v0', rho', phi'). Throws std::invalid_argument at rho = 0,
/// where the phase equation is undefined.
PolarState polar_rhs(const PolarState& p, const ModelSpec& spec, double beta, double epsilon);

/// B0(v0, rho) and B1(v0, rho): (1/pi) int f(lambda(v0 + sqrt|J1| rho cos 2y)) {1, cos 2y} dy.
std::pair<double, double> polar_moments(double v0, double rho, const ModelSpec& spec);

/// phi = 0 (even) or phi = pi/2 (odd); rho is signed.
enum class Parity { even, odd };

Vec polar_equilibrium_residual(Parity parity, double v0, double rho, const ModelSpec& spec,
                               double beta, double epsilon);

NewtonResult solve_polar_equilibrium(Parity parity, double v0_guess, double rho_guess,
                                     const ModelSpec& spec, double beta, double epsilon,
                                     const NewtonConfig& cfg = {});

/// Galerkin state of a polar equilibrium: z1 = rho (even) or -rho (odd).
CortexState polar_to_state(Parity parity, double v0, double rho);

/// Continues the (v0, rho) family of the given parity in lambda over [lo, hi].
Branch continue_polar_branch(Parity parity, double v0, double rho, const ModelSpec& spec,
                             double beta, double epsilon, double lo, double hi,
                             const ContinuationConfig& cfg, int direction = +1);

struct PitchforkPoint {
  double lambda;
  double v0;
};

/// Smallest lambda* <= lambda_max solving v0 = eps0 S(lambda v0) - theta and
/// 1 = lambda S'(lambda v0) J1 / 2 (standard sigmoid), or nothing.
std::optional<PitchforkPoint> pitchfork_condition(double j1, double theta, int eps0,
                                                  double lambda_max = 30.0);

struct ThresholdGrids {
  std::vector<double> theta;
  std::vector<double> j1;
  std::vector<double> lambda;

  static ThresholdGrids defaults();
};

/// Existence of a pitchfork for lambda on the grid (with local refinement)
/// through the quadratic in U = v0 + theta.
bool threshold_exists(double theta, double j1, int eps0, const std::vector<double>& lambda_grid);

struct ThresholdBoundary {
  int eps0 = -1;
  // (theta, minimal J1); J1 is NaN when no grid value admits a pitchfork.
  std::vector<std::pair<double, double>> samples;
};

ThresholdBoundary threshold_boundary(int eps0, const ThresholdGrids& grids, double j1_tol = 1e-3);

/// f(a, b) = -(a + ln(1 + 2 e^{-a-b})) / b.
double halfwidth_argument(double a, double b);

/// Half width at half height of S(a + b cos 2x), a = lambda (v0f - theta),
/// b = lambda sqrt(pi1f J1); empty if the curve never falls to half height.
std::optional<double> tuning_halfwidth(double v0f, double pi1f, double lambda, double theta,
                                       double j1);

/// Same for an N = 1 Galerkin state, whose v0 already contains -theta.
std::optional<double> state_halfwidth(const CortexState& state, const ModelSpec& spec);

}  // namespace ringmodel
