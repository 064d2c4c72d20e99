#pragma once

// Orbit space of the N = 2 Galerkin system under O(2):
//   pi1 = |z1|^2, pi2 = |z2|^2, pi3 = Re(z1^2 conj(z2)),
// with pi1, pi2 >= 0 and pi3^2 <= pi1^2 pi2. Equivariant form of the field:
//   z1' = a z1 + b conj(z1) z2,   z2' = c z2 + d z1^2,
// where a..d and the mean-mode term B0 are invariant polynomials.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ringmodel/chebyshev.hpp"
#include "ringmodel/continuation.hpp"
#include "ringmodel/galerkin.hpp"

namespace ringmodel {

struct OrbitPoint {
  double v0 = 0.0;
  double pi1 = 0.0;
  double pi2 = 0.0;
  double pi3 = 0.0;

  Vec to_vector() const;
  static OrbitPoint from_vector(const Eigen::Ref<const Vec>& x);

  /// Orbit-space inequalities with tolerance.
  bool admissible(double tol = 1e-9) const;
};

std::array<double, 3> hilbert_pi(Complex z1, Complex z2);

/// (v0, pi) of an N = 2 state.
OrbitPoint to_orbit(const CortexState& state);

/// Representative with z1 = sqrt(pi1) >= 0 real and Im z2 >= 0.
CortexState gauge_representative(const OrbitPoint& pt);

/// Polynomial in (lambda, v0, pi1, pi2, pi3); key = exponents in that order.
struct InvariantPoly {
  std::map<std::array<int, 5>, double> terms;

  double eval(double lambda, double v0, double pi1, double pi2, double pi3) const;
  void add(const std::array<int, 5>& key, double c) { terms[key] += c; }
};

struct InvariantValues {
  double b0 = 0.0;  // eps0 M0
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// B0 and the coefficient functions of the equivariant form for a polynomial
/// nonlinearity P (applied to lambda V). `a` and `c` include the -1 decay.
struct OrbitInvariants {
  InvariantPoly b0, a, b, c, d;
  int degree = 0;
  double alpha = 0.0;
  double fit_error = 0.0;
  int j0_sign = -1;
  std::array<double, 2> j_weights{};

  InvariantValues evaluate(double lambda, const OrbitPoint& pt) const;
};

/// Frequency bookkeeping reduction of P(lambda V) for N = 2. `p` are the
/// power-basis coefficients of P. Throws std::logic_error if a monomial does
/// not factor equivariantly.
OrbitInvariants reduce_invariants(const std::vector<double>& p, const ModelSpec& spec);
OrbitInvariants reduce_invariants(const ChebyshevFit& fit, const ModelSpec& spec);

/// Quadrature oracle at an explicit (z1, z2): M_k of f(lambda V), then the 2x2
/// real systems for (a, b) and (c, d). Throws std::invalid_argument if the
/// systems are singular (boundary orbits).
InvariantValues invariant_oracle_at(Complex z1, Complex z2, double v0, const ModelSpec& spec,
                                    const std::function<double(double)>& f, int order = 256);

/// Same at the gauge representative of a strictly interior orbit point.
InvariantValues invariant_oracle(const OrbitPoint& pt, const ModelSpec& spec,
                                 const std::function<double(double)>& f, int order = 256);

/// Orbit-space vector field. `drive_i0` is eps I0 (mean-mode drive only).
/// `c_cross_term` swaps in 2 c pi1 pi2 for 2 b pi1 pi2 in the pi3 equation.
OrbitPoint orbit_rhs(const OrbitPoint& pt, const InvariantValues& v, const ModelSpec& spec,
                     double drive_i0 = 0.0, bool c_cross_term = false);

/// Orbit-space equilibrium problem in (v0, pi1, pi2, pi3) with lambda free.
class OrbitSystem {
 public:
  /// `p` is the power-basis polynomial the invariants were reduced from.
  OrbitSystem(OrbitInvariants inv, std::vector<double> p, ModelSpec spec,
              bool c_cross_term = false);

  const OrbitInvariants& invariants() const { return inv_; }
  const ModelSpec& spec() const { return spec_; }

  Vec residual(const Vec& x, double lambda) const;
  /// Cartesian (5D) stability at the gauge representative using P itself.
  int n_unstable(const Vec& x, double lambda) const;
  /// Same nonlinearity as a Galerkin model (for Cartesian cross-checks).
  GalerkinModel cartesian_model(double lambda) const;
  /// lambda * max|V| at the representative, compared with the fit interval.
  double amplitude(const Vec& x, double lambda) const;

 private:
  OrbitInvariants inv_;
  std::vector<double> p_;
  ModelSpec spec_;
  bool c_cross_;
};

OrbitSystem make_orbit_system(const ChebyshevFit& fit, const ModelSpec& spec,
                              bool c_cross_term = false);

/// Continues orbit-space equilibria in lambda. Points that violate the
/// orbit-space inequalities by more than orbit_tol are rejected.
Branch orbit_continue(const OrbitSystem& sys, const Vec& start, double lambda0, double lo,
                      double hi, const ContinuationConfig& cfg, const Vec& direction,
                      double orbit_tol = 1e-7);

/// Trivial branch, its symmetry-breaking gains, and one bifurcated branch per
/// gain (switched by fixing pi1 or pi2 at a small positive value).
struct OrbitSkeleton {
  Branch trivial;
  std::vector<double> critical_gains;
  std::vector<int> critical_modes;  // 1 or 2
  std::vector<Branch> branches;
};

OrbitSkeleton orbit_skeleton(const OrbitSystem& sys, double lo, double hi,
                             const ContinuationConfig& cfg, double switch_offset = 1e-4);

/// Activity samples of the tuning curve of an orbit-space equilibrium,
/// x_j = -pi/2 + j pi / n. Needs pi1 > 0 or pi2 > 0.
std::vector<double> tuning_curve_n2(const OrbitPoint& pt, const ModelSpec& spec, int n = 256);

/// Number of strict local maxima of periodic samples.
int count_peaks(const std::vector<double>& samples, double rel_tol = 1e-9);

}  // namespace ringmodel
