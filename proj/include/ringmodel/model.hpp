#pragma once

// Ring model of orientation tuning: parameters, reduced cortical state,
// LGN drive and the O(2) action on Galerkin coordinates.
//
// Conventions used throughout the library:
//   V(x) = v0 + sum_p sqrt|J_p| Re(z_p e^{-2ipx}),  x in [-pi/2, pi/2)
//   I(x) = I0 + sum_k sqrt|J_k| Re(I_k e^{-2ikx})
// so z_p = rho e^{2i phi} peaks at x = phi, and the drive enters the z_k
// equation as +eps I_k without conjugation.

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ringmodel {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SigmoidKind { standard, centered, homotopy };

std::string to_string(SigmoidKind kind);
SigmoidKind sigmoid_kind_from_string(const std::string& name);

/// All parameters of the ring model. Connectivity weights are stored signed;
/// `weight_magnitude` / `weight_sign` give the |J_k|, eps_k split.
struct ModelSpec {
  int n_modes = 1;
  int j0_sign = -1;                  // J0 = eps0 in {-1, +1}
  std::vector<double> j_weights{1.5};  // J_1 .. J_N
  double gain = 1.0;                 // lambda
  double threshold = 0.0;            // theta
  double time_constant = 1.0;        // tau
  double homotopy_mu = 1.0;          // mu
  SigmoidKind sigmoid = SigmoidKind::standard;
  int quadrature_order = 192;

  static constexpr int kMinQuadratureOrder = 40;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  double weight_magnitude(int k) const { return std::abs(j_weights.at(k - 1)); }
  int weight_sign(int k) const { return j_weights.at(k - 1) < 0.0 ? -1 : 1; }

  /// Constant added to the v0 equation by the threshold/sigmoid offset:
  /// -theta (standard), 0 (centered), mu (eps0/2 - theta) (homotopy).
  double v0_offset() const;
};

double standard_sigmoid(double x);
double standard_sigmoid_slope(double x);

/// S, S0 = S - 1/2 or S_(mu) = S0 + mu (1/2 - theta), selected by the spec.
double sigmoid_eval(double x, const ModelSpec& spec);
double sigmoid_slope(double x, const ModelSpec& spec);

/// Galerkin coordinates (v0, z_1..z_N) of the cortical voltage.
struct CortexState {
  double v0 = 0.0;
  std::vector<Complex> z;

  CortexState() = default;
  CortexState(double v0_, std::vector<Complex> z_) : v0(v0_), z(std::move(z_)) {}
  static CortexState zero(int n_modes) { return {0.0, std::vector<Complex>(n_modes)}; }

  int n_modes() const { return static_cast<int>(z.size()); }

  /// Real layout [v0, Re z1, Im z1, ..., Re zN, Im zN].
  Vec to_vector() const;
  static CortexState from_vector(const Eigen::Ref<const Vec>& u);

  /// Reflection-symmetric chart [v0, Re z1, ..., Re zN] (Im z_k = 0).
  Vec to_symmetric_chart() const;
  static CortexState from_symmetric_chart(const Eigen::Ref<const Vec>& u);
};

/// Instantaneous LGN drive in Galerkin coordinates.
struct DriveFrame {
  double i0 = 0.0;
  std::vector<Complex> ik;
  double contrast = 0.0;

  static DriveFrame none(int n_modes) { return {0.0, std::vector<Complex>(n_modes), 0.0}; }
};

/// Static drive plus an optional time schedule overriding it.
struct Stimulus {
  DriveFrame frame;
  std::function<DriveFrame(double)> schedule;

  DriveFrame at(double t) const { return schedule ? schedule(t) : frame; }
  bool is_static() const { return !schedule; }
  static Stimulus none(int n_modes) { return {DriveFrame::none(n_modes), {}}; }
};

/// Canonical LGN drive 1 - beta + beta cos(2(x - x0)) at contrast epsilon.
/// `second_mode_ratio` r adds sqrt|J_2| I_2 = r beta e^{4 i x0}.
DriveFrame lgn_frame(double beta, double x0, double epsilon, const ModelSpec& spec,
                     double second_mode_ratio = 0.0);
Stimulus make_lgn_stimulus(double beta, double x0, double epsilon, const ModelSpec& spec,
                           double second_mode_ratio = 0.0);

/// Convex blend (1 - psi) a + psi b of two frames with equal mode counts.
DriveFrame blend(const DriveFrame& a, const DriveFrame& b, double psi);

/// eps * I(x) for the frame.
double reconstruct_drive(const DriveFrame& frame, const ModelSpec& spec, double x);

double reconstruct_voltage(const CortexState& state, const ModelSpec& spec, double x);
/// Firing activity S(lambda V(x)); V already carries the drive and threshold.
double reconstruct_activity(const CortexState& state, const ModelSpec& spec, double x);

/// Orientation of the dominant mode, 1/2 arg z1, in (-pi/2, pi/2].
double peak_angle(const CortexState& state);

/// T_gamma: z_k -> e^{2ik gamma} z_k, followed by R (conjugation) if `reflect`.
CortexState group_act(const CortexState& state, double gamma, bool reflect = false);

/// Wraps an orientation difference into (-pi/2, pi/2].
double wrap_orientation(double angle);

}  // namespace ringmodel
