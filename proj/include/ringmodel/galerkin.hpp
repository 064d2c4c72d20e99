#pragma once

#include <functional>
#include <memory>

#include "ringmodel/model.hpp"
#include "ringmodel/quadrature.hpp"

namespace ringmodel {

/// Scalar firing nonlinearity f with its slope f'. Defaults to the
/// spec-selected sigmoid; the orbit-space code swaps in a polynomial.
class Nonlinearity {
 public:
  using Fn = std::function<double(double)>;

  Nonlinearity(Fn value, Fn slope) : value_(std::move(value)), slope_(std::move(slope)) {}

  /// S for standard, S0 for centered and homotopy (the mu shift is carried
  /// by ModelSpec::v0_offset because it only touches the mean mode).
  static Nonlinearity for_spec(const ModelSpec& spec);

  double value(double x) const { return value_(x); }
  double slope(double x) const { return slope_(x); }

 private:
  Fn value_;
  Fn slope_;
};

/// Fourier moments M_k = (1/pi) int f(lambda V(y)) e^{2iky} dy, k = 0..N.
struct Moments {
  double m0 = 0.0;
  double m0_imag = 0.0;  // imaginary residue of the k = 0 moment (quadrature check)
  std::vector<Complex> mk;
};

/// Galerkin vector field of the ring model truncated to the connectivity
/// modes, evaluated with a fixed Gauss-Legendre rule on [-pi/2, pi/2].
class GalerkinModel {
 public:
  explicit GalerkinModel(ModelSpec spec);
  GalerkinModel(ModelSpec spec, Nonlinearity nonlinearity);

  const ModelSpec& spec() const { return spec_; }
  int n_modes() const { return spec_.n_modes; }
  int dimension() const { return 1 + 2 * spec_.n_modes; }

  GalerkinModel with_gain(double gain) const;
  GalerkinModel with_mu(double mu) const;
  GalerkinModel with_threshold(double threshold) const;

  Moments moments(const CortexState& state) const;

  /// (v0', z_1', ..., z_N') for the given drive.
  CortexState rhs(const CortexState& state, const DriveFrame& drive) const;

  /// Real-layout vector field and its analytic Jacobian.
  Vec rhs(const Eigen::Ref<const Vec>& u, const DriveFrame& drive) const;
  Mat jacobian(const Eigen::Ref<const Vec>& u) const;

  /// Same field restricted to the reflection-invariant subspace Im z_k = 0.
  /// Only meaningful when every drive coefficient I_k is real.
  Vec symmetric_rhs(const Eigen::Ref<const Vec>& u, const DriveFrame& drive) const;
  Mat symmetric_jacobian(const Eigen::Ref<const Vec>& u) const;

  /// d(rhs)/d(lambda) in the real layout (drive-independent).
  Vec gain_derivative(const Eigen::Ref<const Vec>& u) const;

 private:
  void build_tables();
  // Voltage at every quadrature node.
  void node_voltages(const Eigen::Ref<const Vec>& u, std::vector<double>& out) const;

  ModelSpec spec_;
  Nonlinearity f_;
  QuadratureRule rule_;
  // cos(2 p y_i), sin(2 p y_i) for p = 1..N, row-major [p-1][i]
  std::vector<double> cos_, sin_;
  std::vector<double> sqrt_j_;
};

}  // namespace ringmodel
