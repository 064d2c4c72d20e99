#include "ringmodel/model.hpp"

#include <cmath>
#include <numbers>

namespace ringmodel {

namespace {
// e^{i a} with the rounding residue of sin/cos at multiples of pi/2 removed,
// so that x0 = pi/2 gives an exactly real drive.
Complex unit_phase(double a) {
  Complex c = std::polar(1.0, a);
  if (std::abs(c.imag()) < 1e-15) c.imag(0.0);
  if (std::abs(c.real()) < 1e-15) c.real(0.0);
  return c;
}
}  // namespace

std::string to_string(SigmoidKind kind) {
  switch (kind) {
    case SigmoidKind::standard: return "standard";
    case SigmoidKind::centered: return "centered";
    case SigmoidKind::homotopy: return "homotopy";
  }
  return "standard";
}

SigmoidKind sigmoid_kind_from_string(const std::string& name) {
  if (name == "standard") return SigmoidKind::standard;
  if (name == "centered") return SigmoidKind::centered;
  if (name == "homotopy") return SigmoidKind::homotopy;
  throw std::invalid_argument("unknown sigmoid kind '" + name + "'");
}

void ModelSpec::validate() const {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (static_cast<int>(j_weights.size()) != n_modes)
    throw std::invalid_argument("j_weights must have n_modes entries");
  if (j0_sign != -1 && j0_sign != 1) throw std::invalid_argument("j0_sign must be -1 or +1");
  if (!(time_constant > 0.0)) throw std::invalid_argument("time_constant must be > 0");
  if (!(gain >= 0.0)) throw std::invalid_argument("gain must be >= 0");
  if (!(homotopy_mu >= 0.0 && homotopy_mu <= 1.0))
    throw std::invalid_argument("homotopy_mu must lie in [0, 1]");
  if (quadrature_order < kMinQuadratureOrder)
    throw std::invalid_argument("quadrature_order below the minimum of " +
                                std::to_string(kMinQuadratureOrder));
  for (double j : j_weights)
    if (!std::isfinite(j)) throw std::invalid_argument("j_weights must be finite");
}

double ModelSpec::v0_offset() const {
  switch (sigmoid) {
    case SigmoidKind::standard: return -threshold;
    case SigmoidKind::centered: return 0.0;
    case SigmoidKind::homotopy: return homotopy_mu * (0.5 * j0_sign - threshold);
  }
  return 0.0;
}

double standard_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double standard_sigmoid_slope(double x) {
  const double s = standard_sigmoid(x);
  return s * (1.0 - s);
}

double sigmoid_eval(double x, const ModelSpec& spec) {
  switch (spec.sigmoid) {
    case SigmoidKind::standard: return standard_sigmoid(x);
    case SigmoidKind::centered: return standard_sigmoid(x) - 0.5;
    case SigmoidKind::homotopy:
      return standard_sigmoid(x) - 0.5 + spec.homotopy_mu * (0.5 - spec.threshold);
  }
  return standard_sigmoid(x);
}

double sigmoid_slope(double x, const ModelSpec&) { return standard_sigmoid_slope(x); }

Vec CortexState::to_vector() const {
  Vec u(1 + 2 * z.size());
  u(0) = v0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    u(1 + 2 * k) = z[k].real();
    u(2 + 2 * k) = z[k].imag();
  }
  return u;
}

CortexState CortexState::from_vector(const Eigen::Ref<const Vec>& u) {
  if (u.size() < 3 || u.size() % 2 == 0)
    throw std::invalid_argument("CortexState::from_vector: expected odd length >= 3");
  CortexState s;
  s.v0 = u(0);
  const auto n = (u.size() - 1) / 2;
  s.z.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) s.z[k] = {u(1 + 2 * k), u(2 + 2 * k)};
  return s;
}

Vec CortexState::to_symmetric_chart() const {
  Vec u(1 + z.size());
  u(0) = v0;
  for (std::size_t k = 0; k < z.size(); ++k) u(1 + k) = z[k].real();
  return u;
}

CortexState CortexState::from_symmetric_chart(const Eigen::Ref<const Vec>& u) {
  if (u.size() < 2) throw std::invalid_argument("from_symmetric_chart: expected length >= 2");
  CortexState s;
  s.v0 = u(0);
  s.z.resize(u.size() - 1);
  for (Eigen::Index k = 1; k < u.size(); ++k) s.z[k - 1] = {u(k), 0.0};
  return s;
}

DriveFrame lgn_frame(double beta, double x0, double epsilon, const ModelSpec& spec,
                     double second_mode_ratio) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (spec.n_modes < 1 || spec.weight_magnitude(1) == 0.0)
    throw std::invalid_argument("|J_1| must be non-zero to normalize the drive");
  DriveFrame f = DriveFrame::none(spec.n_modes);
  f.i0 = 1.0 - beta;
  f.contrast = epsilon;
  f.ik[0] = beta / std::sqrt(spec.weight_magnitude(1)) * unit_phase(2.0 * x0);
  if (second_mode_ratio != 0.0) {
    if (spec.n_modes < 2 || spec.weight_magnitude(2) == 0.0)
      throw std::invalid_argument("second-mode drive needs a non-zero J_2");
    f.ik[1] = second_mode_ratio * beta / std::sqrt(spec.weight_magnitude(2)) *
              unit_phase(4.0 * x0);
  }
  return f;
}

Stimulus make_lgn_stimulus(double beta, double x0, double epsilon, const ModelSpec& spec,
                           double second_mode_ratio) {
  return {lgn_frame(beta, x0, epsilon, spec, second_mode_ratio), {}};
}

DriveFrame blend(const DriveFrame& a, const DriveFrame& b, double psi) {
  if (a.ik.size() != b.ik.size()) throw std::invalid_argument("blend: mode count mismatch");
  // Contrast-weighted blend of eps*I, expressed with the contrast of `a`
  // unless both frames are silent.
  DriveFrame out = DriveFrame::none(static_cast<int>(a.ik.size()));
  const double ea = a.contrast, eb = b.contrast;
  const double e = (1.0 - psi) * ea + psi * eb;
  out.contrast = e;
  if (e == 0.0) return out;
  out.i0 = ((1.0 - psi) * ea * a.i0 + psi * eb * b.i0) / e;
  for (std::size_t k = 0; k < a.ik.size(); ++k)
    out.ik[k] = ((1.0 - psi) * ea * a.ik[k] + psi * eb * b.ik[k]) / e;
  return out;
}

double reconstruct_drive(const DriveFrame& frame, const ModelSpec& spec, double x) {
  double v = frame.i0;
  for (std::size_t k = 0; k < frame.ik.size(); ++k) {
    const int p = static_cast<int>(k) + 1;
    v += std::sqrt(spec.weight_magnitude(p)) *
         (frame.ik[k] * std::polar(1.0, -2.0 * p * x)).real();
  }
  return frame.contrast * v;
}

double reconstruct_voltage(const CortexState& state, const ModelSpec& spec, double x) {
  double v = state.v0;
  for (std::size_t k = 0; k < state.z.size(); ++k) {
    const int p = static_cast<int>(k) + 1;
    v += std::sqrt(spec.weight_magnitude(p)) * (state.z[k] * std::polar(1.0, -2.0 * p * x)).real();
  }
  return v;
}

double reconstruct_activity(const CortexState& state, const ModelSpec& spec, double x) {
  return sigmoid_eval(spec.gain * reconstruct_voltage(state, spec, x), spec);
}

double wrap_orientation(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle + 0.5 * pi, pi);
  if (a <= 0.0) a += pi;
  return a - 0.5 * pi;
}

double peak_angle(const CortexState& state) {
  if (state.z.empty()) return 0.0;
  return wrap_orientation(0.5 * std::arg(state.z[0]));
}

CortexState group_act(const CortexState& state, double gamma, bool reflect) {
  CortexState out = state;
  for (std::size_t k = 0; k < out.z.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    out.z[k] *= std::polar(1.0, 2.0 * kk * gamma);
    if (reflect) out.z[k] = std::conj(out.z[k]);
  }
  return out;
}

}  // namespace ringmodel
