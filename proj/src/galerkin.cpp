#include "ringmodel/galerkin.hpp"

#include <cmath>
#include <numbers>

namespace ringmodel {

namespace {
constexpr double kPi = std::numbers::pi;

Vec expand_symmetric(const Eigen::Ref<const Vec>& u) {
  const Eigen::Index n = u.size() - 1;
  Vec full = Vec::Zero(1 + 2 * n);
  full(0) = u(0);
  for (Eigen::Index k = 0; k < n; ++k) full(1 + 2 * k) = u(1 + k);
  return full;
}
}  // namespace

Nonlinearity Nonlinearity::for_spec(const ModelSpec& spec) {
  if (spec.sigmoid == SigmoidKind::standard)
    return {[](double x) { return standard_sigmoid(x); },
            [](double x) { return standard_sigmoid_slope(x); }};
  return {[](double x) { return standard_sigmoid(x) - 0.5; },
          [](double x) { return standard_sigmoid_slope(x); }};
}

GalerkinModel::GalerkinModel(ModelSpec spec) : GalerkinModel(spec, Nonlinearity::for_spec(spec)) {}

GalerkinModel::GalerkinModel(ModelSpec spec, Nonlinearity nonlinearity)
    : spec_(std::move(spec)), f_(std::move(nonlinearity)) {
  spec_.validate();
  build_tables();
}

void GalerkinModel::build_tables() {
  rule_ = gauss_legendre(spec_.quadrature_order, -0.5 * kPi, 0.5 * kPi);
  const int n = spec_.quadrature_order;
  const int modes = spec_.n_modes;
  cos_.assign(static_cast<std::size_t>(modes) * n, 0.0);
  sin_.assign(static_cast<std::size_t>(modes) * n, 0.0);
  for (int p = 1; p <= modes; ++p) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      const double y = rule_.nodes[i];
      const double c = std::cos(2.0 * p * y), s = std::sin(2.0 * p * y);
      cos_[(p - 1) * n + i] = c;
      sin_[(p - 1) * n + i] = s;
      cos_[(p - 1) * n + (n - 1 - i)] = c;
      sin_[(p - 1) * n + (n - 1 - i)] = -s;
    }
    if (n % 2 == 1) sin_[(p - 1) * n + n / 2] = 0.0;
  }
  sqrt_j_.resize(modes);
  for (int p = 1; p <= modes; ++p) sqrt_j_[p - 1] = std::sqrt(spec_.weight_magnitude(p));
}

GalerkinModel GalerkinModel::with_gain(double gain) const {
  GalerkinModel m = *this;
  m.spec_.gain = gain;
  return m;
}

GalerkinModel GalerkinModel::with_mu(double mu) const {
  GalerkinModel m = *this;
  m.spec_.homotopy_mu = mu;
  return m;
}

GalerkinModel GalerkinModel::with_threshold(double threshold) const {
  GalerkinModel m = *this;
  m.spec_.threshold = threshold;
  return m;
}

void GalerkinModel::node_voltages(const Eigen::Ref<const Vec>& u, std::vector<double>& out) const {
  const int n = spec_.quadrature_order;
  out.assign(n, u(0));
  for (int p = 1; p <= spec_.n_modes; ++p) {
    const double a = sqrt_j_[p - 1] * u(2 * p - 1);
    const double b = sqrt_j_[p - 1] * u(2 * p);
    const double* c = &cos_[(p - 1) * n];
    const double* s = &sin_[(p - 1) * n];
    for (int i = 0; i < n; ++i) out[i] += a * c[i] + b * s[i];
  }
}

Moments GalerkinModel::moments(const CortexState& state) const {
  const Vec u = state.to_vector();
  const int n = spec_.quadrature_order;
  std::vector<double> v;
  node_voltages(u, v);
  std::vector<double> fs(n);
  for (int i = 0; i < n; ++i) fs[i] = f_.value(spec_.gain * v[i]);

  Moments m;
  m.mk.assign(spec_.n_modes, Complex{});
  // Mirror-paired accumulation keeps the reflection-invariant subspace exact.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    m.m0 += rule_.weights[i] * (fs[i] + fs[j]);
  }
  if (n % 2 == 1) m.m0 += rule_.weights[n / 2] * fs[n / 2];
  m.m0 /= kPi;
  for (int k = 1; k <= spec_.n_modes; ++k) {
    const double* c = &cos_[(k - 1) * n];
    const double* s = &sin_[(k - 1) * n];
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n / 2; ++i) {
      const int j = n - 1 - i;
      re += rule_.weights[i] * c[i] * (fs[i] + fs[j]);
      im += rule_.weights[i] * s[i] * (fs[i] - fs[j]);
    }
    if (n % 2 == 1) re += rule_.weights[n / 2] * c[n / 2] * fs[n / 2];
    m.mk[k - 1] = {re / kPi, im / kPi};
  }
  return m;
}

CortexState GalerkinModel::rhs(const CortexState& state, const DriveFrame& drive) const {
  return CortexState::from_vector(rhs(state.to_vector(), drive));
}

Vec GalerkinModel::rhs(const Eigen::Ref<const Vec>& u, const DriveFrame& drive) const {
  const CortexState state = CortexState::from_vector(u);
  const Moments m = moments(state);
  const double tau = spec_.time_constant;
  const double eps = drive.contrast;
  Vec du(u.size());
  du(0) = (-u(0) + spec_.j0_sign * m.m0 + spec_.v0_offset() + eps * drive.i0) / tau;
  for (int k = 1; k <= spec_.n_modes; ++k) {
    const Complex ik = drive.ik.empty() ? Complex{} : drive.ik[k - 1];
    const Complex dz =
        -state.z[k - 1] + static_cast<double>(spec_.weight_sign(k)) * sqrt_j_[k - 1] * m.mk[k - 1] +
        eps * ik;
    du(2 * k - 1) = dz.real() / tau;
    du(2 * k) = dz.imag() / tau;
  }
  return du;
}

Mat GalerkinModel::jacobian(const Eigen::Ref<const Vec>& u) const {
  const int n = spec_.quadrature_order;
  const int dim = dimension();
  const double lam = spec_.gain;
  std::vector<double> v;
  node_voltages(u, v);
  // g_i = lambda f'(lambda V_i) w_i / pi
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lam * f_.slope(lam * v[i]) * rule_.weights[i] / kPi;

  // dV_i/du_j basis: column 0 -> 1, column (2p-1) -> sqrtJ_p cos, column 2p -> sqrtJ_p sin
  auto basis = [&](int col, int i) -> double {
    if (col == 0) return 1.0;
    const int p = (col + 1) / 2;
    const double* t = (col % 2 == 1) ? &cos_[(p - 1) * n] : &sin_[(p - 1) * n];
    return sqrt_j_[p - 1] * t[i];
  };

  Mat jac = Mat::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    double d0 = 0.0;
    for (int i = 0; i < n; ++i) d0 += g[i] * basis(col, i);
    jac(0, col) = spec_.j0_sign * d0;
    for (int k = 1; k <= spec_.n_modes; ++k) {
      const double* c = &cos_[(k - 1) * n];
      const double* s = &sin_[(k - 1) * n];
      double re = 0.0, im = 0.0;
      for (int i = 0; i < n; ++i) {
        const double gb = g[i] * basis(col, i);
        re += gb * c[i];
        im += gb * s[i];
      }
      const double scale = spec_.weight_sign(k) * sqrt_j_[k - 1];
      jac(2 * k - 1, col) = scale * re;
      jac(2 * k, col) = scale * im;
    }
  }
  jac -= Mat::Identity(dim, dim);
  return jac / spec_.time_constant;
}

Vec GalerkinModel::symmetric_rhs(const Eigen::Ref<const Vec>& u, const DriveFrame& drive) const {
  const Vec full = rhs(expand_symmetric(u), drive);
  Vec out(u.size());
  out(0) = full(0);
  for (Eigen::Index k = 1; k < u.size(); ++k) out(k) = full(2 * k - 1);
  return out;
}

Mat GalerkinModel::symmetric_jacobian(const Eigen::Ref<const Vec>& u) const {
  const Mat full = jacobian(expand_symmetric(u));
  const Eigen::Index m = u.size();
  Mat out(m, m);
  auto idx = [](Eigen::Index r) { return r == 0 ? Eigen::Index{0} : 2 * r - 1; };
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = full(idx(r), idx(c));
  return out;
}

Vec GalerkinModel::gain_derivative(const Eigen::Ref<const Vec>& u) const {
  const int n = spec_.quadrature_order;
  const double lam = spec_.gain;
  std::vector<double> v;
  node_voltages(u, v);
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) h[i] = f_.slope(lam * v[i]) * v[i] * rule_.weights[i] / kPi;
  Vec d = Vec::Zero(dimension());
  double d0 = 0.0;
  for (int i = 0; i < n; ++i) d0 += h[i];
  d(0) = spec_.j0_sign * d0;
  for (int k = 1; k <= spec_.n_modes; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      re += h[i] * cos_[(k - 1) * n + i];
      im += h[i] * sin_[(k - 1) * n + i];
    }
    const double scale = spec_.weight_sign(k) * sqrt_j_[k - 1];
    d(2 * k - 1) = scale * re;
    d(2 * k) = scale * im;
  }
  return d / spec_.time_constant;
}

}  // namespace ringmodel
