#include "ringmodel/ring1.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ringmodel/galerkin.hpp"

namespace ringmodel {

namespace {
constexpr double kPi = std::numbers::pi;

const QuadratureRule& polar_rule(int order) {
  thread_local int cached = -1;
  thread_local QuadratureRule rule;
  if (cached != order) {
    rule = gauss_legendre(order, -0.5 * kPi, 0.5 * kPi);
    cached = order;
  }
  return rule;
}

void require_single_mode(const ModelSpec& spec) {
  if (spec.n_modes != 1) throw std::invalid_argument("ring1 analysis needs n_modes = 1");
}

double logit(double u) { return std::log(u) - std::log1p(-u); }
}  // namespace

std::pair<double, double> polar_moments(double v0, double rho, const ModelSpec& spec) {
  const auto& rule = polar_rule(spec.quadrature_order);
  const Nonlinearity f = Nonlinearity::for_spec(spec);
  const double amp = std::sqrt(spec.weight_magnitude(1)) * rho;
  double b0 = 0.0, b1 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double c = std::cos(2.0 * rule.nodes[i]);
    const double s = f.value(spec.gain * (v0 + amp * c));
    b0 += rule.weights[i] * s;
    b1 += rule.weights[i] * s * c;
  }
  return {b0 / kPi, b1 / kPi};
}

PolarState polar_rhs(const PolarState& p, const ModelSpec& spec, double beta, double epsilon) {
  require_single_mode(spec);
  if (p.rho == 0.0) throw std::invalid_argument("polar_rhs: phase equation undefined at rho = 0");
  const auto [b0, b1] = polar_moments(p.v0, p.rho, spec);
  const double sj = std::sqrt(spec.weight_magnitude(1));
  const double force = epsilon * beta / sj;
  PolarState d;
  d.v0 = (-p.v0 + spec.j0_sign * b0 + spec.v0_offset() + epsilon * (1.0 - beta)) / spec.time_constant;
  d.rho = (-p.rho + spec.weight_sign(1) * sj * b1 + force * std::cos(2.0 * p.phi)) / spec.time_constant;
  d.phi = (-force * std::sin(2.0 * p.phi)) / (2.0 * p.rho * spec.time_constant);
  return d;
}

Vec polar_equilibrium_residual(Parity parity, double v0, double rho, const ModelSpec& spec,
                               double beta, double epsilon) {
  require_single_mode(spec);
  const auto [b0, b1] = polar_moments(v0, rho, spec);
  const double sj = std::sqrt(spec.weight_magnitude(1));
  const double force = (parity == Parity::even ? 1.0 : -1.0) * epsilon * beta / sj;
  Vec r(2);
  r(0) = -v0 + spec.j0_sign * b0 + spec.v0_offset() + epsilon * (1.0 - beta);
  r(1) = -rho + spec.weight_sign(1) * sj * b1 + force;
  return r / spec.time_constant;
}

NewtonResult solve_polar_equilibrium(Parity parity, double v0_guess, double rho_guess,
                                     const ModelSpec& spec, double beta, double epsilon,
                                     const NewtonConfig& cfg) {
  spec.validate();
  const auto f = [&](const Vec& x) {
    return polar_equilibrium_residual(parity, x(0), x(1), spec, beta, epsilon);
  };
  return newton_solve(f, Vec((Vec(2) << v0_guess, rho_guess).finished()), cfg);
}

CortexState polar_to_state(Parity parity, double v0, double rho) {
  return {v0, {Complex(parity == Parity::even ? rho : -rho, 0.0)}};
}

Branch continue_polar_branch(Parity parity, double v0, double rho, const ModelSpec& spec,
                             double beta, double epsilon, double lo, double hi,
                             const ContinuationConfig& cfg, int direction) {
  spec.validate();
  require_single_mode(spec);
  CurveProblem cp;
  cp.residual = [parity, spec, beta, epsilon](const Vec& x) {
    ModelSpec s = spec;
    s.gain = x(2);
    return polar_equilibrium_residual(parity, x(0), x(1), s, beta, epsilon);
  };
  cp.n_unstable = [&cp](const Vec& x) {
    const auto f = [&](const Vec& y) {
      Vec z = x;
      z.head(2) = y;
      return cp.residual(z);
    };
    const Mat j = fd_jacobian(f, Vec(x.head(2)));
    Eigen::EigenSolver<Mat> es(j, false);
    int n = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > 1e-8) ++n;
    return n;
  };
  cp.fold_components = {2};
  cp.box = {{2, lo, hi}, {1, -50.0, 50.0}, {0, -50.0, 50.0}};
  const Vec x0 = (Vec(3) << v0, rho, spec.gain).finished();
  Vec hint = Vec::Zero(3);
  hint(2) = direction >= 0 ? 1.0 : -1.0;
  const CurveResult curve = continue_curve(cp, x0, hint, cfg);
  return to_branch(curve, {2}, {0, 1}, {"lambda"},
                   {"v0", parity == Parity::even ? "rho_e" : "rho_o"});
}

std::optional<PitchforkPoint> pitchfork_condition(double j1, double theta, int eps0,
                                                  double lambda_max) {
  if (!(j1 > 0.0)) throw std::invalid_argument("pitchfork_condition: J1 must be > 0");
  if (eps0 != -1 && eps0 != 1) throw std::invalid_argument("pitchfork_condition: eps0 must be +-1");
  // U = S(lambda v0) in (0, 1); lambda(U) = 2 / (J1 U (1 - U)), v0(U) = eps0 U - theta,
  // and the fixed point requires lambda(U) v0(U) = logit(U).
  const auto lam = [&](double u) { return 2.0 / (j1 * u * (1.0 - u)); };
  const auto h = [&](double u) { return lam(u) * (eps0 * u - theta) - logit(u); };
  std::optional<PitchforkPoint> best;
  const int n = 16000;
  const double t_lo = -40.0, t_hi = 40.0;
  auto u_at = [&](int i) { return standard_sigmoid(t_lo + (t_hi - t_lo) * i / n); };
  double ua = u_at(0), ha = h(ua);
  for (int i = 1; i <= n; ++i) {
    const double ub = u_at(i), hb = h(ub);
    if (ha == 0.0 || (ha > 0.0) != (hb > 0.0)) {
      double lo = ua, hi = ub, hl = ha;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if ((hm > 0.0) == (hl > 0.0)) {
          lo = mid;
          hl = hm;
        } else {
          hi = mid;
        }
      }
      const double u = 0.5 * (lo + hi);
      const double l = lam(u);
      if (l <= lambda_max && (!best || l < best->lambda)) best = PitchforkPoint{l, eps0 * u - theta};
    }
    ua = ub;
    ha = hb;
  }
  return best;
}

ThresholdGrids ThresholdGrids::defaults() {
  ThresholdGrids g;
  for (int i = 0; i <= 20; ++i) g.theta.push_back(0.05 * i);
  for (int i = 0; i <= 120; ++i) g.j1.push_back(0.1 * i);
  for (int i = 0; i <= 3000; ++i) g.lambda.push_back(0.01 * i);
  return g;
}

bool threshold_exists(double theta, double j1, int eps0, const std::vector<double>& lambda_grid) {
  if (j1 <= 0.0 || lambda_grid.empty()) return false;
  const double lam_min = 8.0 / j1;
  // E along the closed path U_- (lambda descending) -> junction -> U_+ (ascending).
  const auto e_at = [&](double lam, int branch) {
    const double disc = std::sqrt(std::max(0.0, 1.0 - lam_min / lam));
    if (eps0 < 0) {
      const double u = 0.5 * (-1.0 + branch * disc);  // u = v0 + theta = -S
      return u + standard_sigmoid(lam * (u - theta));
    }
    const double u = 0.5 * (1.0 + branch * disc);  // u = v0 + theta = S
    return u - standard_sigmoid(lam * (u - theta));
  };
  std::vector<double> lams;
  for (double l : lambda_grid)
    if (l >= lam_min) lams.push_back(l);
  if (lams.empty()) return false;
  if (lams.front() > lam_min) lams.insert(lams.begin(), lam_min);

  struct Sample {
    double lam;
    int branch;
    double e;
  };
  std::vector<Sample> path;
  for (auto it = lams.rbegin(); it != lams.rend(); ++it) path.push_back({*it, -1, e_at(*it, -1)});
  for (std::size_t i = 1; i < lams.size(); ++i) path.push_back({lams[i], +1, e_at(lams[i], +1)});

  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].e == 0.0) return true;
    if (i + 1 < path.size() && (path[i].e > 0.0) != (path[i + 1].e > 0.0)) return true;
  }
  // Local refinement around interior minima of |E| (pairs of roots inside one cell).
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const double a = std::abs(path[i - 1].e), b = std::abs(path[i].e), c = std::abs(path[i + 1].e);
    if (!(b <= a && b <= c)) continue;
    const double sgn = path[i].e > 0.0 ? 1.0 : -1.0;
    for (std::size_t side : {i - 1, i + 1}) {
      const Sample& s0 = path[i];
      const Sample& s1 = path[side];
      const int branch = (s0.branch == s1.branch) ? s0.branch : 0;
      for (int k = 1; k < 64; ++k) {
        const double lam = s0.lam + (s1.lam - s0.lam) * k / 64.0;
        const double e = branch == 0 ? e_at(lam, s1.branch) : e_at(lam, branch);
        if (e * sgn <= 0.0) return true;
      }
    }
  }
  return false;
}

ThresholdBoundary threshold_boundary(int eps0, const ThresholdGrids& grids, double j1_tol) {
  if (grids.theta.empty() || grids.j1.empty() || grids.lambda.empty())
    throw std::invalid_argument("threshold_boundary: empty grid");
  if (eps0 != -1 && eps0 != 1) throw std::invalid_argument("threshold_boundary: eps0 must be +-1");
  ThresholdBoundary out;
  out.eps0 = eps0;
  for (double theta : grids.theta) {
    double j1_min = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < grids.j1.size(); ++i) {
      if (!threshold_exists(theta, grids.j1[i], eps0, grids.lambda)) continue;
      if (i == 0) {
        j1_min = grids.j1[0];
        break;
      }
      double lo = grids.j1[i - 1], hi = grids.j1[i];
      while (hi - lo > j1_tol) {
        const double mid = 0.5 * (lo + hi);
        if (threshold_exists(theta, mid, eps0, grids.lambda)) hi = mid; else lo = mid;
      }
      j1_min = hi;
      break;
    }
    out.samples.emplace_back(theta, j1_min);
  }
  return out;
}

double halfwidth_argument(double a, double b) {
  return -(a + std::log1p(2.0 * std::exp(-a - b))) / b;
}

std::optional<double> tuning_halfwidth(double v0f, double pi1f, double lambda, double theta,
                                       double j1) {
  const double a = lambda * (v0f - theta);
  const double b = lambda * std::sqrt(pi1f * j1);
  if (!(b > 0.0)) throw std::invalid_argument("tuning_halfwidth: b must be > 0");
  const double f = halfwidth_argument(a, b);
  if (!(f >= -1.0 && f <= 1.0)) return std::nullopt;
  return 0.5 * std::acos(f);
}

std::optional<double> state_halfwidth(const CortexState& state, const ModelSpec& spec) {
  if (state.z.empty()) throw std::invalid_argument("state_halfwidth: no modes");
  const double pi1 = std::norm(state.z[0]);
  return tuning_halfwidth(state.v0 + spec.threshold, pi1, spec.gain, spec.threshold,
                          spec.weight_magnitude(1));
}

}  // namespace ringmodel
