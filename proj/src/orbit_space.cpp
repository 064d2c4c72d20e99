#include "ringmodel/orbit_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ringmodel/equilibria.hpp"
#include "ringmodel/errors.hpp"
#include "ringmodel/integrate.hpp"
#include "ringmodel/quadrature.hpp"

namespace ringmodel {

namespace {
constexpr double kPi = std::numbers::pi;

using PiKey = std::array<int, 3>;
using PiPoly = std::map<PiKey, double>;

// W^t = P_t + Q_t W with W = z1^2 conj(z2); W satisfies W^2 = 2 pi3 W - pi1^2 pi2.
struct PowerTable {
  std::vector<PiPoly> p, q;

  explicit PowerTable(int tmax) {
    p.resize(tmax + 1);
    q.resize(tmax + 1);
    p[0][{0, 0, 0}] = 1.0;
    for (int t = 0; t < tmax; ++t) {
      for (const auto& [k, v] : q[t]) {
        p[t + 1][{k[0] + 2, k[1] + 1, k[2]}] -= v;
        q[t + 1][{k[0], k[1], k[2] + 1}] += 2.0 * v;
      }
      for (const auto& [k, v] : p[t]) q[t + 1][k] += v;
    }
  }
};

// Invariant cofactor z1^p conj(z1)^q z2^r conj(z2)^s (zero net frequency)
// as R + S W with R, S polynomials in pi.
std::pair<PiPoly, PiPoly> reduce_cofactor(int p, int q, int r, int s, const PowerTable& tab) {
  if (p - q + 2 * (r - s) != 0) throw std::logic_error("cofactor has non-zero frequency");
  const int m1 = std::min(p, q), m2 = std::min(r, s);
  p -= m1;
  q -= m1;
  r -= m2;
  s -= m2;
  PiPoly rr, ss;
  auto shift = [&](const PiPoly& src, PiPoly& dst, double f) {
    for (const auto& [k, v] : src) dst[{k[0] + m1, k[1] + m2, k[2]}] += f * v;
  };
  if (p == 0 && q == 0 && r == 0 && s == 0) {
    rr[{m1, m2, 0}] = 1.0;
  } else if (q == 0 && r == 0 && p == 2 * s) {
    const int t = s;
    if (t >= static_cast<int>(tab.p.size())) throw std::logic_error("power table too short");
    shift(tab.p[t], rr, 1.0);
    shift(tab.q[t], ss, 1.0);
  } else if (p == 0 && s == 0 && q == 2 * r) {
    // conj(W)^t = (P_t + 2 pi3 Q_t) - Q_t W
    const int t = r;
    if (t >= static_cast<int>(tab.p.size())) throw std::logic_error("power table too short");
    shift(tab.p[t], rr, 1.0);
    PiPoly q3;
    for (const auto& [k, v] : tab.q[t]) q3[{k[0], k[1], k[2] + 1}] += 2.0 * v;
    shift(q3, rr, 1.0);
    shift(tab.q[t], ss, -1.0);
  } else {
    throw std::logic_error("cofactor does not reduce to the Hilbert basis");
  }
  return {rr, ss};
}

void add_scaled(InvariantPoly& dst, const PiPoly& src, double c, int lam, int e, int d1 = 0,
                int d2 = 0, int d3 = 0) {
  for (const auto& [k, v] : src) dst.add({lam, e, k[0] + d1, k[1] + d2, k[2] + d3}, c * v);
}

void add_poly(InvariantPoly& dst, const InvariantPoly& src, double c, int d1 = 0, int d2 = 0,
              int d3 = 0) {
  for (const auto& [k, v] : src.terms) dst.add({k[0], k[1], k[2] + d1, k[3] + d2, k[4] + d3}, c * v);
}

void prune(InvariantPoly& p) {
  for (auto it = p.terms.begin(); it != p.terms.end();)
    it = it->second == 0.0 ? p.terms.erase(it) : std::next(it);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void require_two_modes(const ModelSpec& spec) {
  if (spec.n_modes != 2) throw std::invalid_argument("orbit space needs n_modes = 2");
  if (spec.weight_magnitude(1) == 0.0 || spec.weight_magnitude(2) == 0.0)
    throw std::invalid_argument("orbit space needs non-zero J1 and J2");
}
}  // namespace

Vec OrbitPoint::to_vector() const { return (Vec(4) << v0, pi1, pi2, pi3).finished(); }

OrbitPoint OrbitPoint::from_vector(const Eigen::Ref<const Vec>& x) {
  if (x.size() != 4) throw std::invalid_argument("OrbitPoint::from_vector: expected 4 entries");
  return {x(0), x(1), x(2), x(3)};
}

bool OrbitPoint::admissible(double tol) const {
  return pi1 >= -tol && pi2 >= -tol && pi3 * pi3 <= pi1 * pi1 * pi2 + tol;
}

std::array<double, 3> hilbert_pi(Complex z1, Complex z2) {
  return {std::norm(z1), std::norm(z2), (z1 * z1 * std::conj(z2)).real()};
}

OrbitPoint to_orbit(const CortexState& state) {
  if (state.n_modes() != 2) throw std::invalid_argument("to_orbit: expected two modes");
  const auto pi = hilbert_pi(state.z[0], state.z[1]);
  return {state.v0, pi[0], pi[1], pi[2]};
}

CortexState gauge_representative(const OrbitPoint& pt) {
  const double pi1 = std::max(0.0, pt.pi1), pi2 = std::max(0.0, pt.pi2);
  if (pi1 == 0.0) return {pt.v0, {Complex{}, Complex(std::sqrt(pi2), 0.0)}};
  const double im = std::sqrt(std::max(0.0, pi1 * pi1 * pi2 - pt.pi3 * pt.pi3));
  return {pt.v0, {Complex(std::sqrt(pi1), 0.0), Complex(pt.pi3, im) / pi1}};
}

double InvariantPoly::eval(double lambda, double v0, double pi1, double pi2, double pi3) const {
  int mx = 0;
  for (const auto& [k, v] : terms)
    for (int e : k) mx = std::max(mx, e);
  std::array<std::vector<double>, 5> pw;
  const std::array<double, 5> x{lambda, v0, pi1, pi2, pi3};
  for (int i = 0; i < 5; ++i) {
    pw[i].resize(mx + 1);
    pw[i][0] = 1.0;
    for (int e = 1; e <= mx; ++e) pw[i][e] = pw[i][e - 1] * x[i];
  }
  double acc = 0.0;
  for (const auto& [k, v] : terms)
    acc += v * pw[0][k[0]] * pw[1][k[1]] * pw[2][k[2]] * pw[3][k[3]] * pw[4][k[4]];
  return acc;
}

InvariantValues OrbitInvariants::evaluate(double lambda, const OrbitPoint& pt) const {
  return {b0.eval(lambda, pt.v0, pt.pi1, pt.pi2, pt.pi3), a.eval(lambda, pt.v0, pt.pi1, pt.pi2, pt.pi3),
          b.eval(lambda, pt.v0, pt.pi1, pt.pi2, pt.pi3), c.eval(lambda, pt.v0, pt.pi1, pt.pi2, pt.pi3),
          d.eval(lambda, pt.v0, pt.pi1, pt.pi2, pt.pi3)};
}

OrbitInvariants reduce_invariants(const std::vector<double>& p, const ModelSpec& spec) {
  require_two_modes(spec);
  if (p.empty()) throw std::invalid_argument("reduce_invariants: empty polynomial");
  const int deg = static_cast<int>(p.size()) - 1;
  const double g1 = 0.5 * std::sqrt(spec.weight_magnitude(1));
  const double g2 = 0.5 * std::sqrt(spec.weight_magnitude(2));
  const PowerTable tab(deg + 1);

  // M0 = B0 part; M1 = z1 (R1 + S1 W) + conj(z1) z2 (R2 + S2 W);
  // M2 = z2 (R3 + S3 W) + z1^2 (R4 + S4 W).
  InvariantPoly m0, r1, s1, r2, s2, r3, s3, r4, s4;
  auto put = [&](InvariantPoly& rr, InvariantPoly& ss, double coef, int lam, int e, int pp, int qq,
                 int r, int s) {
    const auto [rp, sp] = reduce_cofactor(pp, qq, r, s, tab);
    add_scaled(rr, rp, coef, lam, e);
    add_scaled(ss, sp, coef, lam, e);
  };
  for (int n = 0; n <= deg; ++n) {
    if (p[n] == 0.0) continue;
    const double nf = factorial(n);
    for (int e = 0; e <= n; ++e)
      for (int pp = 0; pp <= n - e; ++pp)
        for (int qq = 0; qq <= n - e - pp; ++qq)
          for (int r = 0; r <= n - e - pp - qq; ++r) {
            const int s = n - e - pp - qq - r;
            const int f = pp - qq + 2 * r - 2 * s;
            if (f < 0 || f > 2) continue;
            const double coef = p[n] * nf /
                                (factorial(e) * factorial(pp) * factorial(qq) * factorial(r) *
                                 factorial(s)) *
                                std::pow(g1, pp + qq) * std::pow(g2, r + s);
            if (f == 0) {
              InvariantPoly ss;
              put(m0, ss, coef, n, e, pp, qq, r, s);
              add_poly(m0, ss, 1.0, 0, 0, 1);  // Re(S W) = S pi3
            } else if (f == 1) {
              if (pp >= 1) put(r1, s1, coef, n, e, pp - 1, qq, r, s);
              else if (qq >= 1 && r >= 1) put(r2, s2, coef, n, e, pp, qq - 1, r - 1, s);
              else throw std::logic_error("frequency-1 monomial without an equivariant factor");
            } else {
              if (r >= 1) put(r3, s3, coef, n, e, pp, qq, r - 1, s);
              else if (pp >= 2) put(r4, s4, coef, n, e, pp - 2, qq, r, s);
              else throw std::logic_error("frequency-2 monomial without an equivariant factor");
            }
          }
  }

  OrbitInvariants out;
  out.degree = deg;
  out.j0_sign = spec.j0_sign;
  out.j_weights = {spec.j_weights[0], spec.j_weights[1]};
  const double k1 = spec.weight_sign(1) * std::sqrt(spec.weight_magnitude(1));
  const double k2 = spec.weight_sign(2) * std::sqrt(spec.weight_magnitude(2));
  add_poly(out.b0, m0, spec.j0_sign);
  // z1 W = 2 pi3 z1 - pi1 conj(z1) z2,   conj(z1) z2 W = pi1 pi2 z1
  out.a.add({0, 0, 0, 0, 0}, -1.0);
  add_poly(out.a, r1, k1);
  add_poly(out.a, s1, 2.0 * k1, 0, 0, 1);
  add_poly(out.a, s2, k1, 1, 1, 0);
  add_poly(out.b, r2, k1);
  add_poly(out.b, s1, -k1, 1, 0, 0);
  // z2 W = pi2 z1^2,   z1^2 W = 2 pi3 z1^2 - pi1^2 z2
  out.c.add({0, 0, 0, 0, 0}, -1.0);
  add_poly(out.c, r3, k2);
  add_poly(out.c, s4, -k2, 2, 0, 0);
  add_poly(out.d, r4, k2);
  add_poly(out.d, s3, k2, 0, 1, 0);
  add_poly(out.d, s4, 2.0 * k2, 0, 0, 1);
  for (InvariantPoly* q : {&out.b0, &out.a, &out.b, &out.c, &out.d}) prune(*q);
  return out;
}

OrbitInvariants reduce_invariants(const ChebyshevFit& fit, const ModelSpec& spec) {
  OrbitInvariants out = reduce_invariants(fit.monomial, spec);
  out.alpha = fit.alpha;
  out.fit_error = fit.max_error;
  return out;
}

InvariantValues invariant_oracle_at(Complex z1, Complex z2, double v0, const ModelSpec& spec,
                                    const std::function<double(double)>& f, int order) {
  require_two_modes(spec);
  const QuadratureRule rule = gauss_legendre(order, -0.5 * kPi, 0.5 * kPi);
  const CortexState st{v0, {z1, z2}};
  double m0 = 0.0;
  Complex m1{}, m2{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y = rule.nodes[i];
    const double val = rule.weights[i] * f(spec.gain * reconstruct_voltage(st, spec, y));
    m0 += val;
    m1 += val * std::polar(1.0, 2.0 * y);
    m2 += val * std::polar(1.0, 4.0 * y);
  }
  m0 /= kPi;
  m1 /= kPi;
  m2 /= kPi;
  const Complex b1 = spec.weight_sign(1) * std::sqrt(spec.weight_magnitude(1)) * m1;
  const Complex b2 = spec.weight_sign(2) * std::sqrt(spec.weight_magnitude(2)) * m2;
  auto solve2 = [](Complex u, Complex w, Complex rhs) {
    Eigen::Matrix2d m;
    m << u.real(), w.real(), u.imag(), w.imag();
    const double scale = std::max({std::abs(u), std::abs(w), 1e-300});
    if (std::abs(m.determinant()) < 1e-12 * scale * scale)
      throw std::invalid_argument("invariant_oracle: boundary orbit, system is singular");
    return Eigen::Vector2d(m.partialPivLu().solve(Eigen::Vector2d(rhs.real(), rhs.imag())));
  };
  const Eigen::Vector2d ab = solve2(z1, std::conj(z1) * z2, b1);
  const Eigen::Vector2d cd = solve2(z2, z1 * z1, b2);
  return {spec.j0_sign * m0, ab(0) - 1.0, ab(1), cd(0) - 1.0, cd(1)};
}

InvariantValues invariant_oracle(const OrbitPoint& pt, const ModelSpec& spec,
                                 const std::function<double(double)>& f, int order) {
  if (!(pt.pi1 > 0.0 && pt.pi3 * pt.pi3 < pt.pi1 * pt.pi1 * pt.pi2))
    throw std::invalid_argument("invariant_oracle: point must be strictly inside the orbit space");
  const CortexState rep = gauge_representative(pt);
  return invariant_oracle_at(rep.z[0], rep.z[1], pt.v0, spec, f, order);
}

OrbitPoint orbit_rhs(const OrbitPoint& pt, const InvariantValues& v, const ModelSpec& spec,
                     double drive_i0, bool c_cross_term) {
  const double tau = spec.time_constant;
  OrbitPoint d;
  d.v0 = (-pt.v0 + v.b0 + spec.v0_offset() + drive_i0) / tau;
  d.pi1 = (2.0 * v.a * pt.pi1 + 2.0 * v.b * pt.pi3) / tau;
  d.pi2 = (2.0 * v.c * pt.pi2 + 2.0 * v.d * pt.pi3) / tau;
  const double cross = c_cross_term ? 2.0 * v.c * pt.pi1 * pt.pi2 : 2.0 * v.b * pt.pi1 * pt.pi2;
  d.pi3 = ((2.0 * v.a + v.c) * pt.pi3 + cross + v.d * pt.pi1 * pt.pi1) / tau;
  return d;
}

OrbitSystem::OrbitSystem(OrbitInvariants inv, std::vector<double> p, ModelSpec spec,
                         bool c_cross_term)
    : inv_(std::move(inv)), p_(std::move(p)), spec_(std::move(spec)), c_cross_(c_cross_term) {
  require_two_modes(spec_);
}

OrbitSystem make_orbit_system(const ChebyshevFit& fit, const ModelSpec& spec, bool c_cross_term) {
  return OrbitSystem(reduce_invariants(fit, spec), fit.monomial, spec, c_cross_term);
}

Vec OrbitSystem::residual(const Vec& x, double lambda) const {
  const OrbitPoint pt = OrbitPoint::from_vector(x);
  return orbit_rhs(pt, inv_.evaluate(lambda, pt), spec_, 0.0, c_cross_).to_vector();
}

GalerkinModel OrbitSystem::cartesian_model(double lambda) const {
  ModelSpec s = spec_;
  s.gain = lambda;
  s.quadrature_order = std::max(s.quadrature_order, 256);
  const std::vector<double> p = p_;
  auto value = [p](double x) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  auto slope = [p](double x) {
    double acc = 0.0;
    for (int k = static_cast<int>(p.size()) - 1; k >= 1; --k) acc = acc * x + k * p[k];
    return acc;
  };
  return GalerkinModel(s, Nonlinearity(value, slope));
}

int OrbitSystem::n_unstable(const Vec& x, double lambda) const {
  const GalerkinModel m = cartesian_model(lambda);
  const CortexState rep = gauge_representative(OrbitPoint::from_vector(x));
  return stability_from_jacobian(m.jacobian(rep.to_vector()), 1e-7).n_unstable;
}

double OrbitSystem::amplitude(const Vec& x, double lambda) const {
  const CortexState rep = gauge_representative(OrbitPoint::from_vector(x));
  double mx = 0.0;
  for (double v : sample_voltage(rep, spec_, 256)) mx = std::max(mx, std::abs(v));
  return lambda * mx;
}

namespace {
CurveProblem orbit_curve(const OrbitSystem& sys, double lo, double hi, double orbit_tol) {
  CurveProblem cp;
  cp.residual = [&sys](const Vec& x) { return sys.residual(x.head(4), x(4)); };
  cp.n_unstable = [&sys](const Vec& x) { return sys.n_unstable(x.head(4), x(4)); };
  cp.fold_components = {4};
  cp.box = {{4, lo, hi}, {0, -50.0, 50.0}, {1, -1.0, 1e3}, {2, -1.0, 1e3}};
  cp.admissible = [orbit_tol](const Vec& x) {
    return OrbitPoint::from_vector(x.head(4)).admissible(orbit_tol);
  };
  return cp;
}

const std::vector<std::string> kOrbitNames{"v0", "pi1", "pi2", "pi3"};
}  // namespace

Branch orbit_continue(const OrbitSystem& sys, const Vec& start, double lambda0, double lo,
                      double hi, const ContinuationConfig& cfg, const Vec& direction,
                      double orbit_tol) {
  const CurveProblem cp = orbit_curve(sys, lo, hi, orbit_tol);
  Vec x0(5);
  x0.head(4) = start.head(4);
  x0(4) = lambda0;
  const CurveResult curve = continue_curve(cp, x0, direction, cfg);
  return to_branch(curve, {4}, {0, 1, 2, 3}, {"lambda"}, kOrbitNames);
}

OrbitSkeleton orbit_skeleton(const OrbitSystem& sys, double lo, double hi,
                             const ContinuationConfig& cfg, double switch_offset) {
  OrbitSkeleton out;
  auto trivial_v0 = [&](double lam, double guess) {
    const auto f = [&](const Vec& v) {
      Vec x = Vec::Zero(4);
      x(0) = v(0);
      return Vec(sys.residual(x, lam).head(1));
    };
    return newton_solve_or_throw(f, Vec::Constant(1, guess))(0);
  };
  const double v_lo = trivial_v0(lo, 0.0);
  Vec dir = Vec::Zero(5);
  dir(4) = 1.0;
  out.trivial = orbit_continue(sys, (Vec(4) << v_lo, 0, 0, 0).finished(), lo, lo, hi, cfg, dir);

  for (const auto* bp : out.trivial.with_kind(PointKind::branch_point)) {
    const double lam_bp = bp->params[0];
    const OrbitPoint pt = OrbitPoint::from_vector(bp->state);
    const InvariantValues iv = sys.invariants().evaluate(lam_bp, pt);
    const int mode = std::abs(iv.a) <= std::abs(iv.c) ? 1 : 2;
    // Refine the gain where the critical coefficient vanishes on the trivial branch.
    auto g = [&](double lam) {
      const double v0 = trivial_v0(lam, pt.v0);
      const InvariantValues w = sys.invariants().evaluate(lam, {v0, 0, 0, 0});
      return mode == 1 ? w.a : w.c;
    };
    double a = lam_bp - 1e-3 * (1.0 + lam_bp), b = lam_bp + 1e-3 * (1.0 + lam_bp);
    double ga = g(a);
    if ((ga > 0.0) != (g(b) > 0.0)) {
      for (int it = 0; it < 100 && b - a > 1e-14 * (1.0 + lam_bp); ++it) {
        const double m = 0.5 * (a + b), gm = g(m);
        if ((gm > 0.0) == (ga > 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
    }
    const double lam_c = 0.5 * (a + b);
    out.critical_gains.push_back(lam_c);
    out.critical_modes.push_back(mode);

    const CurveProblem cp = orbit_curve(sys, lo, hi, 1e-7);
    Vec guess(5);
    guess << trivial_v0(lam_c, pt.v0), 0, 0, 0, lam_c;
    guess(mode) = switch_offset;
    const Vec normal = Vec::Unit(5, mode);
    const NewtonResult r = correct_on_hyperplane(cp, guess, normal, switch_offset, cfg);
    if (!r.converged())
      throw NumericalError("orbit branch switch failed at lambda=" + std::to_string(lam_c));
    const Vec d = Vec::Unit(5, mode);
    out.branches.push_back(orbit_continue(sys, r.x.head(4), r.x(4), lo, hi, cfg, d));
  }
  return out;
}

std::vector<double> tuning_curve_n2(const OrbitPoint& pt, const ModelSpec& spec, int n) {
  require_two_modes(spec);
  if (!(pt.pi1 > 0.0 || pt.pi2 > 0.0))
    throw std::invalid_argument("tuning_curve_n2: untuned point (pi1 = pi2 = 0)");
  const CortexState rep = gauge_representative(pt);
  std::vector<double> out(n);
  const auto x = ring_grid(n);
  for (int j = 0; j < n; ++j) out[j] = reconstruct_activity(rep, spec, x[j]);
  return out;
}

int count_peaks(const std::vector<double>& s, double rel_tol) {
  const int n = static_cast<int>(s.size());
  if (n < 3) return 0;
  const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
  const double tol = rel_tol * std::max(1.0, std::abs(*mx - *mn));
  if (*mx - *mn <= tol) return 0;
  // Sign changes + to - of the periodic difference sequence, skipping flat steps.
  std::vector<int> sg;
  for (int i = 0; i < n; ++i) {
    const double d = s[(i + 1) % n] - s[i];
    if (std::abs(d) > tol) sg.push_back(d > 0.0 ? 1 : -1);
  }
  int peaks = 0;
  for (std::size_t i = 0; i < sg.size(); ++i)
    if (sg[i] == 1 && sg[(i + 1) % sg.size()] == -1) ++peaks;
  return peaks;
}

}  // namespace ringmodel
