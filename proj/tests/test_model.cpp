#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ringmodel/equilibria.hpp"
#include "ringmodel/errors.hpp"
#include "ringmodel/galerkin.hpp"
#include "ringmodel/integrate.hpp"
#include "ringmodel/quadrature.hpp"

using namespace ringmodel;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

ModelSpec ref_spec(double gain = 15.0) {
  ModelSpec s;
  s.gain = gain;
  return s;
}

ModelSpec n2_spec(double gain) {
  ModelSpec s;
  s.n_modes = 2;
  s.j_weights = {9.0, 6.66};
  s.gain = gain;
  return s;
}

CortexState random_state(std::mt19937& rng, int n, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  CortexState s = CortexState::zero(n);
  s.v0 = u(rng);
  for (auto& z : s.z) z = {u(rng), u(rng)};
  return s;
}

double max_diff(const CortexState& a, const CortexState& b) {
  return (a.to_vector() - b.to_vector()).lpNorm<Eigen::Infinity>();
}

// Right-hand side by a dense midpoint rule on the periodic cell, written
// directly from the ring equation.
CortexState rhs_oracle(const CortexState& s, const ModelSpec& spec, const DriveFrame& d,
                       int m = 4000) {
  const int n = spec.n_modes;
  double m0 = 0.0;
  std::vector<Complex> mk(n);
  for (int j = 0; j < m; ++j) {
    const double y = -0.5 * kPi + (j + 0.5) * kPi / m;
    const double f = sigmoid_eval(spec.gain * reconstruct_voltage(s, spec, y), spec);
    m0 += f / m;
    for (int k = 1; k <= n; ++k) mk[k - 1] += f * std::polar(1.0, 2.0 * k * y) / double(m);
  }
  CortexState out = CortexState::zero(n);
  double offset = spec.sigmoid == SigmoidKind::standard ? -spec.threshold : 0.0;
  out.v0 = -s.v0 + spec.j0_sign * m0 + offset + d.contrast * d.i0;
  for (int k = 1; k <= n; ++k)
    out.z[k - 1] = -s.z[k - 1] + spec.weight_sign(k) * std::sqrt(spec.weight_magnitude(k)) * mk[k - 1] +
                   d.contrast * d.ik[k - 1];
  return out;
}
}  // namespace

TEST_CASE("spec validation") {
  ModelSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = [](auto mutate) {
    ModelSpec t;
    mutate(t);
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  };
  bad([](ModelSpec& t) { t.n_modes = 0; });
  bad([](ModelSpec& t) { t.n_modes = 2; });
  bad([](ModelSpec& t) { t.j0_sign = 0; });
  bad([](ModelSpec& t) { t.time_constant = 0.0; });
  bad([](ModelSpec& t) { t.gain = -1.0; });
  bad([](ModelSpec& t) { t.homotopy_mu = 1.5; });
  bad([](ModelSpec& t) { t.quadrature_order = 10; });
  bad([](ModelSpec& t) { t.j_weights = {std::nan("")}; });
  CHECK_THROWS_AS(sigmoid_kind_from_string("tanh"), std::invalid_argument);
}

TEST_CASE("sigmoid kinds") {
  ModelSpec s;
  CHECK(sigmoid_eval(0.0, s) == 0.5);
  s.sigmoid = SigmoidKind::centered;
  CHECK(sigmoid_eval(0.0, s) == 0.0);
  s.sigmoid = SigmoidKind::homotopy;
  s.homotopy_mu = 1.0;
  s.threshold = 0.1;
  CHECK(sigmoid_eval(0.0, s) == Approx(0.4).epsilon(1e-15));

  // mu = 0 is exactly the centered sigmoid; mu = 1 is S - theta in the mean mode
  ModelSpec c;
  c.sigmoid = SigmoidKind::centered;
  s.homotopy_mu = 0.0;
  for (double x : {-3.0, -0.2, 0.0, 1.7, 40.0}) CHECK(sigmoid_eval(x, s) == sigmoid_eval(x, c));
  CHECK(s.v0_offset() == 0.0);
  s.homotopy_mu = 1.0;
  CHECK(s.v0_offset() == Approx(-0.5 - 0.1));

  CHECK(standard_sigmoid(-800.0) == 0.0);
  CHECK(standard_sigmoid(800.0) == 1.0);
  CHECK(standard_sigmoid_slope(0.0) == 0.25);
}

TEST_CASE("lgn drive frames") {
  ModelSpec s;
  DriveFrame f = lgn_frame(0.0, 0.7, 1.0, s);
  CHECK(f.i0 == 1.0);
  CHECK(std::abs(f.ik[0]) == 0.0);

  f = lgn_frame(0.1, 0.0, 0.01, s);
  CHECK(f.i0 == Approx(0.9));
  CHECK(f.ik[0].real() == Approx(0.1 / std::sqrt(1.5)));
  CHECK(f.ik[0].imag() == 0.0);
  CHECK(f.contrast == 0.01);

  // quarter-turn drive is exactly real
  f = lgn_frame(0.1, 0.5 * kPi, 0.01, s);
  CHECK(f.ik[0].imag() == 0.0);
  CHECK(f.ik[0].real() < 0.0);

  ModelSpec s2 = n2_spec(1.0);
  f = lgn_frame(0.05, 0.0, 0.01, s2, 0.1);
  CHECK(f.i0 == Approx(0.95));
  CHECK(3.0 * f.ik[0].real() == Approx(0.05));
  CHECK(std::sqrt(6.66) * f.ik[1].real() == Approx(0.005));

  for (double x0 : {0.0, 0.3, -1.2}) {
    const DriveFrame g = lgn_frame(0.3, x0, 0.2, s2);
    for (double x : {-1.5, -0.4, 0.0, 0.9}) {
      const double want = 0.2 * (1.0 - 0.3 + 0.3 * std::cos(2.0 * (x - x0)));
      CHECK(reconstruct_drive(g, s2, x) == Approx(want).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(lgn_frame(1.5, 0.0, 0.1, s), std::invalid_argument);
  CHECK_THROWS_AS(lgn_frame(0.1, 0.0, 0.1, s, 0.1), std::invalid_argument);
}

TEST_CASE("blend endpoints") {
  ModelSpec s;
  const DriveFrame a = lgn_frame(0.1, 0.0, 0.01, s);
  const DriveFrame b = lgn_frame(0.1, 0.5 * kPi, 0.01, s);
  const DriveFrame m0 = blend(a, b, 0.0), m1 = blend(a, b, 1.0), mh = blend(a, b, 0.5);
  CHECK(std::abs(m0.ik[0] - a.ik[0]) == 0.0);
  CHECK(std::abs(m1.ik[0] - b.ik[0]) < 1e-16);
  CHECK(std::abs(mh.ik[0]) < 1e-16);  // orientation-blind midpoint
  CHECK(mh.i0 == Approx(0.9));
}

TEST_CASE("state layout and voltage") {
  ModelSpec s;
  s.j_weights = {1.0};
  CortexState z = CortexState::zero(1);
  for (double x : {-1.0, 0.0, 0.5}) CHECK(reconstruct_voltage(z, s, x) == 0.0);
  CortexState c(0.0, {Complex(1.0, 0.0)});
  for (double x : {-1.0, 0.0, 0.5, 1.2}) CHECK(reconstruct_voltage(c, s, x) == Approx(std::cos(2 * x)));
  CHECK(peak_angle(c) == 0.0);

  std::mt19937 rng(3);
  const CortexState r = random_state(rng, 3);
  CHECK(max_diff(CortexState::from_vector(r.to_vector()), r) == 0.0);
  CHECK_THROWS_AS(CortexState::from_vector(Vec::Zero(4)), std::invalid_argument);
  // pi-periodic
  ModelSpec s3;
  s3.n_modes = 3;
  s3.j_weights = {1.0, -2.0, 0.5};
  for (double x : {-1.3, 0.2, 0.7})
    CHECK(reconstruct_voltage(r, s3, x) == Approx(reconstruct_voltage(r, s3, x + kPi)).epsilon(1e-12));
}

TEST_CASE("group action") {
  std::mt19937 rng(5);
  const CortexState s = random_state(rng, 2);
  CHECK(max_diff(group_act(s, 0.0), s) == 0.0);
  const CortexState q = group_act(s, 0.5 * kPi);
  CHECK(std::abs(q.z[0] + s.z[0]) < 1e-15);
  CHECK(std::abs(q.z[1] - s.z[1]) < 1e-15);
  CHECK(max_diff(group_act(group_act(s, 0.0, true), 0.0, true), s) == 0.0);
  // composition
  CHECK(max_diff(group_act(group_act(s, 0.3), 0.4), group_act(s, 0.7)) < 1e-15);
  CHECK(wrap_orientation(kPi) == Approx(0.0).epsilon(1e-15));
  CHECK(wrap_orientation(0.5 * kPi) == Approx(0.5 * kPi));
  CHECK(wrap_orientation(-0.5 * kPi) == Approx(0.5 * kPi));
}

TEST_CASE("gauss-legendre exactness") {
  const QuadratureRule r = gauss_legendre(40, -0.5 * kPi, 0.5 * kPi);
  for (int d : {0, 5, 10, 79}) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i] / (0.5 * kPi), d);
    const double want = (d % 2 == 1) ? 0.0 : kPi / (d + 1);
    CHECK(sum == Approx(want).epsilon(1e-13).scale(1.0));
  }
  for (std::size_t i = 0; i < r.nodes.size(); ++i) CHECK(r.nodes[i] == -r.nodes[r.nodes.size() - 1 - i]);
}

TEST_CASE("zero state rhs") {
  ModelSpec s = ref_spec(1.0);
  GalerkinModel g(s);
  const CortexState d = g.rhs(CortexState::zero(1), DriveFrame::none(1));
  CHECK(d.v0 == Approx(-0.5).epsilon(1e-15));
  CHECK(std::abs(d.z[0]) < 1e-15);
}

TEST_CASE("galerkin rhs matches a dense midpoint rule") {
  std::mt19937 rng(11);
  for (SigmoidKind kind : {SigmoidKind::standard, SigmoidKind::centered}) {
    ModelSpec s = n2_spec(2.5);
    s.sigmoid = kind;
    s.threshold = 0.2;
    s.j_weights = {9.0, -6.66};
    GalerkinModel g(s);
    for (int trial = 0; trial < 10; ++trial) {
      const CortexState st = random_state(rng, 2, 0.3);
      const DriveFrame d = lgn_frame(0.2, 0.4 * trial, 0.3, s, 0.5);
      CHECK(max_diff(g.rhs(st, d), rhs_oracle(st, s, d)) < 1e-10);
    }
  }
}

TEST_CASE("homotopy at mu = 1 is the standard field") {
  std::mt19937 rng(2);
  ModelSpec a = ref_spec(15.0);
  a.threshold = 0.3;
  ModelSpec b = a;
  b.sigmoid = SigmoidKind::homotopy;
  b.homotopy_mu = 1.0;
  GalerkinModel ga(a), gb(b);
  const DriveFrame d = lgn_frame(0.1, 0.0, 0.01, a);
  for (int i = 0; i < 5; ++i) {
    const CortexState st = random_state(rng, 1);
    CHECK(max_diff(ga.rhs(st, d), gb.rhs(st, d)) < 1e-14);
  }
}

TEST_CASE("analytic jacobian against central differences") {
  std::mt19937 rng(7);
  ModelSpec s = n2_spec(3.0);
  s.time_constant = 2.0;
  GalerkinModel g(s);
  const DriveFrame d = lgn_frame(0.05, 0.3, 0.01, s, 0.1);
  for (int i = 0; i < 5; ++i) {
    const Vec u = random_state(rng, 2, 0.4).to_vector();
    const Mat fd = fd_jacobian([&](const Vec& x) { return g.rhs(x, d); }, u, 1e-6);
    CHECK((g.jacobian(u) - fd).lpNorm<Eigen::Infinity>() < 1e-7);
    const Vec dl = (g.with_gain(3.0 + 1e-6).rhs(u, d) - g.with_gain(3.0 - 1e-6).rhs(u, d)) / 2e-6;
    CHECK((g.gain_derivative(u) - dl).lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("equivariance without drive") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  GalerkinModel g(n2_spec(1.3));
  const DriveFrame none = DriveFrame::none(2);
  for (int i = 0; i < 20; ++i) {
    const CortexState st = random_state(rng, 2);
    const double gam = ang(rng);
    for (bool refl : {false, true}) {
      const CortexState lhs = g.rhs(group_act(st, gam, refl), none);
      const CortexState rhs = group_act(g.rhs(st, none), gam, refl);
      CHECK(max_diff(lhs, rhs) < 1e-10);
    }
  }
}

TEST_CASE("reflection-invariant subspace is exact") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  GalerkinModel g(n2_spec(1.1));
  const DriveFrame d = lgn_frame(0.05, 0.5 * kPi, 0.01, g.spec(), 0.1);
  for (int i = 0; i < 20; ++i) {
    CortexState st(u(rng), {Complex(u(rng), 0.0), Complex(u(rng), 0.0)});
    const CortexState r = g.rhs(st, d);
    CHECK(r.z[0].imag() == 0.0);
    CHECK(r.z[1].imag() == 0.0);
  }
  // symmetric chart agrees with the full field
  const Vec us = CortexState(0.1, {Complex(0.2, 0), Complex(-0.1, 0)}).to_symmetric_chart();
  const Vec f = g.symmetric_rhs(us, d);
  const Vec full = g.rhs(CortexState::from_symmetric_chart(us).to_vector(), d);
  CHECK(f(0) == full(0));
  CHECK(f(1) == full(1));
  CHECK(f(2) == full(3));
}

TEST_CASE("gain zero relaxes exponentially") {
  ModelSpec s = ref_spec(0.0);
  s.threshold = 0.2;
  GalerkinModel g(s);
  const DriveFrame d = lgn_frame(0.1, 0.4, 0.5, s);
  const CortexState s0(0.3, {Complex(0.2, -0.1)});
  const double t = 3.0;
  const CortexState end = integrate_final(g, s0, {d, {}}, t, 0.01);
  const double vstar = -0.5 - 0.2 + 0.5 * d.i0;
  const Complex zstar = 0.5 * d.ik[0];
  CHECK(end.v0 == Approx(vstar + (s0.v0 - vstar) * std::exp(-t)).epsilon(1e-10));
  CHECK(std::abs(end.z[0] - (zstar + (s0.z[0] - zstar) * std::exp(-t))) < 1e-10);
}

TEST_CASE("integrator bookkeeping") {
  ModelSpec s = ref_spec(15.0);
  GalerkinModel g(s);
  const Stimulus none = Stimulus::none(1);
  const CortexState s0(0.1, {Complex(0.1, 0.0)});
  const Trajectory tr = integrate(g, s0, none, 1.03, 0.05, {4});
  CHECK(tr.times.back() == 1.03);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.states.size() == tr.times.size());
  CHECK_THROWS_AS(integrate(g, s0, none, 1.0, 0.0), std::invalid_argument);

  // an RK4 step far outside the stability region blows up
  CHECK_THROWS_AS(integrate_final(g, s0, none, 1e4, 10.0), NumericalError);
}

TEST_CASE("equilibrium is a fixed point of the integrator") {
  ModelSpec s = ref_spec(15.0);
  EquilibriumProblem p(s, {0.1, 0.0, 0.01});
  const NewtonResult r = solve_equilibrium(p, CortexState(-0.2, {Complex(0.18, 0)}).to_vector());
  REQUIRE(r.converged());
  const CortexState eq = p.decode(r.x);
  const CortexState end = integrate_final(p.model(), eq, {p.frame(), {}}, 50.0, 0.05);
  CHECK(max_diff(end, eq) < 1e-9);
}

TEST_CASE("below the pitchfork every run reaches the same untuned state") {
  std::mt19937 rng(19);
  GalerkinModel g(ref_spec(3.0));
  std::vector<CortexState> ends;
  for (int i = 0; i < 5; ++i)
    ends.push_back(integrate_final(g, random_state(rng, 1, 1.0), Stimulus::none(1), 80.0, 0.05));
  for (const auto& e : ends) {
    CHECK(std::abs(e.z[0]) < 1e-8);
    CHECK(e.v0 == Approx(ends[0].v0).epsilon(1e-9));
  }
}

TEST_CASE("above the pitchfork runs reach tuned states at scattered angles") {
  std::mt19937 rng(23);
  GalerkinModel g(ref_spec(15.0));
  std::array<int, 4> bins{};
  double rho = -1.0;
  for (int i = 0; i < 100; ++i) {
    const CortexState e = integrate_final(g, random_state(rng, 1, 0.5), Stimulus::none(1), 60.0, 0.05);
    if (rho < 0) rho = std::abs(e.z[0]);
    CHECK(std::abs(e.z[0]) == Approx(rho).epsilon(1e-6));
    const double a = peak_angle(e);
    ++bins[std::min(3, static_cast<int>((a + 0.5 * kPi) / (0.25 * kPi)))];
  }
  CHECK(rho > 0.1);
  for (int b : bins) CHECK(b >= 10);
}

TEST_CASE("full ring against the galerkin reduction") {
  ModelSpec s = ref_spec(15.0);
  const int m = 128;
  const Stimulus stim = make_lgn_stimulus(0.1, 0.2, 0.01, s);
  GalerkinModel g(s);

  SUBCASE("in-span data stays in span") {
    const CortexState s0(-0.1, {Complex(0.05, 0.03)});
    const RingTrajectory ring = full_ring_simulate(sample_voltage(s0, s, m), stim, s, 10.0, 0.01);
    const CortexState gal = integrate_final(g, s0, stim, 10.0, 0.01);
    CHECK(max_diff(project_field(ring.fields.back(), s), gal) < 1e-6);
    CHECK(std::abs(field_mode(ring.fields.back(), 2)) < 1e-12);
  }
  SUBCASE("out-of-span modes decay at the membrane rate") {
    Vec v = sample_voltage(CortexState(-0.1, {Complex(0.05, 0.0)}), s, m);
    const auto grid = ring_grid(m);
    for (int j = 0; j < m; ++j) v(j) += 0.1 * std::cos(4.0 * grid[j]) + 0.05 * std::sin(6.0 * grid[j]);
    const double t = 4.0;
    const RingTrajectory ring = full_ring_simulate(v, stim, s, t, 0.01);
    for (int p : {2, 3}) {
      const double rate =
          -std::log(std::abs(field_mode(ring.fields.back(), p)) / std::abs(field_mode(ring.fields.front(), p))) / t;
      CHECK(rate == Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("random data ends on the galerkin state") {
    // stronger contrast so the slow phase mode (rate ~ eps) settles in the run
    const Stimulus strong = make_lgn_stimulus(0.1, 0.2, 0.3, s);
    std::mt19937 rng(29);
    std::normal_distribution<double> nd(0.0, 0.1);
    Vec v(m);
    for (int j = 0; j < m; ++j) v(j) = nd(rng);
    const RingTrajectory ring = full_ring_simulate(v, strong, s, 400.0, 0.05, 1000);
    const CortexState gal = integrate_final(g, project_field(v, s), strong, 400.0, 0.05);
    CHECK(max_diff(project_field(ring.fields.back(), s), gal) < 1e-5);
  }
  CHECK_THROWS_AS(full_ring_simulate(Vec::Zero(4), stim, s, 1.0, 0.1), std::invalid_argument);
}
