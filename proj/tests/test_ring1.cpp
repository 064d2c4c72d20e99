#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ringmodel/equilibria.hpp"
#include "ringmodel/ring1.hpp"

using namespace ringmodel;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <class F>
double bisect(F f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Brute-force pitchfork search for eps0 = -1: the mean equation has a unique
// root in v0 for every lambda, then scan h(lambda) = lambda S'(lambda v0) J1 / 2 - 1.
std::optional<double> brute_pitchfork(double j1, double theta) {
  auto v0_of = [&](double lam) {
    return bisect([&](double v) { return v + sig(lam * v) + theta; }, -5.0, 5.0);
  };
  auto h = [&](double lam) {
    const double v = v0_of(lam);
    const double s = sig(lam * v);
    return lam * s * (1 - s) * j1 / 2.0 - 1.0;
  };
  double prev = h(5.33);
  for (double lam = 5.33 + 1e-3; lam <= 30.0; lam += 1e-3) {
    const double cur = h(lam);
    if ((cur > 0) != (prev > 0)) return bisect(h, lam - 1e-3, lam);
    prev = cur;
  }
  return std::nullopt;
}

ModelSpec ref_spec(double gain = 15.0) {
  ModelSpec s;
  s.gain = gain;
  return s;
}
}  // namespace

TEST_CASE("pitchfork never undercuts the lambda J1 >= 8 bound") {
  for (int eps0 : {-1, 1})
    for (double j1 = 0.05; j1 <= 12.0; j1 += 0.15)
      for (double theta = 0.0; theta <= 1.0; theta += 0.125) {
        const auto pf = pitchfork_condition(j1, theta, eps0);
        if (30.0 * j1 < 8.0) CHECK_FALSE(pf.has_value());
        if (pf) CHECK(pf->lambda * j1 >= 8.0 - 1e-12);
      }
  // lambda = 5 at J1 = 1.5 is below the bound
  CHECK(5.0 * 1.5 < 8.0);
  const auto pf = pitchfork_condition(1.5, 0.0, -1);
  REQUIRE(pf.has_value());
  CHECK(pf->lambda >= 16.0 / 3.0);
}

TEST_CASE("pitchfork against a brute-force scan") {
  for (double theta : {0.0, 0.1, 0.2}) {
    const auto pf = pitchfork_condition(1.5, theta, -1);
    const auto bf = brute_pitchfork(1.5, theta);
    REQUIRE(pf.has_value() == bf.has_value());
    if (pf) CHECK(pf->lambda == Approx(*bf).epsilon(1e-8));
  }
}

TEST_CASE("pitchfork is a zero eigenvalue of the galerkin untuned state") {
  for (auto [j1, theta, eps0] : {std::tuple{1.5, 0.0, -1}, std::tuple{5.0, 0.2, -1}, std::tuple{2.0, 0.5, 1}}) {
    const auto pf = pitchfork_condition(j1, theta, eps0);
    REQUIRE(pf.has_value());
    ModelSpec s = ref_spec(pf->lambda);
    s.j_weights = {j1};
    s.threshold = theta;
    s.j0_sign = eps0;
    const EquilibriumProblem p(s, {0.1, 0.0, 0.0});
    const Vec u = CortexState(pf->v0, {Complex(0.0, 0.0)}).to_vector();
    CHECK(p.residual(u).lpNorm<Eigen::Infinity>() < 1e-10);
    const Mat j = p.jacobian(u);
    CHECK(std::abs(j(1, 1)) < 1e-9);
    CHECK(std::abs(j(2, 2)) < 1e-9);
  }
}

TEST_CASE("threshold boundary") {
  ThresholdGrids g = ThresholdGrids::defaults();
  g.theta = {0.0, 0.25, 0.5, 0.75, 1.0};
  const ThresholdBoundary b = threshold_boundary(-1, g);
  REQUIRE(b.samples.size() == 5);
  double prev = 0.0;
  for (const auto& [theta, j1] : b.samples) {
    REQUIRE(std::isfinite(j1));
    CHECK(std::abs(j1 - (10 * theta + 1)) <= 0.15 * (10 * theta + 1));
    CHECK(j1 >= prev);
    prev = j1;
    // just above the boundary a pitchfork exists, just below it does not
    CHECK(pitchfork_condition(j1 + 0.01, theta, -1).has_value());
    CHECK_FALSE(pitchfork_condition(j1 - 0.01, theta, -1).has_value());
    CHECK_FALSE(pitchfork_condition(j1, theta + 0.02, -1).has_value());
  }
  CHECK(b.samples[2].second >= 5.4);
  CHECK(b.samples[2].second <= 6.8);
  // the theta = 0 value sits a hair under 0.9
  CHECK(b.samples[0].second == Approx(0.896).epsilon(2e-3));

  ThresholdGrids bad = g;
  bad.lambda.clear();
  CHECK_THROWS_AS(threshold_boundary(-1, bad), std::invalid_argument);
}

TEST_CASE("grid existence agrees with the pitchfork solver") {
  const auto lam = ThresholdGrids::defaults().lambda;
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> th(0.0, 1.0), jj(0.0, 12.0);
  int agree = 0, total = 0;
  for (int eps0 : {-1, 1})
    for (int i = 0; i < 100; ++i) {
      const double theta = th(rng), j1 = jj(rng);
      const bool a = threshold_exists(theta, j1, eps0, lam);
      const bool b = pitchfork_condition(j1, theta, eps0).has_value();
      agree += a == b;
      ++total;
    }
  CHECK(agree == total);
  // short grid: lambda_max J1 < 8 means no threshold
  CHECK_FALSE(threshold_exists(0.0, 1.5, -1, {0.0, 1.0, 2.0, 5.0}));
}

TEST_CASE("polar dynamics") {
  const ModelSpec s = ref_spec();
  const PolarState d = polar_rhs({-0.2, 0.15, 0.37}, s, 0.1, 0.0);
  CHECK(d.phi == 0.0);
  CHECK_THROWS_AS(polar_rhs({-0.2, 0.0, 0.0}, s, 0.1, 0.01), std::invalid_argument);

  // polar field is the Cartesian one in disguise
  const PolarState p{-0.17, 0.2, 0.3};
  const PolarState dp = polar_rhs(p, s, 0.1, 0.01);
  GalerkinModel g(s);
  const Complex z = std::polar(p.rho, 2 * p.phi);
  const CortexState c = g.rhs(CortexState(p.v0, {z}), lgn_frame(0.1, 0.0, 0.01, s));
  const Complex dz = (dp.rho + Complex(0, 2 * p.rho * dp.phi)) * std::polar(1.0, 2 * p.phi);
  CHECK(dp.v0 == Approx(c.v0).epsilon(1e-12));
  CHECK(std::abs(dz - c.z[0]) < 1e-12);
}

TEST_CASE("polar equilibria match cartesian equilibria") {
  const ModelSpec s = ref_spec();
  const EquilibriumProblem p(s, {0.1, 0.0, 0.01});
  const auto eq = enumerate_equilibria(p, seed_grid(p, -1.0, 1.0, -1.0, 1.0, 21));
  REQUIRE(eq.size() == 3);
  for (const Vec& u : eq) {
    const NewtonResult r = solve_polar_equilibrium(Parity::even, u(0) + 0.01, u(1) * 0.9, s, 0.1, 0.01);
    REQUIRE(r.converged());
    const CortexState st = polar_to_state(Parity::even, r.x(0), r.x(1));
    CHECK((st.to_vector() - u).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  // signed families are mirror images: rho_e = -rho_o
  const NewtonResult e = solve_polar_equilibrium(Parity::even, -0.18, -0.18, s, 0.1, 0.01);
  const NewtonResult o = solve_polar_equilibrium(Parity::odd, -0.18, 0.18, s, 0.1, 0.01);
  REQUIRE(e.converged());
  REQUIRE(o.converged());
  CHECK(e.x(1) == Approx(-o.x(1)).epsilon(1e-12));
  CHECK(e.x(0) == Approx(o.x(0)).epsilon(1e-12));
  CHECK(std::abs(polar_to_state(Parity::odd, o.x(0), o.x(1)).z[0] - Complex(e.x(1), 0)) < 1e-12);
}

TEST_CASE("polar branch folds like the cartesian one") {
  const ModelSpec s = ref_spec();
  const NewtonResult o = solve_polar_equilibrium(Parity::odd, -0.18, 0.18, s, 0.1, 0.01);
  REQUIRE(o.converged());
  ContinuationConfig cfg;
  const Branch b = continue_polar_branch(Parity::odd, o.x(0), o.x(1), s, 0.1, 0.01, 0.0, 15.0, cfg, -1);
  const auto folds = b.folds();
  REQUIRE(folds.size() == 1);
  CHECK(folds[0]->params[0] == Approx(9.649705).epsilon(1e-6));
}

TEST_CASE("half width") {
  CHECK(halfwidth_argument(0.0, 1.0) == Approx(-std::log(1.0 + 2.0 * std::exp(-1.0))).epsilon(1e-14));
  CHECK(halfwidth_argument(0.0, 1.0) == Approx(-0.5514).epsilon(1e-3));
  const auto wide = tuning_halfwidth(0.0, 1e6, 1.0, 0.0, 1.0);
  REQUIRE(wide.has_value());
  CHECK(*wide == Approx(kPi / 4).epsilon(1e-2));
  // nearly flat curve never halves
  CHECK_FALSE(tuning_halfwidth(0.0, 1e-8, 1.0, 0.0, 1.0).has_value());
  CHECK_THROWS_AS(tuning_halfwidth(0.0, 0.0, 1.0, 0.0, 1.0), std::invalid_argument);

  // against root-finding on the reconstructed activity of the TC0 state
  const ModelSpec s = ref_spec();
  const NewtonResult e = solve_polar_equilibrium(Parity::even, -0.18, 0.18, s, 0.1, 0.01);
  REQUIRE(e.converged());
  const CortexState st = polar_to_state(Parity::even, e.x(0), e.x(1));
  const auto hw = state_halfwidth(st, s);
  REQUIRE(hw.has_value());
  const double half = 0.5 * reconstruct_activity(st, s, 0.0);
  const double root = bisect([&](double x) { return reconstruct_activity(st, s, x) - half; }, 0.0, 0.5 * kPi);
  CHECK(std::abs(*hw - root) < 1e-9);
}
