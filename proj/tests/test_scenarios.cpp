#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ringmodel/scenarios.hpp"

using namespace ringmodel;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

ModelSpec ref_spec() {
  ModelSpec s;
  s.gain = 15.0;
  return s;
}

const BistabilityCheck& ref_check() {
  static const BistabilityCheck c = check_bistable(ref_spec(), 0.1, 0.01);
  return c;
}
}  // namespace

TEST_CASE("labels") {
  CHECK(to_string(Basin::tc0) == "TC0");
  CHECK(to_string(Basin::tc90) == "TC90");
  CHECK(scenario_kind_from_string("static") == ScenarioKind::static_stimulus);
  CHECK_THROWS_AS(scenario_kind_from_string("spin"), std::invalid_argument);
  CHECK(initial_condition_from_string("rest") == InitialCondition::rest);

  const double w = kPi / 8;
  CHECK(label_state(CortexState(0.0, {Complex(0.2, 0.0)}), 0.2, w) == Basin::tc0);
  CHECK(label_state(CortexState(0.0, {Complex(-0.2, 0.0)}), 0.2, w) == Basin::tc90);
  CHECK(label_state(CortexState(0.0, {Complex(0.01, 0.0)}), 0.2, w) == Basin::untuned);
  CHECK(label_state(CortexState(0.0, {std::polar(0.2, 2 * 0.7)}), 0.2, w) == Basin::other);
  // labels follow the reference orientation
  CHECK(label_state(CortexState(0.0, {std::polar(0.2, 2 * 0.3)}), 0.2, w, 0.3) == Basin::tc0);
}

TEST_CASE("bistability preflight") {
  const BistabilityCheck& c = ref_check();
  CHECK(c.bistable);
  REQUIRE(c.tc0.has_value());
  REQUIRE(c.tc90.has_value());
  REQUIRE(c.untuned.has_value());
  CHECK(c.tc0->z[0].real() == Approx(0.1831397321).epsilon(1e-8));
  CHECK(c.tc90->z[0].real() == Approx(-0.1775981869).epsilon(1e-8));
  ModelSpec low = ref_spec();
  low.gain = 3.0;
  CHECK_FALSE(check_bistable(low, 0.1, 0.01).bistable);
}

TEST_CASE("equilibria of the static drive") {
  const auto eq = drive_equilibria(ref_spec(), lgn_frame(0.1, 0.0, 0.01, ref_spec()));
  CHECK(eq.size() == 3);
}

TEST_CASE("basin classification") {
  const ModelSpec s = ref_spec();
  const DriveFrame f = lgn_frame(0.1, 0.0, 0.01, s);
  const BistabilityCheck& c = ref_check();

  const BasinResult a = classify_basin(*c.tc0, s, f);
  CHECK(a.basin == Basin::tc0);
  CHECK(a.matched);
  CHECK(a.settle_time == 0.0);

  // at zero contrast the quarter-turn of a tuned state is again an equilibrium
  const DriveFrame blind = lgn_frame(0.1, 0.0, 0.0, s);
  const BasinResult zero = classify_basin(*c.tc0, s, blind, ClassifyOptions{50.0});
  REQUIRE(zero.basin == Basin::tc0);
  const BasinResult b = classify_basin(group_act(zero.steady, 0.5 * kPi), s, blind, ClassifyOptions{50.0});
  CHECK(b.basin == Basin::tc90);
  CHECK(std::abs(wrap_orientation(peak_angle(b.steady) - 0.5 * kPi)) < 1e-12);

  // too short a run is reported as undecided
  ClassifyOptions brief;
  brief.t_max = 10.0;
  CHECK(classify_basin(CortexState(0.3, {Complex(0.05, 0.1)}), s, f, brief).basin == Basin::undecided);
}

TEST_CASE("random initial states settle in a tuned basin") {
  const ModelSpec s = ref_spec();
  const DriveFrame f = lgn_frame(0.1, 0.0, 0.01, s);
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  ClassifyOptions opts;
  opts.t_max = 8000.0;
  opts.dt = 0.1;
  for (int i = 0; i < 6; ++i) {
    const CortexState s0(u(rng), {Complex(u(rng), u(rng))});
    const Basin b = classify_basin(s0, s, f, opts).basin;
    CHECK((b == Basin::tc0 || b == Basin::tc90));
  }
}

TEST_CASE("scenario validation") {
  Scenario s = Scenario::rotate_default();
  CHECK_NOTHROW(s.validate());
  s.switch_time = 500.0;  // before the ramp ends
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = Scenario::mixture_default();
  s.ramp_duration = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = Scenario::rotate_default();
  s.initial = InitialCondition::custom;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = Scenario::rotate_default();
  s.spec.gain = 3.0;
  CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
  CHECK_THROWS_AS(mixture_protocol(Scenario::rotate_default()), std::invalid_argument);
}

TEST_CASE("stimulus schedules") {
  const Scenario r = Scenario::rotate_default();
  const Stimulus st = r.stimulus();
  auto angle = [](const DriveFrame& f) { return 0.5 * std::arg(f.ik[0]); };
  CHECK(angle(st.at(0.0)) == Approx(0.0));
  CHECK(angle(st.at(500.0)) == Approx(0.25 * kPi));
  CHECK(std::abs(wrap_orientation(angle(st.at(1500.0)) - 0.5 * kPi)) < 1e-12);
  CHECK(angle(st.at(2.1e4)) == Approx(0.0));
  CHECK(r.final_stimulus_angle() == Approx(0.0));

  const Scenario m = Scenario::mixture_default();
  const Stimulus ms = m.stimulus();
  CHECK(std::abs(ms.at(500.0).ik[0] - lgn_frame(0.1, 0.0, 0.01, m.spec).ik[0]) < 1e-15);
  CHECK(std::abs(ms.at(5500.0).ik[0]) < 1e-15);  // halfway: orientation-blind
  CHECK(std::abs(ms.at(1.1e4).ik[0] - lgn_frame(0.1, 0.5 * kPi, 0.01, m.spec).ik[0]) < 1e-15);
  CHECK(std::abs(wrap_orientation(m.final_stimulus_angle() - 0.5 * kPi)) < 1e-12);
}

TEST_CASE("static stimulus keeps TC0") {
  Scenario s = Scenario::rotate_default();
  s.kind = ScenarioKind::static_stimulus;
  s.t_end = 2000.0;
  const OutcomeReport r = run_scenario(s);
  CHECK(r.basin == Basin::tc0);
  CHECK_FALSE(r.illusion_detected);
  CHECK(std::abs(r.final_peak_angle) < 1e-12);
}

TEST_CASE("mixture without change keeps TC0") {
  Scenario s = Scenario::mixture_default();
  s.angle_b = 0.0;
  s.final_angle = 0.0;
  s.t_end = s.switch_time = 3000.0;
  s.ramp_start = 1000.0;
  s.ramp_duration = 1000.0;
  const OutcomeReport r = mixture_protocol(s);
  CHECK(r.basin == Basin::tc0);
  CHECK_FALSE(r.illusion_detected);
}

TEST_CASE("instant switch from rest follows the stimulus") {
  Scenario s = Scenario::mixture_default();
  s.ramp_start = 0.0;
  s.ramp_duration = 0.0;
  s.initial = InitialCondition::rest;
  s.t_end = s.switch_time = 3000.0;
  const OutcomeReport r = mixture_protocol(s);
  CHECK(r.basin == Basin::tc90);
  CHECK_FALSE(r.illusion_detected);
  CHECK(r.asymptotic_basin == Basin::tc90);
}

TEST_CASE("shifted rotate protocol on a short timeline") {
  Scenario a = Scenario::rotate_default();
  a.ramp_duration = 100.0;
  a.switch_time = 300.0;
  a.t_end = 500.0;
  Scenario b = a;
  b.angle_offset = 0.3;
  const OutcomeReport ra = rotate_protocol(a), rb = rotate_protocol(b);
  REQUIRE(ra.phase_track.size() == rb.phase_track.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < ra.phase_track.size(); ++i)
    worst = std::max(worst, std::abs(wrap_orientation(rb.phase_track[i] - ra.phase_track[i] - 0.3)));
  CHECK(worst < 1e-6);
  CHECK(ra.basin == rb.basin);
  CHECK(std::abs(wrap_orientation(rb.final_stimulus_angle - ra.final_stimulus_angle - 0.3)) < 1e-12);
}

TEST_CASE("identical scenarios give identical reports") {
  Scenario a = Scenario::rotate_default();
  a.ramp_duration = 100.0;
  a.switch_time = 300.0;
  a.t_end = 400.0;
  const OutcomeReport x = run_scenario(a), y = run_scenario(a);
  REQUIRE(x.phase_track.size() == y.phase_track.size());
  for (std::size_t i = 0; i < x.phase_track.size(); ++i) CHECK(x.phase_track[i] == y.phase_track[i]);
  CHECK(x.final_state.v0 == y.final_state.v0);
  CHECK(x.final_state.z[0] == y.final_state.z[0]);
}

TEST_CASE("ramp duration scan") {
  Scenario base = Scenario::rotate_default();
  base.switch_time = 2000.0;
  base.t_end = 2200.0;
  const RampScan scan = ramp_duration_scan(base, {0.0, 10.0, 1000.0}, 2);
  REQUIRE(scan.samples.size() >= 3);
  // a zero-length ramp jumps straight to the orthogonal drive, which cannot
  // move a state that is locked in the reflection-invariant plane
  CHECK_FALSE(scan.samples.front().illusion);
  CHECK(scan.samples.back().illusion);
  REQUIRE(scan.critical_duration.has_value());
  CHECK(*scan.critical_duration > 0.0);
  CHECK(*scan.critical_duration <= 10.0);
}
