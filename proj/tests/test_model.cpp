#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "ipmsim/errors.hpp"
#include "ipmsim/model.hpp"

using namespace ipmsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("vector field vanishes at the origin and at the crop equilibrium") {
  const ModelParameters p;
  for (double c : vector_field(StateVector{0, 0, 0, 0, 0}, p)) CHECK(c == 0.0);
  for (double c : vector_field(StateVector{p.k, 0, 0, 0, 0}, p)) CHECK(c == 0.0);
}

TEST_CASE("vector field matches the high-precision evaluation at a reference state") {
  // mpmath, 50 digits
  const StateVector f = vector_field(StateVector{0.5, 0.2, 0.1, 1.0, 0.1}, ModelParameters{});
  const StateVector expected{0.004, -0.086, 0.0398, -0.13, -0.03};
  for (std::size_t i = 0; i < kStateDim; ++i) CHECK_THAT(f[i], WithinAbs(expected[i], 1e-15));
}

TEST_CASE("vector field rejects non-finite input") {
  const ModelParameters p;
  CHECK_THROWS_AS(vector_field(StateVector{std::nan(""), 0, 0, 0, 0}, p), DomainError);
  CHECK_THROWS_AS(vector_field(StateVector{0, std::numeric_limits<double>::infinity(), 0, 0, 0}, p), DomainError);
}

TEST_CASE("non-negative orthant is forward invariant") {
  const ModelParameters p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    for (std::size_t zeroed = 0; zeroed < kStateDim; ++zeroed) {
      StateVector s{u(rng), u(rng), u(rng), u(rng), u(rng)};
      s[zeroed] = 0.0;
      CHECK(vector_field(s, p)[zeroed] >= 0.0);
    }
  }
}

TEST_CASE("apply_impulse increments only the pesticide coordinates") {
  ImpulseSchedule s;
  s.v_i = 6.0;
  CHECK(apply_impulse({1, 1, 1, 0, 0}, ImpulseKind::Bio, s) == SystemState{1, 1, 1, 6, 0});

  ImpulseSchedule zero;
  CHECK(apply_impulse({1, 1, 1, 2, 3}, ImpulseKind::Both, zero) == SystemState{1, 1, 1, 2, 3});

  ImpulseSchedule chem;
  chem.s_i = 0.15;
  CHECK(apply_impulse({1, 0, 0, 4, 0.5}, ImpulseKind::Chem, chem) == SystemState{1, 0, 0, 4, 0.5 + 0.15});

  ImpulseSchedule both;
  both.v_i = 2.0;
  both.s_i = 0.5;
  const SystemState start{0.3, 0.2, 0.1, 1.0, 1.0};
  const SystemState one = apply_impulse(apply_impulse(start, ImpulseKind::Bio, both), ImpulseKind::Chem, both);
  const SystemState other = apply_impulse(apply_impulse(start, ImpulseKind::Chem, both), ImpulseKind::Bio, both);
  CHECK(apply_impulse(start, ImpulseKind::Both, both) == one);
  CHECK(one == other);
}

TEST_CASE("periodic virus orbit") {
  const ModelParameters p;
  ImpulseSchedule s;
  s.tau1 = 5.0;
  s.v_i = 6.0;

  SECTION("post-impulse value at the pulse") {
    // 6 / (1 - exp(-0.75)), mpmath
    CHECK_THAT(analytic_periodic_bio(0.0, s, p), WithinRel(11.37153080641406, 1e-14));
    CHECK_THAT(analytic_periodic_bio(15.0, s, p), WithinRel(11.37153080641406, 1e-13));
  }

  SECTION("zero forcing gives the zero orbit") {
    ImpulseSchedule none = s;
    none.v_i = 0.0;
    CHECK(analytic_periodic_bio(3.7, none, p) == 0.0);
  }

  SECTION("periodicity and jump size") {
    for (double t : {0.3, 1.9, 4.2, 7.7}) {
      CHECK_THAT(analytic_periodic_bio(t + 5.0, s, p), WithinRel(analytic_periodic_bio(t, s, p), 1e-12));
    }
    const double post = analytic_periodic_bio(10.0, s, p);
    const double pre = periodic_pulse_level(s.v_i, p.gamma, 5.0, 5.0);
    CHECK_THAT(post - pre, WithinAbs(6.0, 1e-13));
  }

  SECTION("solves the decay equation between pulses") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    int checked = 0;
    while (checked < 100) {
      const double t = u(rng);
      const double phase = std::fmod(t, 5.0);
      if (phase < 1e-3 || phase > 5.0 - 1e-3) continue;
      const double h = 1e-5;
      const double deriv = (analytic_periodic_bio(t + h, s, p) - analytic_periodic_bio(t - h, s, p)) / (2 * h);
      CHECK_THAT(deriv, WithinRel(-p.gamma * analytic_periodic_bio(t, s, p), 1e-6));
      ++checked;
    }
  }

  SECTION("missing period is a domain error") {
    ImpulseSchedule none;
    CHECK_THROWS_AS(analytic_periodic_bio(1.0, none, p), DomainError);
    CHECK_THROWS_AS(analytic_periodic_chem(1.0, none, p), DomainError);
  }
}

TEST_CASE("periodic chemical orbit") {
  const ModelParameters p;
  ImpulseSchedule s;
  s.tau2 = 5.0;
  s.s_i = 0.15;
  // 0.15 / (1 - exp(-1.5)), mpmath
  CHECK_THAT(analytic_periodic_chem(0.0, s, p), WithinRel(0.19308253751833024, 1e-14));

  ImpulseSchedule none = s;
  none.s_i = 0.0;
  CHECK(analytic_periodic_chem(2.0, none, p) == 0.0);

  // Midpoint rule over one period against s_i / mu.
  const int n = 200000;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += analytic_periodic_chem((i + 0.5) * 5.0 / n, s, p);
  integral *= 5.0 / n;
  CHECK_THAT(integral, WithinRel(s.s_i / p.mu, 1e-8));

  const double pre = periodic_pulse_level(s.s_i, p.mu, 5.0, 5.0);
  CHECK_THAT(analytic_periodic_chem(5.0, s, p) - pre, WithinAbs(0.15, 1e-15));
}

TEST_CASE("logistic closed form") {
  const ModelParameters p;
  // 0.1 / (0.1 + 0.9 exp(-1)), mpmath
  CHECK_THAT(logistic_solution(10.0, 0.1, p), WithinRel(0.23196931668407394, 1e-14));
  CHECK(logistic_solution(37.0, p.k, p) == p.k);
  CHECK(logistic_solution(5.0, 0.0, p) == 0.0);
  CHECK_THAT(logistic_solution(1e4, 0.01, p), WithinRel(p.k, 1e-12));
  CHECK_THROWS_AS(logistic_solution(1.0, -0.1, p), DomainError);

  for (double x0 : {0.05, 0.4, 1.7}) {
    for (double t : {0.5, 3.0, 20.0, 60.0}) {
      const double h = 1e-4;
      const double deriv = (logistic_solution(t + h, x0, p) - logistic_solution(t - h, x0, p)) / (2 * h);
      const double x = logistic_solution(t, x0, p);
      CHECK_THAT(deriv, WithinRel(p.r * x * (1 - x / p.k), 1e-8));
    }
  }
}

TEST_CASE("parameter and schedule validation") {
  ModelParameters p;
  CHECK_NOTHROW(p.validate());
  CHECK_THAT(p.min_decay_rate(), WithinRel(0.05, 1e-14));

  ModelParameters bad = p;
  bad.theta = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = p;
  bad.c1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = p;
  bad.phi = 0.0;
  CHECK_NOTHROW(bad.validate());
  bad.phi = -0.1;
  CHECK_THROWS_AS(bad.validate(), DomainError);

  ImpulseSchedule s;
  s.tau1 = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.tau1 = 5.0;
  s.s_i = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("impulse kinds print as csv tags") {
  CHECK(to_string(ImpulseKind::Bio) == "bio");
  CHECK(to_string(ImpulseKind::Chem) == "chem");
  CHECK(to_string(ImpulseKind::Both) == "both");
}
