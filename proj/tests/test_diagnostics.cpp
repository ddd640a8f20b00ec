#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ipmsim/diagnostics.hpp"
#include "ipmsim/errors.hpp"
#include "ipmsim/integrator.hpp"
#include "random_params.hpp"

using namespace ipmsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ImpulseSchedule schedule(std::optional<double> tau1, std::optional<double> tau2, double v_i, double s_i) {
  ImpulseSchedule s;
  s.tau1 = tau1;
  s.tau2 = tau2;
  s.v_i = v_i;
  s.s_i = s_i;
  return s;
}

}  // namespace

TEST_CASE("theoretical bound") {
  const ModelParameters p;
  SECTION("impulse-free limit") {
    CHECK_THAT(theoretical_bound(p, ImpulseSchedule{}), WithinRel(1.125, 1e-14));
    CHECK_THAT(theoretical_bound(p, schedule(5.0, 5.0, 0.0, 0.0)), WithinRel(1.125, 1e-14));
  }
  SECTION("each agent uses its own strength and period") {
    const double m = 0.05;
    const double bio = 6.0 / (1.0 - std::exp(-m * 5.0));
    const double chem = 0.15 / (1.0 - std::exp(-m * 2.0));
    CHECK_THAT(theoretical_bound(p, schedule(5.0, 2.0, 6.0, 0.15)), WithinRel(1.125 + std::max(bio, chem), 1e-13));
    CHECK_THAT(theoretical_bound(p, schedule(std::nullopt, 2.0, 6.0, 0.15)), WithinRel(1.125 + chem, 1e-13));
  }
  SECTION("min is symmetric in tied candidates") {
    ModelParameters a = p;
    a.d = 0.1;
    a.gamma = 0.05;
    ModelParameters b = p;
    b.d = 0.1;
    b.mu = 0.05;
    CHECK(a.min_decay_rate() == b.min_decay_rate());
    CHECK(theoretical_bound(a, ImpulseSchedule{}) == theoretical_bound(b, ImpulseSchedule{}));
  }
  SECTION("undefined for theta >= 1") {
    ModelParameters bad = p;
    bad.theta = 1.0;
    CHECK_THROWS_AS(theoretical_bound(bad, ImpulseSchedule{}), DomainError);
  }
}

TEST_CASE("starting on the pest-free orbit gives zero convergence distance") {
  const ModelParameters p;
  ImpulseSchedule s = schedule(5.0, 5.0, 6.0, 0.15);
  s.first_impulse_at_zero = false;
  const SystemState start{p.k, 0.0, 0.0, analytic_periodic_bio(0.0, s, p), analytic_periodic_chem(0.0, s, p)};
  const auto traj = integrate(p, s, start, {0.0, 50.0});
  const auto report = verify_trajectory(traj, p, s);
  REQUIRE(report.convergence_sup.has_value());
  for (double d : *report.convergence_sup) CHECK(d < 1e-6);
  CHECK(report.extinction_y == 0.0);
  CHECK(report.extinction_z == 0.0);
}

TEST_CASE("fig3 schedule drives both pest classes extinct") {
  const ModelParameters p;
  for (double s_i : {0.05, 0.1, 0.15}) {
    const auto s = schedule(5.0, 5.0, 6.0, s_i);
    const auto traj = integrate(p, s, {0.8, 0.3, 0.1, 0.0, 0.0}, {0.0, 200.0});
    const auto report = verify_trajectory(traj, p, s);
    CHECK(report.extinction_y.has_value());
    CHECK(report.extinction_z.has_value());
    CHECK(report.nonneg_ok);
    CHECK(report.bound_ok);
    CHECK(report.clamp_count == 0);
  }
}

TEST_CASE("unchecked growth is never reported extinct") {
  const ModelParameters p;
  const auto s = schedule(5.0, std::nullopt, 0.0, 0.0);
  const auto traj = integrate(p, s, {0.8, 0.3, 0.1, 0.0, 0.0}, {0.0, 200.0});
  const auto report = verify_trajectory(traj, p, s);
  CHECK_FALSE(report.extinction_y.has_value());
}

TEST_CASE("extinction is absorbing at threshold scale") {
  std::mt19937_64 rng(17);
  int extinct_runs = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const auto draw = testing::random_same_interval(rng);
    const auto traj =
        integrate(draw.params, draw.schedule, {draw.params.k, 0.2, 0.1, 0.0, 0.0}, {0.0, 40.0 * *draw.schedule.tau1});
    const auto report = verify_trajectory(traj, draw.params, draw.schedule);
    CHECK(report.nonneg_ok);
    if (!report.extinction_y) continue;
    ++extinct_runs;
    double first_below = -1.0;
    for (const auto& s : traj.samples()) {
      if (first_below < 0.0) {
        if (s.state.y < 1e-6) first_below = s.t;
        continue;
      }
      if (s.t - first_below >= report.window_period) CHECK(s.state.y <= 1e-4);
      if (s.state.y >= 1e-6 && s.t - first_below < report.window_period) first_below = -1.0;
    }
  }
  CHECK(extinct_runs > 0);
}

TEST_CASE("virus convergence is at least as fast as exp(-gamma tau n)") {
  ModelParameters p;
  const double tau = 5.0;
  const auto s = schedule(tau, std::nullopt, 6.0, 0.0);
  const auto traj = integrate(p, s, {0, 0, 0, 0, 0}, {0.0, 30 * tau});
  std::vector<double> per_period(30, 0.0);
  for (const auto& sample : traj.samples()) {
    const auto n = std::min<std::size_t>(29, static_cast<std::size_t>(sample.t / tau));
    per_period[n] = std::max(per_period[n], std::abs(sample.state.v - analytic_periodic_bio(sample.t, s, p)));
  }
  // Floor at the solver's relative accuracy on v.
  const double floor = traj.config().rtol * analytic_periodic_bio(0.0, s, p);
  for (std::size_t n = 1; n < per_period.size(); ++n) {
    CHECK(per_period[n] <= 1.01 * per_period[0] * std::exp(-p.gamma * tau * static_cast<double>(n)) + floor);
  }
}

TEST_CASE("short runs leave convergence unavailable") {
  const ModelParameters p;
  const auto s = schedule(5.0, std::nullopt, 6.0, 0.0);
  const auto traj = integrate(p, s, {0.8, 0.3, 0.1, 0, 0}, {0.0, 20.0});
  const auto report = verify_trajectory(traj, p, s);
  CHECK_FALSE(report.convergence_sup.has_value());
  CHECK(to_key_value(report).find("convergence_sup = unavailable\n") != std::string::npos);
}

TEST_CASE("incommensurate periods fall back to the longer period for windows") {
  const ModelParameters p;
  const auto s = schedule(std::sqrt(2.0), 1.0, 6.0, 0.1);
  const auto traj = integrate(p, s, {0.8, 0.3, 0.1, 0, 0}, {0.0, 20.0});
  CHECK(verify_trajectory(traj, p, s).window_period == std::sqrt(2.0));
}

TEST_CASE("diagnostics report text") {
  const ModelParameters p;
  const auto s = schedule(5.0, 5.0, 6.0, 0.15);
  const auto report = verify_trajectory(integrate(p, s, {0.8, 0.3, 0.1, 0, 0}, {0.0, 100.0}), p, s);
  const auto text = to_key_value(report);
  CHECK(text.starts_with("bound_M = "));
  CHECK(text.find("nonneg_ok = true\n") != std::string::npos);
  CHECK(text.find("extinction_time.y = ") != std::string::npos);
  CHECK(text.find("extinction_time.y = none") == std::string::npos);
}
