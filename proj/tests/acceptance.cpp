// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ipmsim/diagnostics.hpp"
#include "ipmsim/integrator.hpp"
#include "ipmsim/scenario.hpp"
#include "ipmsim/stability.hpp"
#include "random_params.hpp"
#include "rk4_oracle.hpp"

using namespace ipmsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Everything integrated along the way, for the boundedness sweep at the end.
struct Checked {
  std::string name;
  ModelParameters params;
  ImpulseSchedule schedule;
  Trajectory traj;
};
std::vector<Checked> g_runs;

void keep(std::string name, const ModelParameters& p, const ImpulseSchedule& s, const Trajectory& traj) {
  g_runs.push_back({std::move(name), p, s, traj});
}

ImpulseSchedule only(std::optional<double> tau1, std::optional<double> tau2, double v_i, double s_i) {
  ImpulseSchedule s;
  s.tau1 = tau1;
  s.tau2 = tau2;
  s.v_i = v_i;
  s.s_i = s_i;
  return s;
}

Outcome analytic_orbits() {
  const ModelParameters p;
  // gamma * tau1 = mu * tau2 = 1.5, so the start-up transient has decayed by
  // exp(-22.5) after 15 periods.
  const auto bio = only(10.0, std::nullopt, 6.0, 0.0);
  const auto chem = only(std::nullopt, 5.0, 0.0, 0.15);
  const auto tv = integrate(p, bio, {0, 0, 0, 0, 0}, {0.0, 200.0});
  const auto ts = integrate(p, chem, {0, 0, 0, 0, 0}, {0.0, 100.0});
  keep("orbit-v", p, bio, tv);
  keep("orbit-s", p, chem, ts);
  double sup_v = 0.0;
  double sup_s = 0.0;
  for (const auto& s : tv.samples()) {
    if (s.t >= 150.0) sup_v = std::max(sup_v, std::abs(s.state.v - analytic_periodic_bio(s.t, bio, p)));
  }
  for (const auto& s : ts.samples()) {
    if (s.t >= 75.0) sup_s = std::max(sup_s, std::abs(s.state.s - analytic_periodic_chem(s.t, chem, p)));
  }
  return {sup_v < 1e-6 && sup_s < 1e-6, fmt::format("sup|v-v*| = {:.3g}, sup|s-s*| = {:.3g}", sup_v, sup_s)};
}

Outcome floquet_cross_validation() {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto draw = testing::random_same_interval(rng);
    const auto analytic = analytic_multipliers(draw.params, draw.schedule);
    const auto numeric = analyze_stability(draw.params, draw.schedule).numeric_multipliers;
    for (std::size_t i = 0; i < kStateDim; ++i) {
      worst = std::max(worst, std::abs(numeric[i] - analytic[i]) / analytic[i]);
    }
  }
  return {worst < 1e-6, fmt::format("20 draws, worst relative error {:.3g}", worst)};
}

double closed_form_tau(const ModelParameters& p, double v_i, double s_i) {
  return (p.lambda * v_i / p.gamma + p.m1 * s_i / p.mu) / (p.c1 * p.alpha * p.k - p.d);
}

Outcome critical_period_oracle() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> vi(1.0, 12.0), si(0.0, 0.3);
  double worst = 0.0;
  int found = 0;
  bool kinds_ok = true;
  while (found < 10) {
    const auto p = testing::random_parameters(rng);
    // Stabilizable: y-exponent grows with tau, z-exponent always negative.
    if (!(p.c1 * p.alpha * p.k - p.d > 0.0) || !(p.c2 * p.phi * p.alpha * p.k - (p.d + p.delta) < 0.0)) continue;
    const double v = vi(rng);
    const double s = si(rng);
    const auto cp = critical_period(p, v, s);
    kinds_ok = kinds_ok && cp.kind == CriticalPeriod::Kind::Finite;
    worst = std::max(worst, std::abs(cp.value - closed_form_tau(p, v, s)));
    ++found;
  }
  const auto fig1 = critical_period(ModelParameters{}, 6.0, 0.1);
  const double fig1_err = std::abs(fig1.value - 285.3333333333333);
  return {kinds_ok && worst < 1e-8 && fig1_err < 1e-8,
          fmt::format("worst |tau* - closed form| = {:.3g} d, fig1 tau* = {:.10g}", worst, fig1.value)};
}

Outcome theory_implies_extinction() {
  std::mt19937_64 rng(1313);
  int found = 0;
  int attempts = 0;
  int ok = 0;
  double worst_y = 0.0;
  double worst_z = 0.0;
  while (found < 10 && attempts < 10000) {
    ++attempts;
    const auto draw = testing::random_same_interval(rng);
    if (!check_condition(draw.params, draw.schedule, ConditionSet::SameInterval)) continue;
    ++found;
    const auto& p = draw.params;
    const double tf = 40.0 * *draw.schedule.tau1;
    const auto traj = integrate(p, draw.schedule, {1.1 * p.k, 0.2, 0.1, 0.0, 0.0}, {0.0, tf});
    keep(fmt::format("condition-draw-{}", found), p, draw.schedule, traj);
    const auto report = verify_trajectory(traj, p, draw.schedule);
    const auto& last = traj.samples().back().state;
    worst_y = std::max(worst_y, last.y);
    worst_z = std::max(worst_z, last.z);
    if (last.y < 1e-6 && last.z < 1e-6 && report.extinction_y && report.extinction_z) ++ok;
  }
  return {found == 10 && ok == 10,
          fmt::format("{}/{} draws extinct, worst terminal y = {:.3g}, z = {:.3g}", ok, found, worst_y, worst_z)};
}

double window_mean_y(const Trajectory& traj, double from, double to) {
  double area = 0.0;
  const auto& s = traj.samples();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = std::max(s[i - 1].t, from);
    const double b = std::min(s[i].t, to);
    if (b <= a) continue;
    area += 0.5 * (s[i - 1].state.y + s[i].state.y) * (b - a);
  }
  return area / (to - from);
}

Outcome figure1_ordering() {
  const auto file = load_preset("fig1");
  std::vector<std::pair<double, double>> means;
  for (const auto& run : file.runs) {
    const auto r = run_single(run);
    keep(run.stem(), run.params, run.schedule, r.trajectory);
    means.emplace_back(run.schedule.v_i, window_mean_y(r.trajectory, 150.0, 200.0));
  }
  std::sort(means.begin(), means.end());
  bool ok = means.size() == 3 && means[0].first == 0.0 && means[1].first == 6.0 && means[2].first == 12.0;
  for (std::size_t i = 1; i < means.size(); ++i) ok = ok && means[i].second < means[i - 1].second;
  std::string detail = "mean y on [150, 200]:";
  for (const auto& [v, m] : means) detail += fmt::format(" v_i={} {:.3g}", v, m);
  return {ok, detail};
}

Outcome figure3_4_extinction() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig3", "fig4"}) {
    for (const auto& run : load_preset(name).runs) {
      const auto r = run_single(run, true);
      keep(run.stem(), run.params, run.schedule, r.trajectory);
      const auto& d = *r.diagnostics;
      ok = ok && d.extinction_y && d.extinction_z;
      detail += fmt::format("{} y@{} z@{}; ", run.stem(), d.extinction_y ? fmt::format("{:.1f}", *d.extinction_y) : "none",
                            d.extinction_z ? fmt::format("{:.1f}", *d.extinction_z) : "none");
      if (std::string(name) != "fig4") continue;
      int both = 0;
      for (const auto& e : r.trajectory.events()) {
        const bool multiple = std::fmod(e.t, 6.0) == 0.0;
        ok = ok && (e.kind == ImpulseKind::Both) == multiple;
        if (e.kind == ImpulseKind::Both) ++both;
      }
      const auto expected = static_cast<int>(std::floor(run.t_span.tf / 6.0)) + 1;
      ok = ok && both == expected;
      detail += fmt::format("{} Both events at multiples of 6", both);
    }
  }
  return {ok, detail};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  for (const auto& run : load_preset("fig1").runs) {
    const auto traj = integrate(run.params, run.schedule, run.initial, {0.0, 50.0}, run.solver);
    keep(run.stem() + "-short", run.params, run.schedule, traj);
    const auto ref = testing::rk4_oracle(run.params, run.schedule, run.initial.as_vector(), 50.0, 1e-4, 100);
    for (const auto& pt : ref) {
      const auto u = traj.at(pt.t).as_vector();
      for (std::size_t i = 0; i < kStateDim; ++i) worst = std::max(worst, std::abs(u[i] - pt.u[i]));
    }
  }
  return {worst < 1e-5, fmt::format("max |adaptive - RK4| = {:.3g}", worst)};
}

// Runs last so that it covers every trajectory gathered above.
Outcome bounded_and_positive() {
  bool ok = !g_runs.empty();
  std::string failures;
  for (const auto& run : g_runs) {
    const auto d = verify_trajectory(run.traj, run.params, run.schedule);
    if (!(d.bound_ok && d.nonneg_ok && d.clamp_count == 0)) {
      ok = false;
      failures += " " + run.name;
    }
  }
  return {ok, fmt::format("{} trajectories{}", g_runs.size(), failures.empty() ? "" : "; failing:" + failures)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "analytic-orbit agreement", 1.0, analytic_orbits},
      {2, "Floquet cross-validation", 10.0, floquet_cross_validation},
      {3, "critical-period oracle", 1.0, critical_period_oracle},
      {4, "conditions imply extinction", 30.0, theory_implies_extinction},
      {5, "fig1 ordering", 5.0, figure1_ordering},
      {6, "fig3/fig4 extinction", 10.0, figure3_4_extinction},
      {8, "RK4 oracle equivalence", 30.0, oracle_equivalence},
      {7, "boundedness and positivity", 30.0, bounded_and_positive},
  };
  std::vector<std::string> lines(9);
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.budget_s;
    if (!pass) ++failed;
    lines[c.id] = fmt::format("{} {} {}: {} ({:.2f} s, budget {:g} s)", pass ? "PASS" : "FAIL", c.id, c.name,
                              o.detail, secs, c.budget_s);
  }
  for (int i = 1; i <= 8; ++i) std::puts(lines[i].c_str());
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
