#include "ipmsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"
#include "ipmsim/stability.hpp"

namespace ipmsim {

namespace {

double window_period_for(const ImpulseSchedule& schedule) {
  try {
    return combined_period(schedule);
  } catch (const DomainError&) {
    return std::max(schedule.tau1.value_or(0.0), schedule.tau2.value_or(0.0));
  }
}

std::optional<double> extinction_time(const Trajectory& traj, std::size_t component, double threshold,
                                      double persistence) {
  const auto& samples = traj.samples();
  const auto value = [component](const SystemState& st) { return st.as_vector()[component]; };

  std::optional<std::size_t> last_above;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (value(samples[i].state) >= threshold) last_above = i;
  }
  double crossing = traj.span().t0;
  if (last_above) {
    if (*last_above + 1 >= samples.size()) return std::nullopt;
    double lo = samples[*last_above].t;
    double hi = samples[*last_above + 1].t;
    for (int iter = 0; iter < 60 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
      const double mid = 0.5 * (lo + hi);
      (value(traj.at(mid)) >= threshold ? lo : hi) = mid;
    }
    crossing = hi;
  }
  if (traj.span().tf - crossing < persistence) return std::nullopt;
  return crossing;
}

}  // namespace

double theoretical_bound(const ModelParameters& params, const ImpulseSchedule& schedule) {
  if (!(params.theta < 1.0)) throw DomainError("theoretical_bound: requires theta < 1");
  params.validate();
  schedule.validate();
  const double m = params.min_decay_rate();
  const double m0 = params.k * (m + params.r) * (m + params.r) / (4.0 * params.r);
  double impulse_term = 0.0;
  if (schedule.tau1) impulse_term = std::max(impulse_term, schedule.v_i / -std::expm1(-m * *schedule.tau1));
  if (schedule.tau2) impulse_term = std::max(impulse_term, schedule.s_i / -std::expm1(-m * *schedule.tau2));
  return m0 / m + impulse_term;
}

DiagnosticsReport verify_trajectory(const Trajectory& traj, const ModelParameters& params,
                                    const ImpulseSchedule& schedule, const DiagnosticsConfig& config) {
  if (traj.samples().empty()) throw DomainError("verify_trajectory: empty trajectory");
  DiagnosticsReport report;
  report.bound_M = theoretical_bound(params, schedule);
  report.window_period = window_period_for(schedule);
  report.clamp_count = traj.stats().clamped;

  report.max_observed.fill(-std::numeric_limits<double>::infinity());
  report.min_observed = std::numeric_limits<double>::infinity();
  const auto observe = [&report](const SystemState& st) {
    const StateVector u = st.as_vector();
    for (std::size_t i = 0; i < kStateDim; ++i) {
      report.max_observed[i] = std::max(report.max_observed[i], u[i]);
      report.min_observed = std::min(report.min_observed, u[i]);
    }
  };
  for (const auto& s : traj.samples()) observe(s.state);
  for (const auto& e : traj.events()) observe(e.pre);

  report.nonneg_ok = report.min_observed >= -traj.config().atol;
  report.bound_ok = std::all_of(report.max_observed.begin(), report.max_observed.end(),
                                [&](double v) { return v <= report.bound_M; });

  const TimeSpan span = traj.span();
  const double window = config.trailing_periods * report.window_period;
  if (report.window_period > 0.0 && span.tf - span.t0 >= window) {
    StateVector sup{};
    for (const auto& s : traj.samples()) {
      if (s.t < span.tf - window) continue;
      const double v_star = schedule.tau1 ? analytic_periodic_bio(s.t, schedule, params) : 0.0;
      const double s_star = schedule.tau2 ? analytic_periodic_chem(s.t, schedule, params) : 0.0;
      const StateVector dist = {std::abs(s.state.x - params.k), std::abs(s.state.y), std::abs(s.state.z),
                                std::abs(s.state.v - v_star), std::abs(s.state.s - s_star)};
      for (std::size_t i = 0; i < kStateDim; ++i) sup[i] = std::max(sup[i], dist[i]);
    }
    report.convergence_sup = sup;
  }

  const auto& samples = traj.samples();
  double area = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = samples[i - 1].state.y + samples[i - 1].state.z;
    const double b = samples[i].state.y + samples[i].state.z;
    area += 0.5 * (a + b) * (samples[i].t - samples[i - 1].t);
  }
  report.mean_pest_load = area / (span.tf - span.t0);

  report.extinction_y = extinction_time(traj, 1, config.extinction_threshold, report.window_period);
  report.extinction_z = extinction_time(traj, 2, config.extinction_threshold, report.window_period);
  return report;
}

std::string to_key_value(const DiagnosticsReport& report) {
  static constexpr const char* names[] = {"x", "y", "z", "v", "s"};
  const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string("none"); };
  std::ostringstream out;
  out << fmt::format("bound_M = {}\n", report.bound_M);
  for (std::size_t i = 0; i < kStateDim; ++i) out << fmt::format("max_observed.{} = {}\n", names[i], report.max_observed[i]);
  out << fmt::format("min_observed = {}\n", report.min_observed);
  out << fmt::format("nonneg_ok = {}\n", report.nonneg_ok);
  out << fmt::format("bound_ok = {}\n", report.bound_ok);
  out << fmt::format("clamp_count = {}\n", report.clamp_count);
  out << fmt::format("window_period = {}\n", report.window_period);
  if (report.convergence_sup) {
    for (std::size_t i = 0; i < kStateDim; ++i) {
      out << fmt::format("convergence_sup.{} = {}\n", names[i], (*report.convergence_sup)[i]);
    }
  } else {
    out << "convergence_sup = unavailable\n";
  }
  out << fmt::format("mean_pest_load = {}\n", report.mean_pest_load);
  out << fmt::format("extinction_time.y = {}\n", opt(report.extinction_y));
  out << fmt::format("extinction_time.z = {}\n", opt(report.extinction_z));
  return out.str();
}

}  // namespace ipmsim
