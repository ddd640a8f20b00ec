#include "ipmsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"

namespace ipmsim {

namespace {

constexpr double kMaxDecayPerStep = 1.0;

double coincidence_tolerance(const ImpulseSchedule& schedule) {
  return 1e-9 * std::max(schedule.tau1.value_or(0.0), schedule.tau2.value_or(0.0));
}

void append_multiples(std::vector<ImpulseEvent>& out, double tau, ImpulseKind kind, bool from_zero, TimeSpan span,
                      double tol) {
  const double first = std::max(from_zero ? 0.0 : 1.0, std::ceil((span.t0 - tol) / tau));
  for (double n = first;; n += 1.0) {
    double t = n * tau;
    if (t > span.tf + tol) break;
    if (t < span.t0 - tol) continue;
    t = std::clamp(t, span.t0, span.tf);
    out.push_back({t, kind});
  }
}

// Tiny negative round-off in [-atol, 0) is reset to zero.
SystemState clamp_tiny_negatives(StateVector u, double atol) {
  for (double& c : u) {
    if (c < 0.0 && c >= -atol) c = 0.0;
  }
  return SystemState::from_vector(u);
}

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

void SolverConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("solver tolerances rtol and atol must be > 0");
  if (!(h_max > 0.0)) throw DomainError("solver h_max must be > 0");
  if (!(dense_dt > 0.0)) throw DomainError("solver dense_dt must be > 0");
  if (!std::isfinite(h_init)) throw DomainError("solver h_init must be finite");
}

std::vector<ImpulseEvent> impulse_calendar(const ImpulseSchedule& schedule, TimeSpan span) {
  if (!(span.t0 < span.tf)) throw DomainError("impulse_calendar: requires t0 < tf");
  schedule.validate();
  const double tol = coincidence_tolerance(schedule);

  std::vector<ImpulseEvent> raw;
  if (schedule.tau1) {
    append_multiples(raw, *schedule.tau1, ImpulseKind::Bio, schedule.first_impulse_at_zero, span, tol);
  }
  if (schedule.tau2) {
    append_multiples(raw, *schedule.tau2, ImpulseKind::Chem, schedule.first_impulse_at_zero, span, tol);
  }
  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  std::vector<ImpulseEvent> merged;
  for (const auto& ev : raw) {
    if (!merged.empty() && ev.t - merged.back().t <= tol && merged.back().kind != ev.kind) {
      merged.back().kind = ImpulseKind::Both;
      continue;
    }
    merged.push_back(ev);
  }
  return merged;
}

Trajectory integrate(const ModelParameters& params, const ImpulseSchedule& schedule, const SystemState& initial,
                     TimeSpan span, const SolverConfig& config) {
  params.validate();
  schedule.validate();
  config.validate();
  if (!std::isfinite(span.t0) || !std::isfinite(span.tf) || !(span.t0 < span.tf)) {
    throw DomainError("integrate: time span must be finite with t0 < tf");
  }
  for (double c : initial.as_vector()) {
    if (!std::isfinite(c) || c < 0.0) throw DomainError("integrate: initial state must be finite and non-negative");
  }

  const std::vector<ImpulseEvent> events = impulse_calendar(schedule, span);

  // Output grid: every dense_dt, with grid points that collide with an event
  // replaced by the event time itself.
  std::vector<double> sample_times;
  {
    const double merge_tol = 1e-9 * config.dense_dt;
    std::vector<double> fixed;
    fixed.reserve(events.size() + 2);
    fixed.push_back(span.t0);
    for (const auto& ev : events) fixed.push_back(ev.t);
    fixed.push_back(span.tf);
    const auto n_grid = static_cast<std::size_t>(std::floor((span.tf - span.t0) / config.dense_dt + 1e-9));
    sample_times = fixed;
    std::size_t f = 0;
    for (std::size_t i = 1; i <= n_grid; ++i) {
      const double t = span.t0 + static_cast<double>(i) * config.dense_dt;
      while (f < fixed.size() && fixed[f] < t - merge_tol) ++f;
      const bool near_fixed = (f < fixed.size() && std::abs(fixed[f] - t) <= merge_tol) ||
                              (f > 0 && std::abs(fixed[f - 1] - t) <= merge_tol);
      if (!near_fixed && t < span.tf) sample_times.push_back(t);
    }
    std::sort(sample_times.begin(), sample_times.end());
    sample_times.erase(std::unique(sample_times.begin(), sample_times.end()), sample_times.end());
  }

  Trajectory traj(span, config);
  auto rhs = [&params](double, const StateVector& u) { return vector_field_unchecked(u, params); };
  DormandPrince45<kStateDim, decltype(rhs)> stepper(rhs, {config.rtol, config.atol, config.h_max});
  // Pest classes far below atol escape error control. Near the edge of the
  // stability interval (h * |J_ii| ~ 3.3) they flip sign and barely decay, so
  // cap h * |J_ii| at 1 where the stability function still tracks exp.
  stepper.set_step_limit([&params](const StateVector& u) { return kMaxDecayPerStep / stiffness_bound(u, params); });

  StateVector state = initial.as_vector();
  double t = span.t0;
  double h = config.h_init;
  std::size_t next_event = 0;
  std::size_t next_sample = 0;

  auto apply_event = [&](const ImpulseEvent& ev) {
    const SystemState pre = SystemState::from_vector(state);
    const SystemState post = apply_impulse(pre, ev.kind, schedule);
    traj.events_.push_back({ev.t, pre, post, ev.kind});
    state = post.as_vector();
  };
  auto skip_samples_through = [&](double time) {
    while (next_sample < sample_times.size() &&
           (sample_times[next_sample] <= time || same_time(sample_times[next_sample], time))) {
      ++next_sample;
    }
  };

  if (!events.empty() && events.front().t == span.t0) apply_event(events[next_event++]);
  traj.samples_.push_back({span.t0, SystemState::from_vector(state)});
  skip_samples_through(span.t0);

  const auto on_step = [&](const DenseStep<kStateDim>& dense, StateVector& y) {
    traj.steps_.push_back(dense);
    bool modified = false;
    for (std::size_t i = 0; i < kStateDim; ++i) {
      if (y[i] >= 0.0) continue;
      if (y[i] < -config.atol) {
        throw IntegrationError(
            fmt::format("state component {} fell to {} (below -atol) at t = {}", i, y[i], dense.t1()), dense.t1());
      }
      traj.stats_.clamped += 1;
      traj.stats_.max_clamped_magnitude = std::max(traj.stats_.max_clamped_magnitude, -y[i]);
      y[i] = 0.0;
      modified = true;
    }
    const double t1 = dense.t1();
    while (next_sample < sample_times.size() && sample_times[next_sample] < t1 &&
           !same_time(sample_times[next_sample], t1)) {
      const double ts = sample_times[next_sample++];
      traj.samples_.push_back({ts, clamp_tiny_negatives(dense.eval(ts), config.atol)});
    }
    return modified;
  };

  while (t < span.tf) {
    const bool to_event = next_event < events.size();
    const double t_next = to_event ? events[next_event].t : span.tf;
    stepper.advance(t, state, t_next, h, on_step);
    t = t_next;
    if (to_event) apply_event(events[next_event++]);
    traj.samples_.push_back({t, SystemState::from_vector(state)});
    skip_samples_through(t);
  }

  const StepperStats& st = stepper.stats();
  traj.stats_.accepted = st.accepted;
  traj.stats_.rejected = st.rejected;
  traj.stats_.rhs_evals = st.rhs_evals;
  traj.stats_.error_estimate_sum = st.error_estimate_sum;
  traj.stats_.max_local_error = st.max_local_error;
  return traj;
}

SystemState Trajectory::at(double t) const {
  const double tol = 1e-12 * std::max({1.0, std::abs(span_.t0), std::abs(span_.tf)});
  if (!std::isfinite(t) || t < span_.t0 - tol || t > span_.tf + tol) {
    throw DomainError(fmt::format("time {} outside trajectory span [{}, {}]", t, span_.t0, span_.tf));
  }
  auto ev = std::lower_bound(events_.begin(), events_.end(), t - tol,
                             [](const EventRecord& e, double value) { return e.t < value; });
  if (ev != events_.end() && std::abs(ev->t - t) <= tol) return ev->post;
  if (t <= span_.t0 || steps_.empty()) return samples_.front().state;
  if (t >= span_.tf) return samples_.back().state;

  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double value, const DenseStep<kStateDim>& s) { return value < s.t0; });
  if (it != steps_.begin()) --it;
  return clamp_tiny_negatives(it->eval(t), config_.atol);
}

std::vector<SystemState> sample_dense(const Trajectory& traj, std::span<const double> times) {
  std::vector<SystemState> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(traj.at(t));
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,z,v,s,event\n";
  const auto row = [&out](double t, const SystemState& st, std::string_view tag) {
    out << fmt::format("{},{},{},{},{},{},{}\n", t, st.x, st.y, st.z, st.v, st.s, tag);
  };
  const auto& events = traj.events();
  std::size_t e = 0;
  for (const auto& sample : traj.samples()) {
    if (e < events.size() && events[e].t == sample.t) {
      row(events[e].t, events[e].pre, to_string(events[e].kind));
      row(events[e].t, events[e].post, "");
      ++e;
      continue;
    }
    row(sample.t, sample.state, "");
  }
}

}  // namespace ipmsim
