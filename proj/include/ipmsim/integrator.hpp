#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ipmsim/dormand_prince.hpp"
#include "ipmsim/model.hpp"

namespace ipmsim {

struct ImpulseEvent {
  double t = 0.0;
  ImpulseKind kind = ImpulseKind::Bio;

  friend bool operator==(const ImpulseEvent&, const ImpulseEvent&) = default;
};

struct TimeSpan {
  double t0 = 0.0;
  double tf = 0.0;
};

struct SolverConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // <= 0 selects an automatic initial step
  double h_max = 1.0;
  double dense_dt = 0.1;

  void validate() const;
};

struct Sample {
  double t = 0.0;
  SystemState state;
};

struct EventRecord {
  double t = 0.0;
  SystemState pre;
  SystemState post;
  ImpulseKind kind = ImpulseKind::Bio;
};

struct SolverStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;
  double error_estimate_sum = 0.0;
  double max_local_error = 0.0;
  // Negative components in [-atol, 0) reset to zero after a step.
  std::uint64_t clamped = 0;
  double max_clamped_magnitude = 0.0;
};

/// Output of integrate(): samples on the dense_dt grid plus every event time
/// (post-impulse state), the paired pre/post states at each event, and the
/// per-step continuous extension used by sample_dense().
class Trajectory {
 public:
  Trajectory(TimeSpan span, SolverConfig config) : span_(span), config_(config) {}

  TimeSpan span() const { return span_; }
  const SolverConfig& config() const { return config_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<EventRecord>& events() const { return events_; }
  const SolverStats& stats() const { return stats_; }

  // Interpolated state at t; post-impulse state at event times.
  SystemState at(double t) const;

 private:
  friend Trajectory integrate(const ModelParameters&, const ImpulseSchedule&, const SystemState&, TimeSpan,
                              const SolverConfig&);

  TimeSpan span_;
  SolverConfig config_;
  std::vector<Sample> samples_;
  std::vector<EventRecord> events_;
  std::vector<DenseStep<kStateDim>> steps_;
  SolverStats stats_;
};

/// Every n*tau1 and n*tau2 in [t0, tf] (n from 0 if first_impulse_at_zero,
/// else from 1), time-ordered. Times within 1e-9 * max(tau1, tau2) of each
/// other are merged into one Both event.
std::vector<ImpulseEvent> impulse_calendar(const ImpulseSchedule& schedule, TimeSpan span);

/// Solves the impulsive system on `span`: adaptive Dormand-Prince flow
/// between events, exact jumps at events. Throws IntegrationError on step
/// underflow or on a negative component below -atol.
Trajectory integrate(const ModelParameters& params, const ImpulseSchedule& schedule, const SystemState& initial,
                     TimeSpan span, const SolverConfig& config = {});

std::vector<SystemState> sample_dense(const Trajectory& traj, std::span<const double> times);

/// CSV with header `t,x,y,z,v,s,event`. An event time produces two rows with
/// the same t: the pre-impulse row carrying the event tag, then the post row.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace ipmsim
