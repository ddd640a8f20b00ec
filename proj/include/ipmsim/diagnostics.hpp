#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "ipmsim/integrator.hpp"
#include "ipmsim/model.hpp"

namespace ipmsim {

struct DiagnosticsConfig {
  double extinction_threshold = 1e-6;
  // Length of the convergence window, in combined periods.
  int trailing_periods = 5;
};

struct DiagnosticsReport {
  double bound_M = 0.0;
  StateVector max_observed{};
  double min_observed = 0.0;
  bool nonneg_ok = false;
  bool bound_ok = false;
  std::uint64_t clamp_count = 0;
  double window_period = 0.0;
  // sup |x - k|, |y|, |z|, |v - v*|, |s - s*| over the trailing window.
  std::optional<StateVector> convergence_sup;
  // Time average of y + z over the whole run.
  double mean_pest_load = 0.0;
  // Threshold-crossing time after which the density stays below threshold
  // for at least one window period up to the end of the run.
  std::optional<double> extinction_y;
  std::optional<double> extinction_z;
};

/**
 * Asymptotic bound on every state component:
 *
 *   M0 / m + strength * e^{m tau} / (e^{m tau} - 1)
 *
 * with m = min(d, gamma, mu, (d + delta)(1 - theta)) and M0 = k (m + r)^2 / (4 r),
 * evaluated for each scheduled agent (v_i over tau1, s_i over tau2), taking
 * the larger. Throws DomainError if theta >= 1.
 */
double theoretical_bound(const ModelParameters& params, const ImpulseSchedule& schedule);

DiagnosticsReport verify_trajectory(const Trajectory& traj, const ModelParameters& params,
                                    const ImpulseSchedule& schedule, const DiagnosticsConfig& config = {});

std::string to_key_value(const DiagnosticsReport& report);

}  // namespace ipmsim
