#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ipmsim/model.hpp"
#include "ipmsim/rational.hpp"

namespace ipmsim {

using Matrix5 = Eigen::Matrix<double, 5, 5>;

// Floquet multipliers of the pest-free orbit, one per state direction
// (x, y, z, v, s).
using Multipliers = std::array<double, kStateDim>;

enum class ConditionSet { SameInterval, DifferentInterval, BioOnly, ChemOnly };

std::string_view to_string(ConditionSet set);

using ConditionVerdicts = std::map<ConditionSet, bool>;

struct StabilityReport {
  double period_T = 0.0;
  std::string period_exact;  // combined period as p/q
  std::optional<Multipliers> analytic_multipliers;
  Multipliers numeric_multipliers{};  // moduli
  ConditionVerdicts condition_verdicts;
  double dominant_multiplier = 0.0;
  bool stable = false;
  std::vector<std::string> notes;
};

/// lcm of two rational periods.
Rational combined_period(const Rational& tau1, const Rational& tau2);

/// Combined period of a schedule in days: lcm(tau1, tau2) when both are
/// present, the single period when one is, and one day for an impulse-free
/// schedule. Throws DomainError ("no common period") when both periods are
/// present and incommensurate.
double combined_period(const ImpulseSchedule& schedule);

/// The common period when the schedule has a single impulse period (equal
/// periods, or only one agent scheduled; one day when impulse-free);
/// std::nullopt when the two periods differ.
std::optional<double> common_period(const ImpulseSchedule& schedule);

/// Closed-form multipliers for a single common period tau (tau1 == tau2, or
/// only one agent scheduled):
///   l1 = e^{-r tau}, l4 = e^{-gamma tau}, l5 = e^{-mu tau},
///   ln l2 = tau (c1 alpha k - d) - lambda v_i / gamma - m1 s_i / mu,
///   ln l3 = tau (c2 phi k alpha - (d + delta)) - m2 s_i / mu.
/// Throws DomainError when the two periods differ.
Multipliers analytic_multipliers(const ModelParameters& params, const ImpulseSchedule& schedule);

/// Natural logs of the closed-form multipliers (finite even when the
/// multipliers themselves underflow).
Multipliers analytic_log_multipliers(const ModelParameters& params, const ImpulseSchedule& schedule);

/// Fundamental matrix of the system linearised about (k, 0, 0, v*, s*),
/// integrated from the identity over one combined period. Perturbations get
/// no jump at impulses.
Matrix5 monodromy(const ModelParameters& params, const ImpulseSchedule& schedule);

/// Eigenvalues of a 5x5 matrix. Exact zeros are used to split it into
/// irreducible diagonal blocks first, so triangular structure is resolved
/// without loss of relative accuracy; for a 1x1 block, slot i holds the
/// eigenvalue belonging to direction i.
std::array<std::complex<double>, kStateDim> floquet_multipliers(const Matrix5& m);

/// Verdicts for every condition set that applies to the schedule, in the
/// period-integrated form.
ConditionVerdicts check_conditions(const ModelParameters& params, const ImpulseSchedule& schedule);

/// Single verdict; throws DomainError when `set` does not apply (e.g. the
/// same-interval set with tau1 != tau2).
bool check_condition(const ModelParameters& params, const ImpulseSchedule& schedule, ConditionSet set);

struct CriticalPeriod {
  enum class Kind { Zero, Finite, Unbounded };
  Kind kind = Kind::Unbounded;
  double value = 0.0;  // meaningful for Finite
};

/// Largest common period tau with max(l2(tau), l3(tau)) = 1, by bisection on
/// the closed-form exponents over [1e-6, 1e6] days to 1e-8 days.
CriticalPeriod critical_period(const ModelParameters& params, double v_i, double s_i);

StabilityReport analyze_stability(const ModelParameters& params, const ImpulseSchedule& schedule);

/// Flat `key = value` block.
std::string to_key_value(const StabilityReport& report);

}  // namespace ipmsim
