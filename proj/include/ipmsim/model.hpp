#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace ipmsim {

inline constexpr std::size_t kStateDim = 5;
using StateVector = std::array<double, kStateDim>;

/**
 * Rate constants and conversion factors of the crop / susceptible pest /
 * infected pest / virus / chemical pesticide system.
 *
 * Defaults are the fig1 set: r, k, alpha, m1, m2, c1, c2, gamma, delta,
 * d and lambda are the published values; phi, theta and mu are assumed values
 * (see presets/fig1.json, where they carry `"assumed": true`).
 */
struct ModelParameters {
  double r = 0.1;        // crop net growth rate, 1/day
  double k = 1.0;        // crop carrying capacity
  double alpha = 0.2;    // crop / susceptible pest contact rate
  double phi = 0.1;      // infected pest feeding attenuation (assumed)
  double lambda = 0.35;  // virus infection rate
  double c1 = 0.5;       // conversion factor, susceptible pests
  double c2 = 0.8;       // conversion factor, infected pests
  double d = 0.05;       // susceptible pest mortality
  double delta = 0.2;    // additional infected pest mortality
  double theta = 0.8;    // virus replication rate (assumed)
  double gamma = 0.15;   // virus lysis rate
  double mu = 0.3;       // chemical pesticide decay rate (assumed)
  double m1 = 0.8;       // chemical kill rate, susceptible pests
  double m2 = 0.6;       // chemical kill rate, infected pests

  // Throws DomainError unless every rate is finite and positive (phi >= 0)
  // and c1, c2, theta lie strictly inside (0, 1).
  void validate() const;

  // m = min(d, gamma, mu, (d + delta)(1 - theta)).
  double min_decay_rate() const;

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

struct SystemState {
  double x = 0.0;  // crop biomass
  double y = 0.0;  // susceptible pests
  double z = 0.0;  // infected pests
  double v = 0.0;  // biopesticide (virus)
  double s = 0.0;  // chemical pesticide concentration

  StateVector as_vector() const { return {x, y, z, v, s}; }
  static SystemState from_vector(const StateVector& u) { return {u[0], u[1], u[2], u[3], u[4]}; }

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

enum class ImpulseKind { Bio, Chem, Both };

std::string_view to_string(ImpulseKind kind);

/// Periodic release of biopesticide (every tau1 days, strength v_i) and
/// chemical pesticide (every tau2 days, strength s_i). An absent period
/// means that agent is never applied.
struct ImpulseSchedule {
  std::optional<double> tau1;
  std::optional<double> tau2;
  double v_i = 0.0;
  double s_i = 0.0;
  // Apply the n = 0 impulses at t = 0+.
  bool first_impulse_at_zero = true;

  void validate() const;

  friend bool operator==(const ImpulseSchedule&, const ImpulseSchedule&) = default;
};

// Right-hand side of the continuous flow between impulses. Throws
// DomainError on non-finite input.
StateVector vector_field(const StateVector& u, const ModelParameters& p);
StateVector vector_field(const SystemState& state, const ModelParameters& p);

// Same as vector_field without the input check (integrator hot path).
StateVector vector_field_unchecked(const StateVector& u, const ModelParameters& p);

/// Largest |d f_i / d u_i| of the vector field at u. Bounds the decay rate of
/// every component, including ones far below the absolute tolerance.
double stiffness_bound(const StateVector& u, const ModelParameters& p);

SystemState apply_impulse(const SystemState& state, ImpulseKind kind, const ImpulseSchedule& schedule);

// Value of the periodic sawtooth-exponential orbit `strength * e^{-rate*elapsed} / (1 - e^{-rate*period})`
// a time `elapsed` after the most recent pulse.
double periodic_pulse_level(double strength, double rate, double period, double elapsed);

// Time since the most recent multiple of `period` at or before t. Multiples
// within rounding distance of t count as "at" t (right-continuous convention).
double elapsed_since_pulse(double t, double period);

/// Pest-free periodic virus level v*(t). Right-continuous: at t = n*tau1
/// the post-impulse value is returned. Throws DomainError without tau1.
double analytic_periodic_bio(double t, const ImpulseSchedule& schedule, const ModelParameters& p);

/// Pest-free periodic chemical level s*(t); mirror of analytic_periodic_bio.
double analytic_periodic_chem(double t, const ImpulseSchedule& schedule, const ModelParameters& p);

/// Closed-form crop biomass with no pests: k x0 / (x0 + (k - x0) e^{-rt}).
double logistic_solution(double t, double x0, const ModelParameters& p);

}  // namespace ipmsim
