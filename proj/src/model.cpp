#include "ipmsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"

namespace ipmsim {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw DomainError(fmt::format("parameter {} must be finite and > 0 (got {})", name, value));
  }
}

void require_unit_interval(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0 || value >= 1.0) {
    throw DomainError(fmt::format("parameter {} must lie strictly inside (0, 1) (got {})", name, value));
  }
}

}  // namespace

void ModelParameters::validate() const {
  require_positive(r, "r");
  require_positive(k, "k");
  require_positive(alpha, "alpha");
  if (!std::isfinite(phi) || phi < 0.0) {
    throw DomainError(fmt::format("parameter phi must be finite and >= 0 (got {})", phi));
  }
  require_positive(lambda, "lambda");
  require_unit_interval(c1, "c1");
  require_unit_interval(c2, "c2");
  require_positive(d, "d");
  require_positive(delta, "delta");
  require_unit_interval(theta, "theta");
  require_positive(gamma, "gamma");
  require_positive(mu, "mu");
  require_positive(m1, "m1");
  require_positive(m2, "m2");
}

double ModelParameters::min_decay_rate() const {
  return std::min({d, gamma, mu, (d + delta) * (1.0 - theta)});
}

std::string_view to_string(ImpulseKind kind) {
  switch (kind) {
    case ImpulseKind::Bio:
      return "bio";
    case ImpulseKind::Chem:
      return "chem";
    case ImpulseKind::Both:
      return "both";
  }
  return "";
}

void ImpulseSchedule::validate() const {
  for (const auto& [tau, name] : {std::pair{tau1, "tau1"}, std::pair{tau2, "tau2"}}) {
    if (tau && (!std::isfinite(*tau) || *tau <= 0.0)) {
      throw DomainError(fmt::format("{} must be finite and > 0 (got {})", name, *tau));
    }
  }
  if (!std::isfinite(v_i) || v_i < 0.0) throw DomainError(fmt::format("v_i must be >= 0 (got {})", v_i));
  if (!std::isfinite(s_i) || s_i < 0.0) throw DomainError(fmt::format("s_i must be >= 0 (got {})", s_i));
}

StateVector vector_field(const StateVector& u, const ModelParameters& p) {
  for (double c : u) {
    if (!std::isfinite(c)) throw DomainError("vector_field: non-finite state component");
  }
  return vector_field_unchecked(u, p);
}

StateVector vector_field_unchecked(const StateVector& u, const ModelParameters& p) {
  const auto [x, y, z, v, s] = u;
  return {
      p.r * x * (1.0 - x / p.k) - p.alpha * x * y - p.phi * p.alpha * x * z,
      p.c1 * p.alpha * x * y - p.lambda * y * v - p.d * y - p.m1 * s * y,
      p.c2 * p.phi * p.alpha * x * z + p.lambda * y * v - (p.d + p.delta) * z - p.m2 * s * z,
      p.theta * (p.d + p.delta) * z - p.gamma * v,
      -p.mu * s,
  };
}

double stiffness_bound(const StateVector& u, const ModelParameters& p) {
  const auto [x, y, z, v, s] = u;
  const double jx = p.r * (1.0 - 2.0 * x / p.k) - p.alpha * y - p.phi * p.alpha * z;
  const double jy = p.c1 * p.alpha * x - p.lambda * v - p.d - p.m1 * s;
  const double jz = p.c2 * p.phi * p.alpha * x - (p.d + p.delta) - p.m2 * s;
  return std::max({std::abs(jx), std::abs(jy), std::abs(jz), p.gamma, p.mu});
}

StateVector vector_field(const SystemState& state, const ModelParameters& p) {
  return vector_field(state.as_vector(), p);
}

SystemState apply_impulse(const SystemState& state, ImpulseKind kind, const ImpulseSchedule& schedule) {
  SystemState out = state;
  if (kind == ImpulseKind::Bio || kind == ImpulseKind::Both) out.v += schedule.v_i;
  if (kind == ImpulseKind::Chem || kind == ImpulseKind::Both) out.s += schedule.s_i;
  return out;
}

double periodic_pulse_level(double strength, double rate, double period, double elapsed) {
  if (strength == 0.0) return 0.0;
  return strength * std::exp(-rate * elapsed) / -std::expm1(-rate * period);
}

double elapsed_since_pulse(double t, double period) {
  const double q = t / period;
  const double nearest = std::round(q);
  const double n = std::abs(q - nearest) <= 1e-12 * std::max(1.0, std::abs(q)) ? nearest : std::floor(q);
  return std::max(0.0, t - n * period);
}

double analytic_periodic_bio(double t, const ImpulseSchedule& schedule, const ModelParameters& p) {
  if (!schedule.tau1) throw DomainError("analytic_periodic_bio: schedule has no biopesticide period");
  if (!(p.gamma > 0.0)) throw DomainError("analytic_periodic_bio: gamma must be > 0");
  return periodic_pulse_level(schedule.v_i, p.gamma, *schedule.tau1, elapsed_since_pulse(t, *schedule.tau1));
}

double analytic_periodic_chem(double t, const ImpulseSchedule& schedule, const ModelParameters& p) {
  if (!schedule.tau2) throw DomainError("analytic_periodic_chem: schedule has no chemical period");
  if (!(p.mu > 0.0)) throw DomainError("analytic_periodic_chem: mu must be > 0");
  return periodic_pulse_level(schedule.s_i, p.mu, *schedule.tau2, elapsed_since_pulse(t, *schedule.tau2));
}

double logistic_solution(double t, double x0, const ModelParameters& p) {
  if (!(x0 >= 0.0)) throw DomainError(fmt::format("logistic_solution: x0 must be >= 0 (got {})", x0));
  if (x0 == 0.0) return 0.0;
  if (x0 == p.k) return p.k;
  return p.k * x0 / (x0 + (p.k - x0) * std::exp(-p.r * t));
}

}  // namespace ipmsim
