#include "ipmsim/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ipmsim/dormand_prince.hpp"
#include "ipmsim/errors.hpp"
#include "ipmsim/integrator.hpp"

namespace ipmsim {

namespace {

constexpr double kBracketLo = 1e-6;
constexpr double kBracketHi = 1e6;
constexpr double kBisectionTol = 1e-8;

bool periods_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(a, b); }

// Period-integrated exponents: growth slopes per day and the per-period
// reductions contributed by each agent.
struct ExponentTerms {
  double slope_y;  // c1 alpha k - d
  double slope_z;  // c2 phi k alpha - (d + delta)
  double bio_y;    // lambda v_i / gamma
  double chem_y;   // m1 s_i / mu
  double chem_z;   // m2 s_i / mu
};

ExponentTerms exponent_terms(const ModelParameters& p, double v_i, double s_i) {
  return {
      p.c1 * p.alpha * p.k - p.d,
      p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta),
      p.lambda * v_i / p.gamma,
      p.m1 * s_i / p.mu,
      p.m2 * s_i / p.mu,
  };
}

double effective_v_i(const ImpulseSchedule& s) { return s.tau1 ? s.v_i : 0.0; }
double effective_s_i(const ImpulseSchedule& s) { return s.tau2 ? s.s_i : 0.0; }

bool applies(const ImpulseSchedule& s, ConditionSet set) {
  switch (set) {
    case ConditionSet::SameInterval:
      return s.tau1 && s.tau2 && periods_equal(*s.tau1, *s.tau2);
    case ConditionSet::DifferentInterval:
      return s.tau1 && s.tau2 && !periods_equal(*s.tau1, *s.tau2);
    case ConditionSet::BioOnly:
      return s.tau1 && (!s.tau2 || s.s_i == 0.0);
    case ConditionSet::ChemOnly:
      return s.tau2 && (!s.tau1 || s.v_i == 0.0);
  }
  return false;
}

}  // namespace

std::string_view to_string(ConditionSet set) {
  switch (set) {
    case ConditionSet::SameInterval:
      return "same_interval";
    case ConditionSet::DifferentInterval:
      return "different_interval";
    case ConditionSet::BioOnly:
      return "bio_only";
    case ConditionSet::ChemOnly:
      return "chem_only";
  }
  return "";
}

Rational combined_period(const Rational& tau1, const Rational& tau2) { return rational_lcm(tau1, tau2); }

double combined_period(const ImpulseSchedule& schedule) {
  schedule.validate();
  if (schedule.tau1 && schedule.tau2) {
    if (periods_equal(*schedule.tau1, *schedule.tau2)) return *schedule.tau1;
    return combined_period(Rational::from_double(*schedule.tau1), Rational::from_double(*schedule.tau2)).value();
  }
  if (schedule.tau1) return *schedule.tau1;
  if (schedule.tau2) return *schedule.tau2;
  return 1.0;
}

std::optional<double> common_period(const ImpulseSchedule& schedule) {
  if (schedule.tau1 && schedule.tau2) {
    if (periods_equal(*schedule.tau1, *schedule.tau2)) return *schedule.tau1;
    return std::nullopt;
  }
  if (schedule.tau1) return *schedule.tau1;
  if (schedule.tau2) return *schedule.tau2;
  return 1.0;
}

Multipliers analytic_log_multipliers(const ModelParameters& params, const ImpulseSchedule& schedule) {
  params.validate();
  schedule.validate();
  const auto tau = common_period(schedule);
  if (!tau) throw DomainError("analytic multipliers unavailable: tau1 != tau2");
  const ExponentTerms e = exponent_terms(params, effective_v_i(schedule), effective_s_i(schedule));
  return {
      -params.r * *tau,
      *tau * e.slope_y - e.bio_y - e.chem_y,
      *tau * e.slope_z - e.chem_z,
      -params.gamma * *tau,
      -params.mu * *tau,
  };
}

Multipliers analytic_multipliers(const ModelParameters& params, const ImpulseSchedule& schedule) {
  Multipliers out = analytic_log_multipliers(params, schedule);
  for (double& v : out) v = std::exp(v);
  return out;
}

Matrix5 monodromy(const ModelParameters& params, const ImpulseSchedule& schedule) {
  params.validate();
  const double period = combined_period(schedule);

  ImpulseSchedule boundaries = schedule;
  boundaries.first_impulse_at_zero = false;
  std::vector<double> ends;
  for (const auto& ev : impulse_calendar(boundaries, {0.0, period})) ends.push_back(ev.t);
  if (ends.empty() || ends.back() < period) ends.push_back(period);
  ends.back() = period;

  const double v_i = effective_v_i(schedule);
  const double s_i = effective_s_i(schedule);
  const double dd = params.d + params.delta;

  // Each segment lies strictly between two pulses; the anchors fix which
  // branch of the sawtooth orbit is used so a segment end never picks up the
  // next pulse.
  double bio_anchor = 0.0;
  double chem_anchor = 0.0;
  auto rhs = [&](double t, const Vec<25>& m) {
    const double v_star = schedule.tau1 ? periodic_pulse_level(v_i, params.gamma, *schedule.tau1, t - bio_anchor) : 0.0;
    const double s_star = schedule.tau2 ? periodic_pulse_level(s_i, params.mu, *schedule.tau2, t - chem_anchor) : 0.0;
    double a[5][5] = {};
    a[0][0] = -params.r;
    a[0][1] = -params.alpha * params.k;
    a[0][2] = -params.phi * params.alpha * params.k;
    a[1][1] = params.c1 * params.alpha * params.k - params.lambda * v_star - params.d - params.m1 * s_star;
    a[2][1] = params.lambda * v_star;
    a[2][2] = params.c2 * params.phi * params.k * params.alpha - dd - params.m2 * s_star;
    a[3][2] = params.theta * dd;
    a[3][3] = -params.gamma;
    a[4][4] = -params.mu;
    Vec<25> out{};
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        double acc = 0.0;
        for (int l = 0; l < 5; ++l) acc += a[i][l] * m[l * 5 + j];
        out[i * 5 + j] = acc;
      }
    }
    return out;
  };

  // Near-pure relative control: entries span many orders of magnitude and
  // the multipliers are needed to relative accuracy.
  DormandPrince45<25, decltype(rhs)> stepper(rhs, {1e-12, 1e-300, std::max(period, 1.0)});
  Vec<25> m{};
  for (int i = 0; i < 5; ++i) m[i * 5 + i] = 1.0;
  double t = 0.0;
  // The error-scaled initial-step heuristic degenerates with atol ~ 0.
  double h = 1e-3 * std::min(period, 1.0);
  const auto no_op = [](const DenseStep<25>&, Vec<25>&) { return false; };
  for (double t_end : ends) {
    const double mid = 0.5 * (t + t_end);
    if (schedule.tau1) bio_anchor = mid - elapsed_since_pulse(mid, *schedule.tau1);
    if (schedule.tau2) chem_anchor = mid - elapsed_since_pulse(mid, *schedule.tau2);
    stepper.advance(t, m, t_end, h, no_op);
    t = t_end;
  }

  Matrix5 out;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) out(i, j) = m[i * 5 + j];
  }
  return out;
}

std::array<std::complex<double>, kStateDim> floquet_multipliers(const Matrix5& m) {
  constexpr int n = static_cast<int>(kStateDim);
  bool reach[n][n] = {};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) reach[i][j] = (i == j) || m(i, j) != 0.0;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
    }
  }

  std::array<std::complex<double>, kStateDim> out{};
  std::array<bool, kStateDim> done{};
  for (int i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<int> block;
    for (int j = i; j < n; ++j) {
      if (reach[i][j] && reach[j][i]) block.push_back(j);
    }
    for (int j : block) done[j] = true;
    if (block.size() == 1) {
      out[block[0]] = m(block[0], block[0]);
      continue;
    }
    const auto bs = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd sub(bs, bs);
    for (Eigen::Index a = 0; a < bs; ++a) {
      for (Eigen::Index b = 0; b < bs; ++b) sub(a, b) = m(block[a], block[b]);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(sub, false);
    std::vector<std::complex<double>> eig(solver.eigenvalues().begin(), solver.eigenvalues().end());
    std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
      return std::abs(a) != std::abs(b) ? std::abs(a) > std::abs(b) : a.imag() > b.imag();
    });
    for (std::size_t a = 0; a < block.size(); ++a) out[block[a]] = eig[a];
  }
  return out;
}

bool check_condition(const ModelParameters& params, const ImpulseSchedule& schedule, ConditionSet set) {
  params.validate();
  schedule.validate();
  if (!applies(schedule, set)) {
    throw DomainError(fmt::format("condition set '{}' does not apply to this schedule", to_string(set)));
  }
  const ExponentTerms e = exponent_terms(params, effective_v_i(schedule), effective_s_i(schedule));
  switch (set) {
    case ConditionSet::SameInterval: {
      const double tau = *schedule.tau1;
      return tau * e.slope_y - e.bio_y - e.chem_y < 0.0 && tau * e.slope_z - e.chem_z < 0.0;
    }
    case ConditionSet::DifferentInterval:
      // Each agent's integral over its own period; no chemical term in the
      // infected-pest line.
      return *schedule.tau1 * e.slope_y - e.bio_y < 0.0 && e.slope_z < 0.0 &&
             *schedule.tau2 * e.slope_y - e.chem_y < 0.0;
    case ConditionSet::BioOnly:
      return *schedule.tau1 * e.slope_y - e.bio_y < 0.0 && e.slope_z < 0.0;
    case ConditionSet::ChemOnly: {
      const double tau = *schedule.tau2;
      return tau * e.slope_y - e.chem_y < 0.0 && tau * e.slope_z - e.chem_z < 0.0;
    }
  }
  return false;
}

ConditionVerdicts check_conditions(const ModelParameters& params, const ImpulseSchedule& schedule) {
  ConditionVerdicts out;
  for (ConditionSet set : {ConditionSet::SameInterval, ConditionSet::DifferentInterval, ConditionSet::BioOnly,
                           ConditionSet::ChemOnly}) {
    if (applies(schedule, set)) out[set] = check_condition(params, schedule, set);
  }
  return out;
}

CriticalPeriod critical_period(const ModelParameters& params, double v_i, double s_i) {
  params.validate();
  if (!(v_i >= 0.0) || !(s_i >= 0.0)) throw DomainError("critical_period: impulse strengths must be >= 0");
  const ExponentTerms e = exponent_terms(params, v_i, s_i);
  const auto log_dominant = [&](double tau) {
    return std::max(tau * e.slope_y - e.bio_y - e.chem_y, tau * e.slope_z - e.chem_z);
  };
  if (e.slope_y < 0.0 && e.slope_z < 0.0) return {CriticalPeriod::Kind::Unbounded, 0.0};
  double lo = kBracketLo;
  double hi = kBracketHi;
  if (log_dominant(lo) >= 0.0) return {CriticalPeriod::Kind::Zero, 0.0};
  if (log_dominant(hi) < 0.0) return {CriticalPeriod::Kind::Unbounded, 0.0};
  while (hi - lo > kBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (log_dominant(mid) < 0.0 ? lo : hi) = mid;
  }
  return {CriticalPeriod::Kind::Finite, 0.5 * (lo + hi)};
}

StabilityReport analyze_stability(const ModelParameters& params, const ImpulseSchedule& schedule) {
  params.validate();
  schedule.validate();
  StabilityReport report;
  report.period_T = combined_period(schedule);
  if (schedule.tau1 && schedule.tau2 && !periods_equal(*schedule.tau1, *schedule.tau2)) {
    report.period_exact =
        combined_period(Rational::from_double(*schedule.tau1), Rational::from_double(*schedule.tau2)).str();
  } else {
    report.period_exact = fmt::format("{}", report.period_T);
  }

  if (common_period(schedule)) {
    report.analytic_multipliers = analytic_multipliers(params, schedule);
  } else {
    report.notes.emplace_back("analytic multipliers unavailable for distinct periods; numeric monodromy is authoritative");
  }

  const auto eig = floquet_multipliers(monodromy(params, schedule));
  for (std::size_t i = 0; i < kStateDim; ++i) report.numeric_multipliers[i] = std::abs(eig[i]);
  report.dominant_multiplier = *std::max_element(report.numeric_multipliers.begin(), report.numeric_multipliers.end());
  report.stable = report.dominant_multiplier < 1.0;

  report.condition_verdicts = check_conditions(params, schedule);
  if (report.condition_verdicts.contains(ConditionSet::DifferentInterval)) {
    report.notes.emplace_back(
        "different_interval condition omits the chemical kill term for infected pests; it is a sufficient "
        "condition reported separately from the monodromy verdict");
  }
  return report;
}

std::string to_key_value(const StabilityReport& report) {
  std::ostringstream out;
  out << fmt::format("period_T = {}\n", report.period_T);
  out << fmt::format("period_exact = {}\n", report.period_exact);
  for (std::size_t i = 0; i < kStateDim; ++i) {
    out << fmt::format("numeric_multiplier_{} = {}\n", i + 1, report.numeric_multipliers[i]);
  }
  if (report.analytic_multipliers) {
    for (std::size_t i = 0; i < kStateDim; ++i) {
      out << fmt::format("analytic_multiplier_{} = {}\n", i + 1, (*report.analytic_multipliers)[i]);
    }
  }
  out << fmt::format("dominant_multiplier = {}\n", report.dominant_multiplier);
  out << fmt::format("stable = {}\n", report.stable);
  for (const auto& [set, ok] : report.condition_verdicts) {
    out << fmt::format("condition.{} = {}\n", to_string(set), ok);
  }
  for (std::size_t i = 0; i < report.notes.size(); ++i) out << fmt::format("note_{} = {}\n", i + 1, report.notes[i]);
  return out.str();
}

}  // namespace ipmsim
