#pragma once

// Embedded Dormand-Prince 5(4) pair with FSAL, mixed absolute/relative
// error control in the max norm, and the classic 4th-order continuous
// extension (Hairer, Norsett & Wanner, "Solving ODEs I", dopri5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"

namespace ipmsim {

template <std::size_t N>
using Vec = std::array<double, N>;

struct StepperSettings {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_max = 1.0;
};

struct StepperStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;
  // Sum over accepted steps of the max-norm embedded error estimate.
  double error_estimate_sum = 0.0;
  double max_local_error = 0.0;
};

/// Continuous extension of one accepted step on [t0, t0 + h].
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> coef{};

  double t1() const { return t0 + h; }

  Vec<N> eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = coef[0][i] + th * (coef[1][i] + th1 * (coef[2][i] + th * (coef[3][i] + th1 * coef[4][i])));
    }
    return out;
  }
};

template <std::size_t N, class Rhs>
class DormandPrince45 {
 public:
  DormandPrince45(Rhs rhs, StepperSettings settings) : rhs_(std::move(rhs)), settings_(settings) {}

  const StepperStats& stats() const { return stats_; }

  // Optional cap on the step from the current state, e.g. to stay inside the
  // method's stability region for components too small for error control.
  void set_step_limit(std::function<double(const Vec<N>&)> limit) { step_limit_ = std::move(limit); }

  // Initial step guess (Hairer's heuristic) for y' = f(t, y) at (t, y).
  double initial_step(double t, const Vec<N>& y, double t_end) {
    const Vec<N> f0 = eval(t, y);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = scale(y[i], y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(f0[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, settings_.h_max, t_end - t});
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * f0[i];
    const Vec<N> f1 = eval(t + h0, y1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) d2 = std::max(d2, std::abs(f1[i] - f0[i]) / scale(y[i], y[i]));
    d2 /= h0;
    const double h1 =
        std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, settings_.h_max, t_end - t});
  }

  /**
   * Integrates from (t, y) to exactly t_end. `h` is the proposed step on
   * entry and the next proposal on exit (steps clipped at t_end do not
   * shrink it). After each accepted step `on_step(dense, y_new)` is called;
   * it may modify `y_new` in place and must return true if it did.
   */
  template <class OnStep>
  void advance(double& t, Vec<N>& y, double t_end, double& h, OnStep&& on_step) {
    if (t_end <= t) return;
    if (!(h > 0.0)) h = initial_step(t, y, t_end);
    Vec<N> k1 = eval(t, y);
    bool last_rejected = false;

    while (t < t_end) {
      h = std::min(h, settings_.h_max);
      if (step_limit_) h = std::min(h, step_limit_(y));
      bool clipped = false;
      double step = h;
      if (t + step >= t_end || t_end - (t + step) < 1e-12 * std::max(1.0, std::abs(t_end))) {
        step = t_end - t;
        clipped = true;
      }
      if (step < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        throw IntegrationError(fmt::format("step size underflow at t = {}", t), t);
      }

      Vec<N> k2, k3, k4, k5, k6, k7, y_new, tmp, err;
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + step * a21 * k1[i];
      k2 = eval(t + c2 * step, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
      k3 = eval(t + c3 * step, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = eval(t + c4 * step, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      k5 = eval(t + c5 * step, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      k6 = eval(t + step, tmp);
      for (std::size_t i = 0; i < N; ++i) {
        y_new[i] = y[i] + step * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      }
      k7 = eval(t + step, y_new);

      double err_norm = 0.0;
      double err_abs = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        err[i] = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        err_norm = std::max(err_norm, std::abs(err[i]) / scale(y[i], y_new[i]));
        err_abs = std::max(err_abs, std::abs(err[i]));
      }
      if (!std::isfinite(err_norm)) err_norm = std::numeric_limits<double>::infinity();

      if (err_norm <= 1.0) {
        DenseStep<N> dense;
        dense.t0 = t;
        dense.h = step;
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = y_new[i] - y[i];
          const double bspl = step * k1[i] - ydiff;
          dense.coef[0][i] = y[i];
          dense.coef[1][i] = ydiff;
          dense.coef[2][i] = bspl;
          dense.coef[3][i] = ydiff - step * k7[i] - bspl;
          dense.coef[4][i] =
              step * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        ++stats_.accepted;
        stats_.error_estimate_sum += err_abs;
        stats_.max_local_error = std::max(stats_.max_local_error, err_abs);

        t = clipped ? t_end : t + step;
        y = y_new;
        k1 = on_step(std::as_const(dense), y) ? eval(t, y) : k7;

        const double fac = err_norm == 0.0 ? kFacMax : std::clamp(kSafety * std::pow(err_norm, -0.2), kFacMin, kFacMax);
        const double proposed = step * (last_rejected ? std::min(fac, 1.0) : fac);
        // A step shortened only to land on t_end should not shrink the next one.
        h = clipped ? std::max(h, proposed) : proposed;
        last_rejected = false;
      } else {
        ++stats_.rejected;
        const double fac = std::isfinite(err_norm) ? std::max(kFacMin, kSafety * std::pow(err_norm, -0.2)) : kFacMin;
        h = step * std::min(fac, 1.0);
        last_rejected = true;
      }
    }
  }

 private:
  Vec<N> eval(double t, const Vec<N>& y) {
    ++stats_.rhs_evals;
    return rhs_(t, y);
  }

  double scale(double y0, double y1) const {
    return settings_.atol + settings_.rtol * std::max(std::abs(y0), std::abs(y1));
  }

  static constexpr double kSafety = 0.9;
  static constexpr double kFacMin = 0.2;
  static constexpr double kFacMax = 10.0;

  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  Rhs rhs_;
  StepperSettings settings_;
  std::function<double(const Vec<N>&)> step_limit_;
  StepperStats stats_;
};

}  // namespace ipmsim
