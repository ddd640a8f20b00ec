#include "ipmsim/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"

namespace ipmsim {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

Rational Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError(fmt::format("no common period: {} is not a positive finite period", x));
  }
  // Continued-fraction convergents.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_f = std::floor(rest);
    if (a_f > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 4)) break;
    const auto a = static_cast<std::int64_t>(a_f);
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    const std::int64_t p2 = a * p1 + p0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - x) <= 1e-14 * x) return Rational(p1, q1);
    const double frac = rest - a_f;
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
  }
  throw DomainError(fmt::format("no common period: {} has no rational form with denominator <= {}", x, max_den));
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    std::int64_t p = 0, q = 0;
    const auto num_txt = text.substr(0, slash);
    const auto den_txt = text.substr(slash + 1);
    const auto r1 = std::from_chars(num_txt.data(), num_txt.data() + num_txt.size(), p);
    const auto r2 = std::from_chars(den_txt.data(), den_txt.data() + den_txt.size(), q);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != num_txt.data() + num_txt.size() ||
        r2.ptr != den_txt.data() + den_txt.size() || q <= 0 || p <= 0) {
      throw DomainError(fmt::format("cannot parse '{}' as a positive fraction p/q", text));
    }
    return Rational(p, q);
  }
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw DomainError(fmt::format("cannot parse '{}' as a period", text));
  }
  return from_double(value);
}

std::string Rational::str() const { return den_ == 1 ? fmt::format("{}", num_) : fmt::format("{}/{}", num_, den_); }

Rational rational_lcm(const Rational& a, const Rational& b) {
  if (a.num() <= 0 || b.num() <= 0) throw DomainError("combined period requires positive periods");
  const std::int64_t g = std::gcd(a.num(), b.num());
  std::int64_t l = 0;
  if (__builtin_mul_overflow(a.num() / g, b.num(), &l)) throw DomainError("no common period: lcm overflows");
  return Rational(l, std::gcd(a.den(), b.den()));
}

}  // namespace ipmsim
