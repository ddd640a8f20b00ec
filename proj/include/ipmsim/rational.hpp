#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ipmsim {

/// Positive rational number in lowest terms, used for impulse periods so
/// that the combined period of two schedules is exact.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1);

  /// Best rational approximation with denominator <= max_den. Throws
  /// DomainError when x is not within 1e-14 (relative) of such a fraction.
  static Rational from_double(double x, std::int64_t max_den = 1'000'000);

  /// Parses "p/q", an integer, or a decimal literal.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_;
  std::int64_t den_;
};

/// Least common multiple lcm(p1, p2) / gcd(q1, q2) of two positive rationals.
Rational rational_lcm(const Rational& a, const Rational& b);

}  // namespace ipmsim
