#pragma once

#include <stdexcept>
#include <string>

namespace ipmsim {

// Invalid argument or a request outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by the ODE integrator; carries the time at which it gave up.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double failure_time)
      : std::runtime_error(what), failure_time_(failure_time) {}

  double failure_time() const noexcept { return failure_time_; }

 private:
  double failure_time_;
};

// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ipmsim
