#pragma once

#include <stdexcept>
#include <string>

namespace cho {

/// Invalid scenario or parameter value. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed or insufficient input data (traces, matrices).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal state inconsistency, e.g. an FSM state index outside (n, m).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cho
