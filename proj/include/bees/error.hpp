#pragma once

#include <stdexcept>
#include <string>

namespace bees {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes disagree: ragged advice, wrong vector length, empty input.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument is outside its admissible range (rho, delta, horizon, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A stateful object was driven out of order (policy after the last round,
// finalize before the horizon was played).
class SequencingError : public Error {
 public:
  using Error::Error;
};

// An observed value lies outside its mathematical domain (reward not in [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Index outside a valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Integer overflow or allocation limits.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid experiment configuration. `where` names the line or
// field that triggered the failure.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace bees
