#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nodeop {

// Input outside an operation's domain (negative allocation, bad weights...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A hard constraint of a scenario was exceeded by the caller.
class ConstraintViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

// Validation time 1/(C+S) is undefined because C+S == 0.
class UndefinedLatencyError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kParse, kSemantic, kUnknownField };

  ConfigError(Kind kind, std::string field, const std::string& what,
              std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), kind_(kind), field_(std::move(field)),
        line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  // Dotted path of the offending field; empty for parse errors.
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::string field_;
  std::size_t line_;
  std::size_t column_;
};

// Module error raised inside a run, annotated with where it happened.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t epoch, unsigned long long tick)
      : std::runtime_error("epoch " + std::to_string(epoch) + ", tick " +
                           std::to_string(tick) + ": " + what),
        epoch_(epoch), tick_(tick) {}

  std::size_t epoch() const { return epoch_; }
  unsigned long long tick() const { return tick_; }

 private:
  std::size_t epoch_;
  unsigned long long tick_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nodeop
