#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qpn {

// Base of every error thrown by the library. The CLI maps ScenarioError and
// QasmError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class GateError : public Error {
 public:
  using Error::Error;
};

class CircuitError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class ReversalError : public Error {
 public:
  using Error::Error;
};

class ExplosionError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

/// Raised when a transition is fired while not enabled. `step` is the index
/// into a scripted schedule when the failure came from one.
class NotEnabledError : public Error {
 public:
  NotEnabledError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : Error(what), step_(step) {}

  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Parse or validation failure in a scenario/trace document. `line` is set for
/// syntax errors, `field` names the offending entry for semantic errors.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& what, std::optional<std::size_t> line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}

  std::optional<std::size_t> line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::optional<std::size_t> line_;
  std::string field_;
};

class QasmError : public Error {
 public:
  QasmError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qpn
