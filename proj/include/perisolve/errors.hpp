#ifndef PERISOLVE_ERRORS_HPP
#define PERISOLVE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace perisolve {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error while parsing an expression; carries the byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Domain error during expression evaluation (log of non-positive values,
/// division by zero, 0^negative, non-finite intermediate result).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Model document violates the schema, a sign constraint, or periodicity.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a solver (span violation, singular factorization,
/// Newton stagnation, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A trajectory component dropped below the positivity tolerance.
class PositivityError : public SolverError {
 public:
  PositivityError(double time, int component, double value)
      : SolverError("positivity breach: component " +
                    std::to_string(component + 1) + " reached " +
                    std::to_string(value) + " at t = " + std::to_string(time)),
        time_(time),
        component_(component) {}
  double time() const { return time_; }
  int component() const { return component_; }

 private:
  double time_;
  int component_;
};

}  // namespace perisolve

#endif
