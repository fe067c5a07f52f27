#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure stopped without meeting its tolerance.
/// Carries the last iterate (or partial sum) so callers can report it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : Error(what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

/// The requested work exceeds the configured cost cap.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double requested, double cap)
      : Error(what), requested_(requested), cap_(cap) {}
  double requested() const noexcept { return requested_; }
  double cap() const noexcept { return cap_; }

 private:
  double requested_;
  double cap_;
};

/// A statistical fit could not be carried out on the given data.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

}  // namespace pin
