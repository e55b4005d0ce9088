#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace driftlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested mesh would exceed the configured vertex cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the admissible set (nonpositive coefficient, ball
/// leaving the disk, zero gradient, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Pure Neumann data violating the Gauss compatibility condition.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, double defect)
      : Error(what), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

/// Fixed-point iteration did not reach its tolerance. Carries the trace of
/// successive-difference norms so callers can report it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Hölder fit with too few admissible radii.
class WindowError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftlab
