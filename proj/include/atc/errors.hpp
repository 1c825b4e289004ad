#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace atc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A construction rule (domain scaling, mesh assumption, ...) does not hold.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

// A restricted subproblem could not be solved inside an outer iteration.
class SubproblemFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonConvergence : public SolverError {
 public:
  NonConvergence(const std::string& what, int iterations, double residual)
      : SolverError(format(what, iterations, residual)),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  static std::string format(const std::string& what, int iterations, double residual) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (iterations=%d, residual=%.3e)", iterations, residual);
    return what + buf;
  }

  int iterations_;
  double residual_;
};

}  // namespace atc
