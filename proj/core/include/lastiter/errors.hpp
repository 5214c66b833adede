#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lastiter {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Step-size schedule resolved outside gamma*L in (0, 1).
class ScheduleError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Generator produced (or was handed) a degenerate instance.
class DegenerateProblemError : public Error {
 public:
  using Error::Error;
};

/// Configuration combination that the library does not support.
class UnsupportedConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Certification could not reach the requested gradient-norm tolerance.
class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, double best_residual, std::int64_t iterations)
      : Error(what), best_residual_(best_residual), iterations_(iterations) {}

  double best_residual() const noexcept { return best_residual_; }
  std::int64_t iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  std::int64_t iterations_;
};

/// An iterate left the finite range (or crossed the divergence threshold).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step, std::uint64_t seed)
      : Error(what), step_(step), seed_(seed) {}

  std::int64_t step() const noexcept { return step_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::int64_t step_;
  std::uint64_t seed_;
};

}  // namespace lastiter
