#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace impactfrac {

enum class ErrorCode {
  DimensionMismatch,
  NonPositiveRisk,
  NonDifferentiableAtPoint,
  NonDifferentiableCounterfactual,
  InfeasibleMoments,
  NonPositiveData,
  OptimizerDiverged,
  QuadratureFailure,
  DomainError,
  InvalidPmf,
  DegenerateSample,
  DegenerateMean,
  UnsupportedMode,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when adaptive quadrature exhausts its subdivision budget. Carries
/// the best value reached so callers can decide whether it is usable.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(double best_value, double error_estimate, int subdivisions);

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }
  int subdivisions() const noexcept { return subdivisions_; }

 private:
  double best_value_;
  double error_estimate_;
  int subdivisions_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace impactfrac
