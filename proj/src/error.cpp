#include "impactfrac/error.hpp"

#include <sstream>

namespace impactfrac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveRisk: return "NonPositiveRisk";
    case ErrorCode::NonDifferentiableAtPoint: return "NonDifferentiableAtPoint";
    case ErrorCode::NonDifferentiableCounterfactual: return "NonDifferentiableCounterfactual";
    case ErrorCode::InfeasibleMoments: return "InfeasibleMoments";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidPmf: return "InvalidPmf";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateMean: return "DegenerateMean";
    case ErrorCode::UnsupportedMode: return "UnsupportedMode";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {
std::string quadrature_message(double value, double err, int subdivisions) {
  std::ostringstream os;
  os << "tolerance not met after " << subdivisions << " subdivisions (best value " << value
     << ", error estimate " << err << ")";
  return os.str();
}
}  // namespace

QuadratureFailure::QuadratureFailure(double best_value, double error_estimate, int subdivisions)
    : Error(ErrorCode::QuadratureFailure,
            quadrature_message(best_value, error_estimate, subdivisions)),
      best_value_(best_value),
      error_estimate_(error_estimate),
      subdivisions_(subdivisions) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace impactfrac
