#include "enclosure/types.hpp"

namespace enclosure {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
    case ErrorCode::ContinuumReflector: return "ContinuumReflector";
    case ErrorCode::OutsideCollar: return "OutsideCollar";
    case ErrorCode::NotExterior: return "NotExterior";
    case ErrorCode::OutOfWindow: return "OutOfWindow";
    case ErrorCode::Overlap: return "Overlap";
    case ErrorCode::InsideBall: return "InsideBall";
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::NumericBlowup: return "NumericBlowup";
    case ErrorCode::DegenerateQuadrature: return "DegenerateQuadrature";
    case ErrorCode::NoPositiveWindow: return "NoPositiveWindow";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + to_string(code) + ": " + message),
      code_(code),
      module_(std::move(module)) {}

}  // namespace enclosure
