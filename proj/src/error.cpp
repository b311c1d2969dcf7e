#include "lepskii/error.hpp"

#include <cmath>

namespace lepskii {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::InvalidLambda: return "InvalidLambda";
    case ErrorKind::InvalidEta: return "InvalidEta";
    case ErrorKind::InvalidRatio: return "InvalidRatio";
    case ErrorKind::InvalidLambda0: return "InvalidLambda0";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySpectrum: return "EmptySpectrum";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::NotReached: return "NotReached";
    case ErrorKind::IncompleteFamily: return "IncompleteFamily";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::EmptyJ: return "EmptyJ";
    case ErrorKind::FullJ: return "FullJ";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

void require_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::InvalidLambda,
                std::string(where) + ": lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
}

void require_eta(double eta, const char* where) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw Error(ErrorKind::InvalidEta,
                std::string(where) + ": eta must lie in (0, 1), got " + std::to_string(eta));
  }
}

}  // namespace lepskii
