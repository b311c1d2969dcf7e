#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lepskii {

enum class ErrorKind {
  NonSymmetric,
  NonFinite,
  NotPositiveSemidefinite,
  DomainViolation,
  InvalidLambda,
  InvalidEta,
  InvalidRatio,
  InvalidLambda0,
  InvalidArgument,
  DimensionMismatch,
  EmptySpectrum,
  NoRoot,
  NotReached,
  IncompleteFamily,
  DegenerateFit,
  DegenerateSplit,
  NoCrossing,
  EmptyJ,
  FullJ,
  InsufficientData,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Domain error raised by every library operation. The kind mirrors the
/// failure classes callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Shared argument checks.
void require_lambda(double lambda, const char* where);
void require_eta(double eta, const char* where);

}  // namespace lepskii
