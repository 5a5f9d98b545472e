#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matpred {

enum class ErrorKind {
  kInvalidInput,
  kDimensionMismatch,
  kNotPositiveDefinite,
  kInvalidDegreesOfFreedom,
  kInvalidShape,
  kUnsupportedSpec,
  kDegenerateSpectrum,
  kPoleInStencil,
  kPreconditionViolated,
  kDegenerateEstimate,
  kUnstableEstimate,
  kSingularInput,
  kTooManyFailures,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so
// callers (the risk harness retry policy, the CLI exit codes) can branch
// on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kNotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::kInvalidDegreesOfFreedom: return "invalid-degrees-of-freedom";
    case ErrorKind::kInvalidShape: return "invalid-shape";
    case ErrorKind::kUnsupportedSpec: return "unsupported-spec";
    case ErrorKind::kDegenerateSpectrum: return "degenerate-spectrum";
    case ErrorKind::kPoleInStencil: return "pole-in-stencil";
    case ErrorKind::kPreconditionViolated: return "precondition-violated";
    case ErrorKind::kDegenerateEstimate: return "degenerate-estimate";
    case ErrorKind::kUnstableEstimate: return "unstable-estimate";
    case ErrorKind::kSingularInput: return "singular-input";
    case ErrorKind::kTooManyFailures: return "too-many-failures";
    case ErrorKind::kConfig: return "config-error";
    case ErrorKind::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace matpred
