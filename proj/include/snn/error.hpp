#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snn {

enum class ErrorCode {
  InvalidDegree,
  MissingSeed,
  InvalidArgument,
  DimensionMismatch,
  NotSymmetric,
  NoConvergence,
  BadMagic,
  Truncated,
  CountMismatch,
  LabelOutOfRange,
  InsufficientSamples,
  Io,
  Parse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDegree: return "invalid-degree";
    case ErrorCode::MissingSeed: return "missing-seed";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NotSymmetric: return "non-symmetric";
    case ErrorCode::NoConvergence: return "non-convergence";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::CountMismatch: return "count-mismatch";
    case ErrorCode::LabelOutOfRange: return "label-out-of-range";
    case ErrorCode::InsufficientSamples: return "insufficient-samples";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

// Every failure in the library surfaces as this exception; `code()` lets
// callers (and tests) branch on the failure kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace snn
