#pragma once

#include <stdexcept>
#include <string>

namespace gapalign {

enum class ErrorCode {
  Io,
  BadMagic,
  MalformedHeader,
  SizeMismatch,
  NonProbabilistic,
  Validation,
  EmptyAfterNormalization,
  PathInfeasible,
  NoPath,
  InstanceTooLarge,
  EmptyReference,
  LengthMismatch,
  ZeroLengthReference,
  NoPairs,
  EmptyFrameRange,
  MissingGapId,
  UnknownGapId,
  SetMismatch,
};

// Stable snake_case name used in machine-readable error records.
const char* error_name(ErrorCode code);

// Process exit status for the CLI: 1 I/O, 2 infeasible input, 3 validation.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapalign
