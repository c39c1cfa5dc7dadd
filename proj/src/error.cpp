#include "gapalign/error.hpp"

namespace gapalign {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::BadMagic: return "bad_magic";
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::SizeMismatch: return "size_mismatch";
    case ErrorCode::NonProbabilistic: return "non_probabilistic";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::EmptyAfterNormalization: return "empty_after_normalization";
    case ErrorCode::PathInfeasible: return "path_infeasible";
    case ErrorCode::NoPath: return "no_path";
    case ErrorCode::InstanceTooLarge: return "instance_too_large";
    case ErrorCode::EmptyReference: return "empty_reference";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::ZeroLengthReference: return "zero_length_reference";
    case ErrorCode::NoPairs: return "no_pairs";
    case ErrorCode::EmptyFrameRange: return "empty_frame_range";
    case ErrorCode::MissingGapId: return "missing_gap_id";
    case ErrorCode::UnknownGapId: return "unknown_gap_id";
    case ErrorCode::SetMismatch: return "set_mismatch";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
      return 1;
    case ErrorCode::PathInfeasible:
    case ErrorCode::NoPath:
    case ErrorCode::EmptyAfterNormalization:
    case ErrorCode::InstanceTooLarge:
    case ErrorCode::EmptyFrameRange:
      return 2;
    default:
      return 3;
  }
}

}  // namespace gapalign
