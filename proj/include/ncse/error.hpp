#pragma once

#include <stdexcept>
#include <string>

namespace ncse {

enum class ErrorCode {
  // argument / lookup errors (CLI exit 2)
  BadArgument,
  UnknownClip,
  // file and format errors (CLI exit 3)
  IoFailure,
  MalformedManifest,
  MalformedClip,
  MalformedModel,
  DuplicateName,
  // domain errors (CLI exit 4)
  ZeroVector,
  DimensionMismatch,
  DimensionTooSmall,
  NumericOverflow,
  DegenerateCovariance,
  LabelOutOfRange,
  StaleCache,
  ShapeMismatch,
  EmptyDataset,
  EmptyClass,
  SingleClassDataset,
  EmptyBatch,
  EmptyGeneratedSet,
  JointCountMismatch,
  NegativeTime,
  OddDimension,
};

const char* error_code_name(ErrorCode code);

// 2 = argument error, 3 = I/O or format error, 4 = domain error.
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return error_exit_code(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ncse
