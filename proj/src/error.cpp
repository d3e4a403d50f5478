#include "ncse/error.hpp"

namespace ncse {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::UnknownClip: return "UnknownClip";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::MalformedClip: return "MalformedClip";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyGeneratedSet: return "EmptyGeneratedSet";
    case ErrorCode::JointCountMismatch: return "JointCountMismatch";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::OddDimension: return "OddDimension";
  }
  return "UnknownError";
}

int error_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadArgument:
    case ErrorCode::UnknownClip:
      return 2;
    case ErrorCode::IoFailure:
    case ErrorCode::MalformedManifest:
    case ErrorCode::MalformedClip:
    case ErrorCode::MalformedModel:
    case ErrorCode::DuplicateName:
      return 3;
    default:
      return 4;
  }
}

}  // namespace ncse
