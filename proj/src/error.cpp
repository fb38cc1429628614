#include "misinfo/error.hpp"

namespace misinfo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedVector: return "MalformedVector";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::UnknownRecord: return "UnknownRecord";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::NoAdmissibleReplacement: return "NoAdmissibleReplacement";
    case ErrorCode::InadmissiblePair: return "InadmissiblePair";
    case ErrorCode::OverlappingSpans: return "OverlappingSpans";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace misinfo
