#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace misinfo {

enum class ErrorCode {
  // corpus-store
  MalformedRecord,
  DuplicateId,
  MissingField,
  BadMagic,
  UnsupportedVersion,
  DimMismatch,
  TruncatedFile,
  MalformedVector,
  SpanMismatch,
  UnknownRecord,
  // similarity-index
  NoCandidate,
  UnknownId,
  // entity-swap
  NoAdmissibleReplacement,
  InadmissiblePair,
  OverlappingSpans,
  // misinformer-engine
  MissingInput,
  EmptyClass,
  UnsupportedFormat,
  IoFailure,
  // eval-protocol
  UnknownLabel,
  MissingPrediction,
  DuplicatePrediction,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library surfaces as this exception; the
/// code identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace misinfo
