#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazeintent {

enum class ErrorCode {
  // geometry
  FrameMismatch,
  BehindCamera,
  InvalidPose,
  InvalidIntrinsics,
  // streams
  EmptyWindow,
  DegenerateInterval,
  WordNotFound,
  InvalidTranscript,
  // interpreter
  NoTargetFound,
  RemoteAgentError,
  MalformedAgentOutput,
  // scene
  NoObjectsDetected,
  InvalidObservation,
  // fusion / alignment
  EmptyScene,
  EmptyTrace,
  NoCorrespondence,
  // planner
  UnsupportedCommand,
  PolicyValidationError,
  // agent gateway
  Timeout,
  HttpError,
  CredentialMissing,
  NoCannedResponse,
  UnknownTemplate,
  // harness
  ScenarioInvalid,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gazeintent
