#include "gazeintent/error.hpp"

namespace gazeintent {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::WordNotFound: return "WordNotFound";
    case ErrorCode::InvalidTranscript: return "InvalidTranscript";
    case ErrorCode::NoTargetFound: return "NoTargetFound";
    case ErrorCode::RemoteAgentError: return "RemoteAgentError";
    case ErrorCode::MalformedAgentOutput: return "MalformedAgentOutput";
    case ErrorCode::NoObjectsDetected: return "NoObjectsDetected";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NoCorrespondence: return "NoCorrespondence";
    case ErrorCode::UnsupportedCommand: return "UnsupportedCommand";
    case ErrorCode::PolicyValidationError: return "PolicyValidationError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::CredentialMissing: return "CredentialMissing";
    case ErrorCode::NoCannedResponse: return "NoCannedResponse";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
  }
  return "Unknown";
}

}  // namespace gazeintent
