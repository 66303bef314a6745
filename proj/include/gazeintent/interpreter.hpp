#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazeintent/agent.hpp"
#include "gazeintent/scene.hpp"
#include "gazeintent/streams.hpp"

namespace gazeintent {

/// One referential expression of a command: what kind of target, which
/// category to look for, and when the user said it.
struct TargetSlot {
  TargetProperty property = TargetProperty::Object;
  std::string category;
  TimeInterval interval;
  std::string source_word;
  std::size_t occurrence = 0;  // which occurrence of source_word in the transcript

  bool operator==(const TargetSlot&) const = default;
};

struct InterpretedCommand {
  std::vector<TargetSlot> slots;  // ordered by interval start
  Transcript transcript;
};

enum class AgentMode { RuleBased, Remote };

struct InterpreterConfig {
  AgentMode mode = AgentMode::RuleBased;
  /// Seconds added on each side of a slot's word timing.
  double padding = 0.0;
  /// Padded intervals are clamped here; defaults to the transcript span.
  std::optional<TimeInterval> bounds;
  /// Required in Remote mode.
  std::shared_ptr<AgentGateway> agent;
  std::string model_id = std::string(kDefaultModel);
  double temperature = 1.0;
};

/// Deterministic grammar:
///   this/that/these/those        -> object "stuff" (or the noun right after it)
///   it after a preposition       -> object "stuff"; otherwise it re-uses the held object
///   here/there                   -> position "position", or <noun> in "there on the <noun>"
///   the/a/an <words> and bare nouns -> object <head noun>
/// Throws NoTargetFound when nothing referential is found.
InterpretedCommand interpret_rule_based(const Transcript& transcript, double padding = 0.0,
                                        std::optional<TimeInterval> bounds = std::nullopt);

/// Dispatches on cfg.mode. Remote replies go through validate_o1. Gateway
/// failures surface as RemoteAgentError.
InterpretedCommand interpret(const Transcript& transcript, const InterpreterConfig& cfg);

AgentRequest interpret_request(const Transcript& transcript, const InterpreterConfig& cfg);

/// {"slots":[{"label","category","word","occurrence","t_start","t_end"}]}
std::string serialize_o1(const InterpretedCommand& cmd);
nlohmann::json o1_json(const InterpretedCommand& cmd);

struct O1Validation {
  InterpretedCommand command;
  std::vector<std::string> warnings;
};

/// Schema gate for agent replies. Strips one surrounding code fence, checks
/// every field, verifies slot words against the transcript, clamps intervals
/// to the transcript span (with a warning) and orders slots by start time.
/// Throws MalformedAgentOutput with a field path in the message.
O1Validation validate_o1(std::string_view raw, const Transcript& transcript);

/// Removes a ```...``` fence around a reply, if present.
std::string strip_code_fence(std::string_view raw);

nlohmann::json transcript_json(const Transcript& transcript);
Transcript transcript_from_json(const nlohmann::json& j);

}  // namespace gazeintent
