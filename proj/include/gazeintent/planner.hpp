#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gazeintent/agent.hpp"
#include "gazeintent/interpreter.hpp"
#include "gazeintent/policy.hpp"
#include "gazeintent/scene.hpp"

namespace gazeintent {

/// Everything the policy generator sees: the robot-view referred object of
/// each slot, the interpreted command (with its transcript) and the workspace.
struct PlannerState {
  std::vector<ReferredObject> referred;  // one per command slot, same order
  InterpretedCommand command;
  Workspace workspace;

  const Transcript& transcript() const noexcept { return command.transcript; }
  /// Throws UnsupportedCommand if referred and slots disagree in count.
  void check() const;
};

struct PlannerConfig {
  AgentMode mode = AgentMode::RuleBased;
  std::shared_ptr<AgentGateway> agent;  // required in Remote mode
  std::string model_id = std::string(kDefaultModel);
  double temperature = 1.0;
};

/// Expands the command clause by clause (a clause starts at each verb):
///   pick/grab/take X               open, pick X, close
///   put/place X [and Y] on/there Z open, pick X, close, put Z, open  (per object)
///   pour ... from X on/into Y      open, pick X, close, pour Y, put X back, open
///   lift/raise [up] for D <unit>   move_z +D      lower ... move_z -D
///   turn/rotate ... for A degrees  rotate A
///   swap X and Y                   via the workspace staging spot
///   move to X                      move_to X
/// A put/pour with no new object acts on the held one. Throws UnsupportedCommand
/// when no clause yields an action. The result always passes validate_policy.
Policy plan_rule_based(const PlannerState& state);

/// Dispatches on cfg.mode; Remote replies are parsed and validated.
/// Throws UnsupportedCommand, RemoteAgentError, MalformedAgentOutput or
/// PolicyValidationError.
Policy plan(const PlannerState& state, const PlannerConfig& cfg);

ValidationReport validate_policy(const Policy& policy, const PlannerState& state);

AgentRequest plan_request(const PlannerState& state, const PlannerConfig& cfg);

/// Variables of plan_request, and their inverse (used by the offline mock).
std::map<std::string, std::string> plan_variables(const PlannerState& state);
PlannerState planner_state_from_variables(const std::map<std::string, std::string>& variables);

/// Human-readable primitive reference used in the planning prompt.
std::string primitive_reference();

/// Replays a policy on a symbolic table: maps each object label to where it
/// ends up. Picks take whatever sits at the pick position.
struct SymbolicOutcome {
  std::map<std::string, Point2> placed;  // label -> final position
  std::vector<std::string> errors;
};
SymbolicOutcome execute_symbolically(const Policy& policy,
                                     const std::map<std::string, Point2>& initial);

}  // namespace gazeintent
