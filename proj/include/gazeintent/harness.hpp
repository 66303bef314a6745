#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazeintent/agent.hpp"
#include "gazeintent/alignment.hpp"
#include "gazeintent/fusion.hpp"
#include "gazeintent/interpreter.hpp"
#include "gazeintent/policy.hpp"
#include "gazeintent/scenario.hpp"

namespace gazeintent {

/// mock: offline agent answering from the scenario's canned responses, then
///       from the built-in rules. remote: live endpoint from the environment.
/// rule: no agent at all.
enum class AgentChoice { Mock, Remote, Rule };
std::string_view to_string(AgentChoice a) noexcept;
std::optional<AgentChoice> agent_choice_from(std::string_view text) noexcept;

struct RunConfig {
  AgentChoice agent = AgentChoice::Mock;
  std::uint64_t seed = 0;
  /// Overrides the scenario's gaze noise.
  std::optional<double> sigma_cm;
  /// Remote mode only. Defaults to from_env() and an HTTP transport.
  std::optional<RemoteAgentConfig> remote;
  std::shared_ptr<Transport> transport;
  /// Every agent exchange is appended here when set.
  std::shared_ptr<Journal> journal;
  /// Used instead of building a gateway (journal replay).
  std::shared_ptr<AgentGateway> gateway;
};

struct SlotResult {
  TargetSlot slot;
  GazeTrace trace;
  std::optional<FusionResult> fusion;
  std::optional<AlignmentResult> alignment;
  std::optional<double> gaze_error_cm;
  std::string expected_human;
  std::string expected_robot;
  bool correct = false;  // fused and aligned ids both as expected
};

struct Timings {
  double interpret_ms = 0;
  double fusion_ms = 0;
  double alignment_ms = 0;
  double planning_ms = 0;
};

struct RunResult {
  std::string scenario_id;
  std::uint64_t trial = 0;
  double sigma_cm = 0;
  std::vector<SlotResult> slots;
  std::optional<Policy> policy;
  bool success = false;
  std::optional<FailureStage> failure_stage;
  std::string diagnostic;
  Timings timings;  // wall clock, never written to files

  /// success, or the failure the scenario asks for.
  bool expectation_met(const Scenario& s) const;
};

/// Seed of one run; depends only on ids and values, never on batch order.
std::uint64_t run_seed(const Scenario& s, std::uint64_t cli_seed, double sigma_cm, std::uint64_t trial);

/// interpret -> gaze window / reprojection -> observe -> fuse -> observe ->
/// align -> plan -> validate. Stage errors end the run and are recorded;
/// nothing is thrown for them.
RunResult run_scenario(const Scenario& s, const RunConfig& cfg, std::uint64_t trial = 0);

/// Gateway used by run_scenario for cfg.agent (nullptr for Rule).
std::shared_ptr<AgentGateway> make_gateway(const Scenario& s, const RunConfig& cfg);

/// Euclidean distance between the recency-weighted gaze point and the
/// expected target's anchor, in cm at the table plane.
double gaze_error_cm(const GazeTrace& trace, const Point2& anchor_px, double px_per_cm);

/// Mean error of an isotropic 2D Gaussian is sigma * sqrt(pi / 2).
double sigma_for_mean_error(double mean_error_cm);

struct Metrics {
  long total = 0;
  long correct = 0;
  double success_rate = 0;  // percent
  double mean_gaze_error_cm = 0;
  double sd_gaze_error_cm = 0;
  std::optional<int> complexity;
};

Metrics success_rate(const std::vector<RunResult>& results);

struct ComplexityRow {
  std::string id;
  std::string command;     // template as printed in the task table
  bool referred_object;    // names its objects
  int params;
  int actions;
  int numeric_params;      // distances and angles among params
  std::vector<std::string> required;  // primitives a matching policy must use
  int complexity() const noexcept { return params + actions; }
};

const std::vector<ComplexityRow>& complexity_table();
const ComplexityRow* find_complexity_row(std::string_view id) noexcept;

/// Table complexity of the template. Throws UnknownTemplate, or
/// PolicyValidationError if the policy misses a primitive the template needs.
int complexity(std::string_view template_id, const Policy& policy);

/// trials runs per sigma. Results come back ordered by (sigma, trial);
/// trials run in parallel.
std::vector<RunResult> monte_carlo(const Scenario& s, long trials, const std::vector<double>& sigmas_cm,
                                   const RunConfig& cfg);
std::vector<RunResult> monte_carlo_serial(const Scenario& s, long trials,
                                          const std::vector<double>& sigmas_cm, const RunConfig& cfg);

/// Runs every scenario once, in parallel. Output order follows input order.
std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios, const RunConfig& cfg);

/// scenario_id,trial,slot,selected_id,expected_id,success,gaze_error_cm,stage
/// Rows sorted by (scenario_id, trial, slot) so batch order never shows.
void write_csv(std::ostream& out, std::vector<RunResult> results);
std::string csv_string(const std::vector<RunResult>& results);

/// Per-run detail for the JSON output (no timings).
nlohmann::json to_json(const RunResult& r);

}  // namespace gazeintent
