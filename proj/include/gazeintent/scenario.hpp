#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazeintent/alignment.hpp"
#include "gazeintent/geometry.hpp"
#include "gazeintent/policy.hpp"
#include "gazeintent/scene.hpp"
#include "gazeintent/streams.hpp"

namespace gazeintent {

inline constexpr int kScenarioSchemaVersion = 1;

enum class FailureStage { Input, Observation, Fusion, Alignment, Planning };
std::string_view to_string(FailureStage stage) noexcept;
std::optional<FailureStage> failure_stage_from(std::string_view text) noexcept;

struct ExpectedSlot {
  std::string human;  // id in the human scene
  std::string robot;  // id in the robot scene
};

struct Expectation {
  std::vector<ExpectedSlot> slots;
  std::vector<std::string> actions;       // action names in order
  std::optional<nlohmann::json> policy;   // canonical steps array, compared byte for byte
  std::optional<std::string> template_id; // complexity table key
  std::optional<FailureStage> failure_stage;  // fault scenarios: where the run must stop
};

struct CannedResponse {
  std::string template_id;
  std::optional<std::map<std::string, std::string>> variables;  // absent: any request of the template
  std::string text;
};

struct NoiseConfig {
  double gaze_sigma_cm = 0.0;
  double px_per_cm = 1.0;  // at the table plane, human view
};

/// One self-contained test case. Loaded from versioned JSON.
struct Scenario {
  std::string id;
  std::uint64_t seed = 0;
  HumanInput human;
  double gaze_rate_hz = 10.0;
  Pose camera_from_pupil = Pose::identity(FrameId::fixed(FrameName::GlassesCamera));
  AnnotatedScene human_scene;
  AnnotatedScene robot_scene;
  std::map<std::string, std::string> correspondence;  // human id -> robot id
  Workspace workspace;
  MatcherNoise matcher;
  AlignmentConfig alignment;
  NoiseConfig noise;
  double padding_s = 0.0;
  std::vector<CannedResponse> agent_responses;
  Expectation expected;

  nlohmann::json source;  // document it was loaded from
};

/// Parses and validates a scenario document. Throws ScenarioInvalid with a
/// field path on any problem (bad types, unknown ids, ill-formed poses...).
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace gazeintent
