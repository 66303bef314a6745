#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gazeintent/geometry.hpp"
#include "gazeintent/scene.hpp"

namespace gazeintent {

enum class Primitive {
  Pick,
  Put,
  Pour,
  Swap,
  MoveTo,
  MoveX,
  MoveY,
  MoveZ,
  OpenGripper,
  CloseGripper,
  Rotate,
};

enum class PrimitiveKind { Composite, Atomic };

PrimitiveKind kind_of(Primitive p) noexcept;
/// Wire name, e.g. "open_gripper".
std::string_view name_of(Primitive p) noexcept;
std::optional<Primitive> primitive_from_name(std::string_view name) noexcept;
const std::vector<Primitive>& all_primitives();

/// Robot-view pixels (2D) or workspace meters (3D).
using ActionPosition = std::variant<Point2, Point3>;

struct ActionTarget {
  std::string label;
  ActionPosition position = Point2(0, 0);

  bool operator==(const ActionTarget& o) const;
};

struct ActionParams {
  std::vector<ActionTarget> targets;  // one pair, two for swap
  std::optional<double> distance;     // meters
  std::optional<double> angle;        // degrees

  bool operator==(const ActionParams&) const = default;
};

/// A step keeps its action name as text so that unknown names coming back
/// from an agent can be reported by validation instead of lost in parsing.
struct PolicyStep {
  std::string action;
  ActionParams params;

  bool operator==(const PolicyStep&) const = default;

  static PolicyStep open_gripper();
  static PolicyStep close_gripper();
  static PolicyStep with_target(Primitive p, std::string label, ActionPosition position);
  static PolicyStep move(Primitive axis, double meters);
  static PolicyStep rotate(double degrees);
  static PolicyStep swap(ActionTarget a, ActionTarget b);
};

enum class Provenance { RuleBased, Remote };
std::string_view to_string(Provenance p) noexcept;

struct Policy {
  std::vector<PolicyStep> steps;
  Provenance provenance = Provenance::RuleBased;

  bool operator==(const Policy&) const = default;
  std::vector<std::string> action_names() const;
};

/// Where the arm may go. 2D positions are checked against image_bounds,
/// 3D positions against [box_min, box_max].
struct Workspace {
  BBox image_bounds{0, 0, 1280, 720};
  Point3 box_min{-1.0, -1.0, 0.0};
  Point3 box_max{1.0, 1.0, 1.0};
  double max_translation_m = 0.5;
  double max_rotation_deg = 360.0;
  Point2 staging{640, 600};  // free spot used when swapping two objects
};

struct Violation {
  long step = -1;  // -1 for whole-policy problems
  std::string kind;  // membership | arity | workspace | gripper | consistency
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string summary() const;
};

/// Membership, parameter arity, workspace bounds, 2D/3D consistency and
/// gripper logic: a pick needs an open gripper and a close right after it;
/// a put needs a held object and an open right after it.
ValidationReport validate_policy(const Policy& policy, const Workspace& workspace);

/// Bare steps array: [["pick", {"label": "apple", "position": [x, y]}], ...].
/// Keys sorted, no whitespace; this is the canonical form.
std::string serialize_steps(const Policy& policy);
nlohmann::json steps_json(const Policy& policy);
/// {"provenance": "...", "steps": [...]}
std::string serialize_policy(const Policy& policy);

/// Accepts either form above (fenced or not). A bare array gets
/// `default_provenance`. Throws MalformedAgentOutput naming the step.
Policy parse_policy(std::string_view text, Provenance default_provenance = Provenance::Remote);

}  // namespace gazeintent
