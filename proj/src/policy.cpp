#include "gazeintent/policy.hpp"

#include <cmath>
#include <sstream>

#include "gazeintent/error.hpp"
#include "gazeintent/interpreter.hpp"

namespace gazeintent {

using nlohmann::json;

namespace {

struct PrimitiveInfo {
  Primitive primitive;
  std::string_view name;
  PrimitiveKind kind;
};

constexpr PrimitiveInfo kPrimitives[] = {
    {Primitive::Pick, "pick", PrimitiveKind::Composite},
    {Primitive::Put, "put", PrimitiveKind::Composite},
    {Primitive::Pour, "pour", PrimitiveKind::Composite},
    {Primitive::Swap, "swap", PrimitiveKind::Composite},
    {Primitive::MoveTo, "move_to", PrimitiveKind::Composite},
    {Primitive::MoveX, "move_x", PrimitiveKind::Atomic},
    {Primitive::MoveY, "move_y", PrimitiveKind::Atomic},
    {Primitive::MoveZ, "move_z", PrimitiveKind::Atomic},
    {Primitive::OpenGripper, "open_gripper", PrimitiveKind::Atomic},
    {Primitive::CloseGripper, "close_gripper", PrimitiveKind::Atomic},
    {Primitive::Rotate, "rotate", PrimitiveKind::Atomic},
};

const PrimitiveInfo& info(Primitive p) {
  for (const auto& i : kPrimitives) {
    if (i.primitive == p) return i;
  }
  return kPrimitives[0];
}

json position_json(const ActionPosition& pos) {
  return std::visit(
      [](const auto& v) {
        json arr = json::array();
        for (int k = 0; k < v.size(); ++k) arr.push_back(v[k]);
        return arr;
      },
      pos);
}

json target_json(const ActionTarget& t) {
  return {{"label", t.label}, {"position", position_json(t.position)}};
}

json params_json(const ActionParams& p) {
  json out = json::object();
  if (p.targets.size() == 1) {
    out = target_json(p.targets.front());
  } else if (!p.targets.empty()) {
    json arr = json::array();
    for (const auto& t : p.targets) arr.push_back(target_json(t));
    out["targets"] = arr;
  }
  if (p.distance) out["distance"] = *p.distance;
  if (p.angle) out["angle"] = *p.angle;
  return out;
}

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedAgentOutput, where + ": " + what);
}

ActionPosition parse_position(const json& j, const std::string& where) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) {
    malformed(where, "position must be an array of 2 or 3 numbers");
  }
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) {
      malformed(where, "position[" + std::to_string(k) + "]: expected number, got " + j[k].type_name());
    }
  }
  if (j.size() == 2) return Point2(j[0].get<double>(), j[1].get<double>());
  return Point3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ActionTarget parse_target(const json& j, const std::string& where) {
  if (!j.is_object()) malformed(where, "expected object");
  for (const auto& [key, _] : j.items()) {
    if (key != "label" && key != "position") malformed(where, "unknown field '" + key + "'");
  }
  ActionTarget t;
  if (!j.contains("label")) malformed(where, "label: missing");
  if (!j.at("label").is_string()) {
    malformed(where, std::string("label: expected string, got ") + j.at("label").type_name());
  }
  t.label = j.at("label").get<std::string>();
  if (!j.contains("position")) malformed(where, "position: missing");
  t.position = parse_position(j.at("position"), where);
  return t;
}

double parse_number(const json& j, const std::string& where, const char* key) {
  if (!j.is_number()) malformed(where, std::string(key) + ": expected number, got " + j.type_name());
  return j.get<double>();
}

PolicyStep parse_step(const json& j, std::size_t index) {
  std::string where = "step " + std::to_string(index);
  if (!j.is_array() || j.size() != 2) malformed(where, "expected [name, params]");
  if (!j[0].is_string()) malformed(where, std::string("name: expected string, got ") + j[0].type_name());
  PolicyStep step;
  step.action = j[0].get<std::string>();
  where += " (" + step.action + ")";
  const json& params = j[1];
  if (!params.is_object()) malformed(where, std::string("params: expected object, got ") + params.type_name());
  json single = json::object();
  for (const auto& [key, value] : params.items()) {
    if (key == "label" || key == "position") {
      single[key] = value;
    } else if (key == "targets") {
      if (!value.is_array()) malformed(where, "targets: expected array");
      for (std::size_t k = 0; k < value.size(); ++k) {
        step.params.targets.push_back(parse_target(value[k], where + " targets[" + std::to_string(k) + "]"));
      }
    } else if (key == "distance") {
      step.params.distance = parse_number(value, where, "distance");
    } else if (key == "angle") {
      step.params.angle = parse_number(value, where, "angle");
    } else {
      malformed(where, "unknown field '" + key + "'");
    }
  }
  if (!single.empty()) {
    if (!step.params.targets.empty()) malformed(where, "both targets and label/position given");
    step.params.targets.push_back(parse_target(single, where));
  }
  return step;
}

bool finite_position(const ActionPosition& pos) {
  return std::visit([](const auto& v) { return v.allFinite(); }, pos);
}

}  // namespace

PrimitiveKind kind_of(Primitive p) noexcept { return info(p).kind; }
std::string_view name_of(Primitive p) noexcept { return info(p).name; }

std::optional<Primitive> primitive_from_name(std::string_view name) noexcept {
  for (const auto& i : kPrimitives) {
    if (i.name == name) return i.primitive;
  }
  return std::nullopt;
}

const std::vector<Primitive>& all_primitives() {
  static const std::vector<Primitive> all = [] {
    std::vector<Primitive> v;
    for (const auto& i : kPrimitives) v.push_back(i.primitive);
    return v;
  }();
  return all;
}

bool ActionTarget::operator==(const ActionTarget& o) const {
  if (label != o.label || position.index() != o.position.index()) return false;
  return std::visit(
      [&](const auto& v) { return v == std::get<std::decay_t<decltype(v)>>(o.position); }, position);
}

PolicyStep PolicyStep::open_gripper() { return {std::string(name_of(Primitive::OpenGripper)), {}}; }
PolicyStep PolicyStep::close_gripper() { return {std::string(name_of(Primitive::CloseGripper)), {}}; }

PolicyStep PolicyStep::with_target(Primitive p, std::string label, ActionPosition position) {
  PolicyStep s{std::string(name_of(p)), {}};
  s.params.targets.push_back({std::move(label), position});
  return s;
}

PolicyStep PolicyStep::move(Primitive axis, double meters) {
  PolicyStep s{std::string(name_of(axis)), {}};
  s.params.distance = meters;
  return s;
}

PolicyStep PolicyStep::rotate(double degrees) {
  PolicyStep s{std::string(name_of(Primitive::Rotate)), {}};
  s.params.angle = degrees;
  return s;
}

PolicyStep PolicyStep::swap(ActionTarget a, ActionTarget b) {
  PolicyStep s{std::string(name_of(Primitive::Swap)), {}};
  s.params.targets = {std::move(a), std::move(b)};
  return s;
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::RuleBased ? "rule_based" : "remote";
}

std::vector<std::string> Policy::action_names() const {
  std::vector<std::string> names;
  names.reserve(steps.size());
  for (const auto& s : steps) names.push_back(s.action);
  return names;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const Violation& v = violations[i];
    if (i) out << "; ";
    out << v.kind;
    if (v.step >= 0) out << " @" << v.step;
    out << ": " << v.message;
  }
  return out.str();
}

ValidationReport validate_policy(const Policy& policy, const Workspace& ws) {
  ValidationReport report;
  const auto flag = [&](long step, const char* kind, std::string message) {
    report.violations.push_back({step, kind, std::move(message)});
  };
  if (policy.steps.empty()) flag(-1, "arity", "policy has no steps");

  enum class Gripper { Unknown, Open, Closed };
  Gripper gripper = Gripper::Unknown;
  bool holding = false;
  long pending_close = -1;  // pick awaiting close_gripper
  long pending_open = -1;   // put awaiting open_gripper
  std::optional<std::size_t> dims;
  bool mixed_reported = false;

  for (std::size_t i = 0; i < policy.steps.size(); ++i) {
    const auto idx = static_cast<long>(i);
    const PolicyStep& step = policy.steps[i];
    const ActionParams& p = step.params;
    const auto prim = primitive_from_name(step.action);

    if (pending_close >= 0 && prim != Primitive::CloseGripper) {
      flag(pending_close, "gripper", "pick is not followed by close_gripper");
      pending_close = -1;
    }
    if (pending_open >= 0 && prim != Primitive::OpenGripper) {
      flag(pending_open, "gripper", "put is not followed by open_gripper");
      pending_open = -1;
    }
    if (!prim) {
      flag(idx, "membership", "unknown primitive '" + step.action + "'");
      continue;
    }

    std::size_t want_targets = 0;
    bool want_distance = false;
    bool want_angle = false;
    switch (*prim) {
      case Primitive::Pick:
      case Primitive::Put:
      case Primitive::Pour:
      case Primitive::MoveTo: want_targets = 1; break;
      case Primitive::Swap: want_targets = 2; break;
      case Primitive::MoveX:
      case Primitive::MoveY:
      case Primitive::MoveZ: want_distance = true; break;
      case Primitive::Rotate: want_angle = true; break;
      case Primitive::OpenGripper:
      case Primitive::CloseGripper: break;
    }
    if (p.targets.size() != want_targets) {
      flag(idx, "arity", step.action + " takes " + std::to_string(want_targets) +
                             " (label, position) pair(s), got " + std::to_string(p.targets.size()));
    }
    if (p.distance.has_value() != want_distance) {
      flag(idx, "arity", step.action + (want_distance ? " needs" : " takes no") + " distance");
    }
    if (p.angle.has_value() != want_angle) {
      flag(idx, "arity", step.action + (want_angle ? " needs" : " takes no") + " angle");
    }

    for (const ActionTarget& t : p.targets) {
      if (t.label.empty()) flag(idx, "arity", "empty target label");
      if (!finite_position(t.position)) {
        flag(idx, "workspace", "non-finite position for '" + t.label + "'");
        continue;
      }
      const std::size_t d = std::holds_alternative<Point2>(t.position) ? 2 : 3;
      if (!dims) dims = d;
      if (*dims != d && !mixed_reported) {
        flag(idx, "consistency", "policy mixes 2D and 3D positions");
        mixed_reported = true;
      }
      if (const auto* p2 = std::get_if<Point2>(&t.position)) {
        if (!ws.image_bounds.contains(*p2)) {
          std::ostringstream msg;
          msg << "'" << t.label << "' at [" << p2->x() << ", " << p2->y() << "] is outside the workspace";
          flag(idx, "workspace", msg.str());
        }
      } else {
        const Point3& p3 = std::get<Point3>(t.position);
        if ((p3.array() < ws.box_min.array()).any() || (p3.array() > ws.box_max.array()).any()) {
          flag(idx, "workspace", "'" + t.label + "' is outside the workspace box");
        }
      }
    }
    if (p.distance && (!std::isfinite(*p.distance) || std::abs(*p.distance) > ws.max_translation_m)) {
      flag(idx, "workspace", "translation of " + std::to_string(*p.distance) + " m exceeds the workspace");
    }
    if (p.angle && (!std::isfinite(*p.angle) || std::abs(*p.angle) > ws.max_rotation_deg)) {
      flag(idx, "workspace", "rotation of " + std::to_string(*p.angle) + " deg is out of range");
    }

    switch (*prim) {
      case Primitive::OpenGripper:
        gripper = Gripper::Open;
        holding = false;
        pending_open = -1;
        break;
      case Primitive::CloseGripper:
        gripper = Gripper::Closed;
        if (pending_close >= 0) holding = true;
        pending_close = -1;
        break;
      case Primitive::Pick:
        if (gripper != Gripper::Open) flag(idx, "gripper", "pick without opening the gripper first");
        if (holding) flag(idx, "gripper", "pick while already holding an object");
        pending_close = idx;
        break;
      case Primitive::Put:
        if (!holding) flag(idx, "gripper", "put without a held object");
        pending_open = idx;
        break;
      case Primitive::Pour:
        if (!holding) flag(idx, "gripper", "pour without a held container");
        break;
      case Primitive::Swap:
        if (holding) flag(idx, "gripper", "swap while holding an object");
        break;
      default: break;
    }
  }
  if (pending_close >= 0) flag(pending_close, "gripper", "pick is not followed by close_gripper");
  if (pending_open >= 0) flag(pending_open, "gripper", "put is not followed by open_gripper");
  return report;
}

json steps_json(const Policy& policy) {
  json steps = json::array();
  for (const PolicyStep& s : policy.steps) steps.push_back(json::array({s.action, params_json(s.params)}));
  return steps;
}

std::string serialize_steps(const Policy& policy) { return steps_json(policy).dump(); }

std::string serialize_policy(const Policy& policy) {
  return json{{"provenance", std::string(to_string(policy.provenance))}, {"steps", steps_json(policy)}}.dump();
}

Policy parse_policy(std::string_view text, Provenance default_provenance) {
  json doc;
  try {
    doc = json::parse(strip_code_fence(text));
  } catch (const json::parse_error& e) {
    malformed("policy", "not JSON (byte " + std::to_string(e.byte) + ")");
  }
  Policy policy;
  policy.provenance = default_provenance;
  const json* steps = &doc;
  if (doc.is_object()) {
    if (!doc.contains("steps")) malformed("policy", "missing 'steps'");
    steps = &doc.at("steps");
    if (doc.contains("provenance")) {
      const json& prov = doc.at("provenance");
      if (prov == "rule_based") {
        policy.provenance = Provenance::RuleBased;
      } else if (prov == "remote") {
        policy.provenance = Provenance::Remote;
      } else {
        malformed("policy", "unknown provenance");
      }
    }
  }
  if (!steps->is_array()) malformed("policy", "steps must be an array");
  for (std::size_t i = 0; i < steps->size(); ++i) policy.steps.push_back(parse_step((*steps)[i], i));
  return policy;
}

}  // namespace gazeintent
