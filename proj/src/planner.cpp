#include "gazeintent/planner.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "gazeintent/error.hpp"

namespace gazeintent {

using nlohmann::json;

namespace {

enum class Verb { Pick, Put, Pour, Lift, Lower, Turn, Swap, Move };

std::optional<Verb> verb_of(std::string_view tok) {
  if (tok == "pick" || tok == "grab" || tok == "take" || tok == "get") return Verb::Pick;
  if (tok == "put" || tok == "place" || tok == "set") return Verb::Put;
  if (tok == "pour") return Verb::Pour;
  if (tok == "lift" || tok == "raise") return Verb::Lift;
  if (tok == "lower") return Verb::Lower;
  if (tok == "turn" || tok == "rotate") return Verb::Turn;
  if (tok == "swap" || tok == "exchange") return Verb::Swap;
  if (tok == "move") return Verb::Move;
  return std::nullopt;
}

const std::set<std::string, std::less<>> kDestinationMarkers = {"on", "in", "onto", "into", "to", "at"};

std::optional<double> parse_number(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(tok), &used);
    if (used != tok.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

// Meters per unit word; a bare number is read as centimeters.
double unit_scale(std::string_view unit) {
  if (unit == "mm" || unit == "millimeter" || unit == "millimeters") return 0.001;
  if (unit == "m" || unit == "meter" || unit == "meters" || unit == "metre" || unit == "metres") return 1.0;
  return 0.01;
}

struct Phrase {
  Verb verb;
  std::size_t begin;  // token index of the verb
  std::size_t end;    // one past the last token
};

class RuleExpander {
 public:
  explicit RuleExpander(const PlannerState& state) : state_(state), tokens_(state.transcript().tokens()) {
    slot_at_.assign(tokens_.size(), -1);
    const auto& slots = state.command.slots;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto idx = find_word(state.transcript(), slots[s].source_word, slots[s].occurrence);
      if (!idx) {
        throw Error(ErrorCode::UnsupportedCommand,
                    "slot word '" + slots[s].source_word + "' is not in the transcript");
      }
      slot_at_[*idx] = static_cast<long>(s);
    }
  }

  Policy expand() {
    std::vector<Phrase> phrases;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (const auto v = verb_of(tokens_[i])) {
        if (!phrases.empty()) phrases.back().end = i;
        phrases.push_back({*v, i, tokens_.size()});
      }
    }
    for (const Phrase& p : phrases) apply(p);
    if (policy_.steps.empty()) {
      throw Error(ErrorCode::UnsupportedCommand, "no known action in '" + state_.transcript().raw_text() + "'");
    }
    policy_.provenance = Provenance::RuleBased;
    return policy_;
  }

 private:
  struct SlotRef {
    long slot;
    std::size_t token;
  };

  std::vector<SlotRef> slots_in(const Phrase& p, std::size_t from = 0) const {
    std::vector<SlotRef> out;
    for (std::size_t i = std::max(p.begin, from); i < p.end; ++i) {
      if (slot_at_[i] >= 0) out.push_back({slot_at_[i], i});
    }
    return out;
  }

  std::optional<std::size_t> token_in(const Phrase& p, const std::set<std::string, std::less<>>& words,
                                      std::size_t from = 0) const {
    for (std::size_t i = std::max(p.begin + 1, from); i < p.end; ++i) {
      if (words.contains(tokens_[i])) return i;
    }
    return std::nullopt;
  }

  // First number in the phrase with the unit word after it.
  std::optional<std::pair<double, std::string>> quantity(const Phrase& p) const {
    for (std::size_t i = p.begin + 1; i < p.end; ++i) {
      if (const auto v = parse_number(tokens_[i])) {
        return std::pair{*v, i + 1 < p.end ? tokens_[i + 1] : std::string()};
      }
    }
    return std::nullopt;
  }

  ActionTarget target_of(long slot) const {
    const TargetSlot& s = state_.command.slots[static_cast<std::size_t>(slot)];
    std::string label = s.category;
    // "on it" points back at the last place something was put.
    if (s.source_word == "it" && last_destination_) label = *last_destination_;
    return {label, state_.referred[static_cast<std::size_t>(slot)].observation.position()};
  }

  void ensure_open() {
    if (policy_.steps.empty() || policy_.steps.back().action != name_of(Primitive::OpenGripper)) {
      policy_.steps.push_back(PolicyStep::open_gripper());
    }
  }

  void pick(long slot) {
    ensure_open();
    const ActionTarget t = target_of(slot);
    policy_.steps.push_back(PolicyStep::with_target(Primitive::Pick, t.label, t.position));
    policy_.steps.push_back(PolicyStep::close_gripper());
    held_ = t;
  }

  void put(const ActionTarget& dest) {
    policy_.steps.push_back(PolicyStep::with_target(Primitive::Put, dest.label, dest.position));
    policy_.steps.push_back(PolicyStep::open_gripper());
    held_.reset();
  }

  [[noreturn]] void unsupported(const Phrase& p, const std::string& why) const {
    throw Error(ErrorCode::UnsupportedCommand, "'" + tokens_[p.begin] + "' clause: " + why);
  }

  void apply(const Phrase& p) {
    switch (p.verb) {
      case Verb::Pick: {
        const auto slots = slots_in(p);
        if (slots.empty()) unsupported(p, "nothing to pick");
        pick(slots.front().slot);
        break;
      }
      case Verb::Put: {
        const auto slots = slots_in(p);
        std::vector<long> sources;
        std::optional<long> dest;
        const auto marker = token_in(p, kDestinationMarkers);
        for (const SlotRef& r : slots) {
          const bool is_place =
              state_.command.slots[static_cast<std::size_t>(r.slot)].property == TargetProperty::Position;
          if (is_place || (marker && r.token > *marker)) {
            if (!dest) dest = r.slot;
          } else if (!dest) {
            sources.push_back(r.slot);
          }
        }
        if (!dest) unsupported(p, "no destination");
        const ActionTarget where = target_of(*dest);
        if (sources.empty()) {
          if (!held_) unsupported(p, "nothing to put");
          put(where);
        }
        for (long s : sources) {
          pick(s);
          put(where);
        }
        last_destination_ = where.label;
        break;
      }
      case Verb::Pour: {
        const auto from = token_in(p, {"from"});
        std::optional<long> source;
        std::optional<long> target;
        for (const SlotRef& r : slots_in(p)) {
          if (from && r.token > *from && !source) {
            source = r.slot;
          } else if (!target && (!from || r.token > *from)) {
            target = r.slot;
          }
        }
        if (!target) unsupported(p, "nothing to pour into");
        if (source) pick(*source);
        if (!held_) unsupported(p, "no container to pour from");
        const ActionTarget container = *held_;
        const ActionTarget into = target_of(*target);
        policy_.steps.push_back(PolicyStep::with_target(Primitive::Pour, into.label, into.position));
        put(container);
        break;
      }
      case Verb::Lift:
      case Verb::Lower: {
        const auto q = quantity(p);
        if (!q) unsupported(p, "no distance");
        const double d = q->first * unit_scale(q->second);
        policy_.steps.push_back(PolicyStep::move(Primitive::MoveZ, p.verb == Verb::Lift ? d : -d));
        break;
      }
      case Verb::Turn: {
        const auto q = quantity(p);
        if (!q) unsupported(p, "no angle");
        policy_.steps.push_back(PolicyStep::rotate(q->first));
        break;
      }
      case Verb::Swap: {
        const auto slots = slots_in(p);
        if (slots.size() < 2) unsupported(p, "swap needs two objects");
        const ActionTarget a = target_of(slots[0].slot);
        const ActionTarget b = target_of(slots[1].slot);
        const ActionTarget staging{"staging", state_.workspace.staging};
        pick(slots[0].slot);
        put(staging);
        pick(slots[1].slot);
        put(a);
        ensure_open();
        policy_.steps.push_back(PolicyStep::with_target(Primitive::Pick, a.label, staging.position));
        policy_.steps.push_back(PolicyStep::close_gripper());
        held_ = ActionTarget{a.label, staging.position};
        put(b);
        break;
      }
      case Verb::Move: {
        const auto slots = slots_in(p);
        if (!slots.empty()) {
          const ActionTarget t = target_of(slots.front().slot);
          policy_.steps.push_back(PolicyStep::with_target(Primitive::MoveTo, t.label, t.position));
          break;
        }
        const auto q = quantity(p);
        const bool up = token_in(p, {"up"}).has_value();
        const bool down = token_in(p, {"down"}).has_value();
        if (!q || (!up && !down)) unsupported(p, "no target or vertical distance");
        const double d = q->first * unit_scale(q->second);
        policy_.steps.push_back(PolicyStep::move(Primitive::MoveZ, up ? d : -d));
        break;
      }
    }
  }

  const PlannerState& state_;
  const std::vector<std::string>& tokens_;
  std::vector<long> slot_at_;
  Policy policy_;
  std::optional<ActionTarget> held_;
  std::optional<std::string> last_destination_;
};

json workspace_json(const Workspace& ws) {
  const BBox& b = ws.image_bounds;
  return {{"image_bounds", {b.x_min, b.y_min, b.x_max, b.y_max}},
          {"box_min", {ws.box_min.x(), ws.box_min.y(), ws.box_min.z()}},
          {"box_max", {ws.box_max.x(), ws.box_max.y(), ws.box_max.z()}},
          {"max_translation_m", ws.max_translation_m},
          {"max_rotation_deg", ws.max_rotation_deg},
          {"staging", {ws.staging.x(), ws.staging.y()}}};
}

Workspace workspace_from_json(const json& j) {
  Workspace ws;
  const auto& b = j.at("image_bounds");
  ws.image_bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  const auto& lo = j.at("box_min");
  const auto& hi = j.at("box_max");
  ws.box_min = Point3(lo[0].get<double>(), lo[1].get<double>(), lo[2].get<double>());
  ws.box_max = Point3(hi[0].get<double>(), hi[1].get<double>(), hi[2].get<double>());
  ws.max_translation_m = j.at("max_translation_m").get<double>();
  ws.max_rotation_deg = j.at("max_rotation_deg").get<double>();
  ws.staging = Point2(j.at("staging")[0].get<double>(), j.at("staging")[1].get<double>());
  return ws;
}

}  // namespace

void PlannerState::check() const {
  if (referred.size() != command.slots.size()) {
    throw Error(ErrorCode::UnsupportedCommand, std::to_string(command.slots.size()) + " slots but " +
                                                   std::to_string(referred.size()) + " referred objects");
  }
}

Policy plan_rule_based(const PlannerState& state) {
  state.check();
  Policy policy = RuleExpander(state).expand();
  const ValidationReport report = validate_policy(policy, state.workspace);
  if (!report.ok()) throw Error(ErrorCode::PolicyValidationError, report.summary());
  return policy;
}

ValidationReport validate_policy(const Policy& policy, const PlannerState& state) {
  return validate_policy(policy, state.workspace);
}

std::string primitive_reference() {
  std::ostringstream out;
  out << "- pick {label, position}: composite; grasp an object and lift it from the surface\n"
      << "- put {label, position}: composite; place the held object at a location\n"
      << "- pour {label, position}: composite; tilt the held cup and empty it into a container\n"
      << "- swap {targets: [{label, position}, {label, position}]}: composite; exchange two objects\n"
      << "- move_to {label, position}: composite; move the end-effector to a position\n"
      << "- move_x / move_y / move_z {distance}: atomic; translate the end-effector along an axis\n"
      << "- open_gripper {}: atomic\n"
      << "- close_gripper {}: atomic\n"
      << "- rotate {angle}: atomic; rotate the end-effector\n";
  return out.str();
}

std::map<std::string, std::string> plan_variables(const PlannerState& state) {
  json referred = json::array();
  for (std::size_t i = 0; i < state.referred.size(); ++i) {
    const auto& obs = state.referred[i].observation;
    const BBox& b = obs.bbox();
    referred.push_back({{"slot", i},
                        {"id", obs.id()},
                        {"label", i < state.command.slots.size() ? state.command.slots[i].category : ""},
                        {"position", {obs.position().x(), obs.position().y()}},
                        {"bbox", {b.x_min, b.y_min, b.x_max, b.y_max}}});
  }
  return {{"command", serialize_o1(state.command)},
          {"referred", referred.dump()},
          {"transcript", state.transcript().raw_text()},
          {"words", transcript_json(state.transcript()).dump()},
          {"workspace", workspace_json(state.workspace).dump()},
          {"primitives", primitive_reference()}};
}

PlannerState planner_state_from_variables(const std::map<std::string, std::string>& variables) {
  try {
    PlannerState state;
    const Transcript transcript = transcript_from_json(json::parse(variables.at("words")));
    state.command = validate_o1(variables.at("command"), transcript).command;
    for (const json& r : json::parse(variables.at("referred"))) {
      const auto& b = r.at("bbox");
      state.referred.push_back(
          {View::Robot, ObjectObservation(r.at("id").get<std::string>(),
                                          BBox{b[0].get<double>(), b[1].get<double>(),
                                               b[2].get<double>(), b[3].get<double>()})});
    }
    state.workspace = workspace_from_json(json::parse(variables.at("workspace")));
    return state;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedAgentOutput, std::string("planner variables: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::MalformedAgentOutput, std::string("planner variables: ") + e.what());
  }
}

AgentRequest plan_request(const PlannerState& state, const PlannerConfig& cfg) {
  AgentRequest req;
  req.prompt_template_id = std::string(kPlanTemplate);
  req.model_id = cfg.model_id;
  req.temperature = cfg.temperature;
  req.variables = plan_variables(state);
  return req;
}

Policy plan(const PlannerState& state, const PlannerConfig& cfg) {
  if (cfg.mode == AgentMode::RuleBased) return plan_rule_based(state);
  state.check();
  if (!cfg.agent) throw Error(ErrorCode::RemoteAgentError, "remote planner has no agent endpoint");
  AgentResponse resp;
  try {
    resp = cfg.agent->complete(plan_request(state, cfg));
  } catch (const Error& e) {
    throw Error(ErrorCode::RemoteAgentError, e.what());
  }
  Policy policy = parse_policy(resp.text, Provenance::Remote);
  const ValidationReport report = validate_policy(policy, state.workspace);
  if (!report.ok()) throw Error(ErrorCode::PolicyValidationError, report.summary());
  return policy;
}

SymbolicOutcome execute_symbolically(const Policy& policy, const std::map<std::string, Point2>& initial) {
  constexpr double kSamePlace = 1e-6;
  SymbolicOutcome out;
  out.placed = initial;
  std::optional<std::string> held;
  const auto at = [&](const Point2& p) -> std::optional<std::string> {
    for (const auto& [name, pos] : out.placed) {
      if ((pos - p).norm() <= kSamePlace) return name;
    }
    return std::nullopt;
  };
  const auto point = [](const ActionTarget& t) -> std::optional<Point2> {
    if (const auto* p2 = std::get_if<Point2>(&t.position)) return *p2;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < policy.steps.size(); ++i) {
    const PolicyStep& s = policy.steps[i];
    const auto prim = primitive_from_name(s.action);
    const std::string where = "step " + std::to_string(i) + ": ";
    if (!prim) continue;
    if (*prim == Primitive::Pick) {
      const auto p = point(s.params.targets.at(0));
      const auto name = p ? at(*p) : std::nullopt;
      if (!name) {
        out.errors.push_back(where + "nothing to pick");
        continue;
      }
      held = *name;
      out.placed.erase(*name);
    } else if (*prim == Primitive::Put) {
      const auto p = point(s.params.targets.at(0));
      if (!held || !p) {
        out.errors.push_back(where + "nothing held to put");
        continue;
      }
      if (at(*p)) out.errors.push_back(where + "destination occupied");
      out.placed[*held] = *p;
      held.reset();
    } else if (*prim == Primitive::Swap) {
      const auto pa = point(s.params.targets.at(0));
      const auto pb = point(s.params.targets.at(1));
      const auto a = pa ? at(*pa) : std::nullopt;
      const auto b = pb ? at(*pb) : std::nullopt;
      if (!a || !b) {
        out.errors.push_back(where + "swap endpoints are not both occupied");
        continue;
      }
      std::swap(out.placed[*a], out.placed[*b]);
    }
  }
  if (held) out.errors.push_back("policy ends holding '" + *held + "'");
  return out;
}

}  // namespace gazeintent
