#include <doctest.h>

#include "gazeintent/planner.hpp"
#include "support.hpp"

using namespace gazeintent;
using testing::timed;

namespace {

// One robot-view object per slot, placed at the given pixel positions.
PlannerState state_for(const std::string& text, const std::vector<Point2>& at) {
  PlannerState s;
  s.command = interpret_rule_based(timed(text));
  for (std::size_t i = 0; i < s.command.slots.size(); ++i) {
    const Point2 p = at.at(i);
    s.referred.push_back({View::Robot, ObjectObservation("r" + std::to_string(i), {p.x() - 5, p.y() - 5, p.x() + 5, p.y() + 5})});
  }
  return s;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("pick") {
  const auto p = plan_rule_based(state_for("pick up the apple", {{100, 100}}));
  CHECK(p.action_names() == std::vector<std::string>{"open_gripper", "pick", "close_gripper"});
  CHECK(p.steps[1].params.targets[0].label == "apple");
  CHECK(std::get<Point2>(p.steps[1].params.targets[0].position) == Point2(100, 100));
}

TEST_CASE("put on a location") {
  const auto p = plan_rule_based(state_for("please put the apple there on the table", {{865, 472.5}, {257.5, 360}}));
  CHECK(serialize_steps(p) ==
        R"([["open_gripper",{}],["pick",{"label":"apple","position":[865.0,472.5]}],["close_gripper",{}],)"
        R"(["put",{"label":"table","position":[257.5,360.0]}],["open_gripper",{}]])");
  CHECK(p.provenance == Provenance::RuleBased);
}

TEST_CASE("two objects onto one target") {
  const auto p = plan_rule_based(state_for("put this and this on that", {{100, 100}, {200, 100}, {300, 300}}));
  CHECK(p.action_names() == std::vector<std::string>{"open_gripper", "pick", "close_gripper", "put", "open_gripper",
                                                     "pick", "close_gripper", "put", "open_gripper"});
  CHECK(std::get<Point2>(p.steps[3].params.targets[0].position) == Point2(300, 300));
  CHECK(std::get<Point2>(p.steps[5].params.targets[0].position) == Point2(200, 100));
}

TEST_CASE("put then pour onto it") {
  const auto p = plan_rule_based(
      state_for("put the apple on the plate then pour some thing from the cup on it", {{100, 100}, {300, 300}, {500, 100}, {300, 300}}));
  CHECK(p.action_names() == std::vector<std::string>{"open_gripper", "pick", "close_gripper", "put", "open_gripper", "pick",
                                                     "close_gripper", "pour", "put", "open_gripper"});
  CHECK(p.steps[7].params.targets[0].label == "plate");
  // the cup goes back where it came from
  CHECK(std::get<Point2>(p.steps[8].params.targets[0].position) == Point2(500, 100));
}

TEST_CASE("lift and turn with units") {
  const auto p = plan_rule_based(state_for("grab the cup and lift up for 10 cm then turn it for 90 degrees", {{100, 100}}));
  CHECK(p.action_names() == std::vector<std::string>{"open_gripper", "pick", "close_gripper", "move_z", "rotate"});
  CHECK(*p.steps[3].params.distance == doctest::Approx(0.1));
  CHECK(*p.steps[4].params.angle == 90.0);
  const auto mm = plan_rule_based(state_for("grab the cup and lift it up for 50 mm", {{100, 100}}));
  CHECK(*mm.steps[3].params.distance == doctest::Approx(0.05));
  const auto down = plan_rule_based(state_for("grab the cup and lower it by 2 cm", {{100, 100}}));
  CHECK(*down.steps[3].params.distance == doctest::Approx(-0.02));
}

TEST_CASE("swap goes through the staging spot and ends with both exchanged") {
  const auto s = state_for("swap the apple and the cup", {{100, 100}, {500, 100}});
  const auto p = plan_rule_based(s);
  CHECK(validate_policy(p, s).ok());
  const auto out = execute_symbolically(p, {{"apple", Point2(100, 100)}, {"cup", Point2(500, 100)}});
  CHECK(out.errors.empty());
  CHECK(out.placed.at("apple") == Point2(500, 100));
  CHECK(out.placed.at("cup") == Point2(100, 100));
}

TEST_CASE("symbolic execution of a put") {
  const auto p = plan_rule_based(state_for("put this there", {{100, 100}, {400, 400}}));
  const auto out = execute_symbolically(p, {{"mug", Point2(100, 100)}, {"tray", Point2(300, 300)}});
  CHECK(out.errors.empty());
  CHECK(out.placed.at("mug") == Point2(400, 400));
  CHECK(out.placed.at("tray") == Point2(300, 300));
  const auto miss = execute_symbolically(p, {{"mug", Point2(9, 9)}});
  CHECK_FALSE(miss.errors.empty());
}

TEST_CASE("unsupported commands") {
  CHECK_CODE(plan_rule_based(state_for("this", {{1, 1}})), ErrorCode::UnsupportedCommand);
  auto s = state_for("pick up this", {{1, 1}});
  s.referred.clear();
  CHECK_CODE(plan_rule_based(s), ErrorCode::UnsupportedCommand);
}

TEST_CASE("out-of-workspace plans are rejected") {
  auto s = state_for("put this on that", {{1000, 100}, {100, 100}});
  s.workspace.image_bounds = {0, 0, 640, 720};
  CHECK_CODE(plan_rule_based(s), ErrorCode::PolicyValidationError);
}

TEST_CASE("planner variables round trip") {
  const auto s = state_for("put this on that then pour something from this on it", {{1, 1}, {2, 2}, {3, 3}, {2, 2}});
  const auto vars = plan_variables(s);
  for (const char* k : {"command", "referred", "transcript", "words", "workspace", "primitives"}) CHECK(vars.count(k) == 1);
  const auto back = planner_state_from_variables(vars);
  CHECK(plan_rule_based(back) == plan_rule_based(s));
  auto broken = vars;
  broken["referred"] = "[";
  CHECK_CODE(planner_state_from_variables(broken), ErrorCode::MalformedAgentOutput);
  CHECK_NOTHROW(render_prompt(kPlanTemplate, vars));
}

TEST_CASE("remote planning") {
  const auto s = state_for("pick up this", {{100, 100}});
  auto mock = std::make_shared<MockAgent>();
  PlannerConfig cfg;
  cfg.mode = AgentMode::Remote;
  cfg.agent = mock;
  mock->add_wildcard(std::string(kPlanTemplate), "```json\n" + serialize_steps(plan_rule_based(s)) + "\n```");
  const auto p = plan(s, cfg);
  CHECK(p.provenance == Provenance::Remote);
  CHECK(p.steps == plan_rule_based(s).steps);

  auto prose = std::make_shared<MockAgent>();
  prose->add_wildcard(std::string(kPlanTemplate), "First I would open the gripper.");
  cfg.agent = prose;
  CHECK_CODE(plan(s, cfg), ErrorCode::MalformedAgentOutput);

  auto bad = std::make_shared<MockAgent>();
  bad->add_wildcard(std::string(kPlanTemplate), R"([["pick",{"label":"x","position":[1,1]}]])");
  cfg.agent = bad;
  CHECK_CODE(plan(s, cfg), ErrorCode::PolicyValidationError);

  cfg.agent = std::make_shared<MockAgent>();
  CHECK_CODE(plan(s, cfg), ErrorCode::RemoteAgentError);
}

TEST_CASE("primitive reference lists every primitive") {
  const auto ref = primitive_reference();
  for (Primitive p : all_primitives()) CHECK(ref.find(std::string(name_of(p))) != std::string::npos);
}

}  // TEST_SUITE
