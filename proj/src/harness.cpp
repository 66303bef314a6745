#include "gazeintent/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gazeintent/error.hpp"
#include "gazeintent/planner.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

using nlohmann::json;

std::string_view to_string(AgentChoice a) noexcept {
  switch (a) {
    case AgentChoice::Mock: return "mock";
    case AgentChoice::Remote: return "remote";
    case AgentChoice::Rule: return "rule";
  }
  return "?";
}

std::optional<AgentChoice> agent_choice_from(std::string_view text) noexcept {
  if (text == "mock") return AgentChoice::Mock;
  if (text == "remote") return AgentChoice::Remote;
  if (text == "rule") return AgentChoice::Rule;
  return std::nullopt;
}

bool RunResult::expectation_met(const Scenario& s) const {
  if (s.expected.failure_stage) return failure_stage == s.expected.failure_stage;
  return success;
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Salts separating the random streams of one run.
constexpr std::uint64_t kGazeStream = 0x67617a65;
constexpr std::uint64_t kMatchStream = 0x6d617463;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

FailureStage interpret_stage(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoTargetFound:
    case ErrorCode::WordNotFound:
    case ErrorCode::InvalidTranscript:
      return FailureStage::Input;
    default:
      // agent replies that cannot be used count as reasoning failures
      return FailureStage::Planning;
  }
}

struct StageFailure {
  FailureStage stage;
  std::string message;
};

}  // namespace

std::uint64_t run_seed(const Scenario& s, std::uint64_t cli_seed, double sigma_cm, std::uint64_t trial) {
  const std::uint64_t base = derive_seed(cli_seed, fnv1a(s.id), s.seed);
  return derive_seed(base, std::bit_cast<std::uint64_t>(sigma_cm), trial);
}

std::shared_ptr<AgentGateway> make_gateway(const Scenario& s, const RunConfig& cfg) {
  std::shared_ptr<AgentGateway> gw = cfg.gateway;
  if (!gw) {
    switch (cfg.agent) {
      case AgentChoice::Rule:
        return nullptr;
      case AgentChoice::Remote: {
        RemoteAgentConfig rc = cfg.remote.value_or(RemoteAgentConfig::from_env());
        rc.retry.jitter_seed = run_seed(s, cfg.seed, 0.0, 0);
        gw = std::make_shared<RemoteAgent>(rc, cfg.transport ? cfg.transport : std::make_shared<HttpTransport>());
        break;
      }
      case AgentChoice::Mock: {
        auto mock = std::make_shared<MockAgent>();
        for (const CannedResponse& c : s.agent_responses) {
          if (c.variables) {
            AgentRequest req;
            req.prompt_template_id = c.template_id;
            req.variables = *c.variables;
            mock->add(req, c.text);
          } else {
            mock->add_wildcard(c.template_id, c.text);
          }
        }
        mock->set_responder([](const AgentRequest& req) -> std::optional<std::string> {
          try {
            if (req.prompt_template_id == kInterpretTemplate) {
              const json doc = {{"text", req.variables.at("transcript")},
                                {"words", json::parse(req.variables.at("words"))}};
              return serialize_o1(interpret_rule_based(transcript_from_json(doc)));
            }
            if (req.prompt_template_id == kPlanTemplate) {
              return serialize_steps(plan_rule_based(planner_state_from_variables(req.variables)));
            }
          } catch (const std::exception&) {
          }
          return std::nullopt;
        });
        gw = mock;
        break;
      }
    }
  }
  if (cfg.journal) gw = std::make_shared<JournalingAgent>(gw, cfg.journal);
  return gw;
}

double gaze_error_cm(const GazeTrace& trace, const Point2& anchor_px, double px_per_cm) {
  return (weighted_gaze_point(trace) - anchor_px).norm() / px_per_cm;
}

double sigma_for_mean_error(double mean_error_cm) {
  return mean_error_cm / std::sqrt(std::numbers::pi / 2.0);
}

RunResult run_scenario(const Scenario& s, const RunConfig& cfg, std::uint64_t trial) {
  RunResult r;
  r.scenario_id = s.id;
  r.trial = trial;
  r.sigma_cm = cfg.sigma_cm.value_or(s.noise.gaze_sigma_cm);
  const std::uint64_t seed = run_seed(s, cfg.seed, r.sigma_cm, trial);
  for (const ExpectedSlot& e : s.expected.slots) {
    SlotResult sr;
    sr.expected_human = e.human;
    sr.expected_robot = e.robot;
    r.slots.push_back(std::move(sr));
  }

  const auto fail = [&](FailureStage stage, const std::string& msg) {
    r.failure_stage = stage;
    r.diagnostic = msg;
    return r;
  };

  std::shared_ptr<AgentGateway> gateway;
  try {
    gateway = make_gateway(s, cfg);
  } catch (const Error& e) {
    return fail(FailureStage::Planning, e.what());
  }
  const AgentMode mode = gateway ? AgentMode::Remote : AgentMode::RuleBased;
  const std::string model = cfg.remote ? cfg.remote->model_id : std::string(kDefaultModel);

  // 1. command interpretation
  auto t0 = std::chrono::steady_clock::now();
  InterpretedCommand cmd;
  try {
    InterpreterConfig ic;
    ic.mode = mode;
    ic.padding = s.padding_s;
    ic.agent = gateway;
    ic.model_id = model;
    cmd = interpret(s.human.transcript, ic);
  } catch (const Error& e) {
    return fail(interpret_stage(e.code()), e.what());
  }
  r.timings.interpret_ms = ms_since(t0);
  if (cmd.slots.size() != s.expected.slots.size()) {
    r.slots.resize(std::max(r.slots.size(), cmd.slots.size()));
    for (std::size_t i = 0; i < cmd.slots.size(); ++i) r.slots[i].slot = cmd.slots[i];
    return fail(FailureStage::Input, "command has " + std::to_string(cmd.slots.size()) + " slots, expected " +
                                         std::to_string(s.expected.slots.size()));
  }

  const double sigma_px = r.sigma_cm * s.noise.px_per_cm;
  std::vector<ReferredObject> referred;
  for (std::size_t i = 0; i < cmd.slots.size(); ++i) {
    SlotResult& sr = r.slots[i];
    sr.slot = cmd.slots[i];
    const std::string tag = "slot " + std::to_string(i) + " ('" + sr.slot.source_word + "'): ";

    // 2. gaze window and reprojection onto the window-start image
    t0 = std::chrono::steady_clock::now();
    try {
      const auto records = gaze_window(s.human.gaze_stream, sr.slot.interval);
      const Pose& start = records.front().head_pose;
      for (const GazeRecord& g : records) {
        sr.trace.points.push_back(
            reproject_gaze(g.gaze_pupil, s.camera_from_pupil, start, g.head_pose, s.human_scene.intrinsics));
      }
    } catch (const Error& e) {
      return fail(FailureStage::Input, tag + e.what());
    }
    if (sigma_px > 0) {
      Rng rng(derive_seed(seed, kGazeStream, i));
      const double ex = rng.normal(0.0, sigma_px);
      const double ey = rng.normal(0.0, sigma_px);
      for (Point2& p : sr.trace.points) p += Point2(ex, ey);
    }
    if (const AnnotatedObject* target = s.human_scene.find(sr.expected_human)) {
      sr.gaze_error_cm = gaze_error_cm(sr.trace, target->anchor_px.value_or(target->bbox.midpoint()),
                                       s.noise.px_per_cm);
    }

    // 3. human-view observation and fusion
    const TargetQuery query{sr.slot.property, sr.slot.category};
    SceneObservationSet human_objects;
    try {
      human_objects = observe(s.human_scene, query, View::Human);
    } catch (const Error& e) {
      return fail(FailureStage::Observation, tag + "human view: " + e.what());
    }
    try {
      sr.fusion = fuse(sr.trace, human_objects);
    } catch (const Error& e) {
      return fail(FailureStage::Fusion, tag + e.what());
    }
    r.timings.fusion_ms += ms_since(t0);
    const std::string& picked = sr.fusion->selected.observation.id();
    if (picked != sr.expected_human) {
      return fail(FailureStage::Fusion, tag + "gaze selected '" + picked + "', expected '" + sr.expected_human + "'");
    }

    // 4. robot-view observation and multi-view alignment
    t0 = std::chrono::steady_clock::now();
    SceneObservationSet robot_objects;
    try {
      robot_objects = observe(s.robot_scene, query, View::Robot);
    } catch (const Error& e) {
      return fail(FailureStage::Observation, tag + "robot view: " + e.what());
    }
    const ObjectObservation* truth = nullptr;
    if (const auto it = s.correspondence.find(picked); it != s.correspondence.end()) {
      truth = robot_objects.find(it->second);
    }
    const MatchSet matches = synth_matches(sr.fusion->selected.observation, s.human_scene.intrinsics, truth,
                                           s.robot_scene.intrinsics, s.matcher, derive_seed(seed, kMatchStream, i));
    try {
      sr.alignment = align(matches, robot_objects, s.alignment);
    } catch (const Error& e) {
      return fail(FailureStage::Alignment, tag + e.what());
    }
    r.timings.alignment_ms += ms_since(t0);
    const std::string& aligned = sr.alignment->referred.observation.id();
    if (aligned != sr.expected_robot) {
      return fail(FailureStage::Alignment, tag + "aligned to '" + aligned + "', expected '" + sr.expected_robot + "'");
    }
    sr.correct = true;
    referred.push_back(sr.alignment->referred);
  }

  // 5. policy generation and validation
  t0 = std::chrono::steady_clock::now();
  try {
    PlannerState state{referred, cmd, s.workspace};
    PlannerConfig pc;
    pc.mode = mode;
    pc.agent = gateway;
    pc.model_id = model;
    r.policy = plan(state, pc);
  } catch (const Error& e) {
    return fail(FailureStage::Planning, e.what());
  }
  r.timings.planning_ms = ms_since(t0);
  const auto names = r.policy->action_names();
  if (!s.expected.actions.empty() && names != s.expected.actions) {
    std::string got;
    for (const auto& n : names) got += (got.empty() ? "" : ",") + n;
    return fail(FailureStage::Planning, "policy actions [" + got + "] differ from the expected ones");
  }
  if (s.expected.policy && steps_json(*r.policy).dump() != s.expected.policy->dump()) {
    return fail(FailureStage::Planning, "policy differs from the expected one: " + serialize_steps(*r.policy));
  }
  if (s.expected.template_id) {
    try {
      complexity(*s.expected.template_id, *r.policy);
    } catch (const Error& e) {
      return fail(FailureStage::Planning, e.what());
    }
  }
  r.success = true;
  return r;
}

Metrics success_rate(const std::vector<RunResult>& results) {
  Metrics m;
  m.total = static_cast<long>(results.size());
  std::vector<double> errors;
  for (const RunResult& r : results) {
    if (r.success) ++m.correct;
    for (const SlotResult& s : r.slots) {
      if (s.gaze_error_cm) errors.push_back(*s.gaze_error_cm);
    }
  }
  m.success_rate = m.total ? 100.0 * static_cast<double>(m.correct) / static_cast<double>(m.total) : 0.0;
  if (!errors.empty()) {
    double sum = 0;
    for (double e : errors) sum += e;
    m.mean_gaze_error_cm = sum / static_cast<double>(errors.size());
    if (errors.size() > 1) {
      double ss = 0;
      for (double e : errors) ss += (e - m.mean_gaze_error_cm) * (e - m.mean_gaze_error_cm);
      m.sd_gaze_error_cm = std::sqrt(ss / static_cast<double>(errors.size() - 1));
    }
  }
  return m;
}

const std::vector<ComplexityRow>& complexity_table() {
  // counts as listed in the task table; the action column is taken as given
  static const std::vector<ComplexityRow> rows = {
      {"pick_object", "pick up the <object>", true, 1, 1, 0, {"pick"}},
      {"grab_pieces", "grab the pieces", true, 1, 1, 0, {"pick"}},
      {"put_on_plate", "put the <object> on the <plate>", true, 2, 3, 0, {"pick", "put"}},
      {"put_then_pour", "put the <object> on the <plate> then pour some thing from the <cup> on it", true, 4, 6, 0,
       {"pick", "put", "pour"}},
      {"put_there", "put this <object> <there>", true, 2, 3, 0, {"pick", "put"}},
      {"put_two_on_plate", "put the <object1> and <object2> on the <plate>", true, 3, 6, 0, {"pick", "put"}},
      {"put_then_put", "put the <object1> on the <plate1> then put the <object2> on the <plate2>", true, 4, 6, 0,
       {"pick", "put"}},
      {"grab_lift_turn", "grab the <object> and lift up for <distance> then turn it for <angle> degrees", true, 3,
       3, 2, {"pick", "move_z", "rotate"}},
      {"pick_this", "pick up this", false, 1, 1, 0, {"pick"}},
      {"grab_this", "grab this", false, 1, 1, 0, {"pick"}},
      {"put_this_on_that", "put this on that", false, 2, 3, 0, {"pick", "put"}},
      {"put_this_then_pour", "put this on that then pour something from this on it", false, 4, 6, 0,
       {"pick", "put", "pour"}},
      {"put_this_there", "put this <there>", false, 2, 3, 0, {"pick", "put"}},
      {"put_this_and_this_on_that", "put this and this on that", false, 3, 6, 0, {"pick", "put"}},
      {"put_this_then_put", "put this on this then put this on that", false, 4, 6, 0, {"pick", "put"}},
      {"grab_this_lift_turn", "grab this and lift it up for <distance> then turn it for <angle> degrees", false, 3,
       3, 2, {"pick", "move_z", "rotate"}},
  };
  return rows;
}

const ComplexityRow* find_complexity_row(std::string_view id) noexcept {
  for (const ComplexityRow& row : complexity_table()) {
    if (row.id == id) return &row;
  }
  return nullptr;
}

int complexity(std::string_view template_id, const Policy& policy) {
  const ComplexityRow* row = find_complexity_row(template_id);
  if (!row) throw Error(ErrorCode::UnknownTemplate, "no complexity entry for '" + std::string(template_id) + "'");
  const auto names = policy.action_names();
  for (const std::string& need : row->required) {
    if (std::find(names.begin(), names.end(), need) == names.end()) {
      throw Error(ErrorCode::PolicyValidationError,
                  "policy for '" + row->id + "' has no '" + need + "' step");
    }
  }
  return row->complexity();
}

namespace {

std::vector<RunResult> monte_carlo_impl(const Scenario& s, long trials, const std::vector<double>& sigmas,
                                        const RunConfig& cfg, bool parallel) {
  if (trials < 1) throw Error(ErrorCode::ScenarioInvalid, "trials must be >= 1");
  const std::vector<double> sweep = sigmas.empty() ? std::vector<double>{s.noise.gaze_sigma_cm} : sigmas;
  const long total = trials * static_cast<long>(sweep.size());
  std::vector<RunResult> out(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (long k = 0; k < total; ++k) {
    RunConfig c = cfg;
    c.sigma_cm = sweep[static_cast<std::size_t>(k / trials)];
    out[static_cast<std::size_t>(k)] = run_scenario(s, c, static_cast<std::uint64_t>(k % trials));
  }
  return out;
}

}  // namespace

std::vector<RunResult> monte_carlo(const Scenario& s, long trials, const std::vector<double>& sigmas_cm,
                                   const RunConfig& cfg) {
  return monte_carlo_impl(s, trials, sigmas_cm, cfg, true);
}

std::vector<RunResult> monte_carlo_serial(const Scenario& s, long trials, const std::vector<double>& sigmas_cm,
                                          const RunConfig& cfg) {
  return monte_carlo_impl(s, trials, sigmas_cm, cfg, false);
}

std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios, const RunConfig& cfg) {
  std::vector<RunResult> out(scenarios.size());
  const long n = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_scenario(scenarios[static_cast<std::size_t>(i)], cfg);
  return out;
}

void write_csv(std::ostream& out, std::vector<RunResult> results) {
  std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
    if (a.sigma_cm != b.sigma_cm) return a.sigma_cm < b.sigma_cm;
    return a.trial < b.trial;
  });
  out << "scenario_id,trial,slot,selected_id,expected_id,success,gaze_error_cm,stage\n";
  char err[64];
  for (const RunResult& r : results) {
    const std::string stage = r.failure_stage ? std::string(to_string(*r.failure_stage)) : "ok";
    const std::size_t rows = std::max<std::size_t>(r.slots.size(), 1);
    for (std::size_t i = 0; i < rows; ++i) {
      std::string selected, expected, error;
      if (i < r.slots.size()) {
        const SlotResult& s = r.slots[i];
        if (s.fusion) selected = s.fusion->selected.observation.id();
        expected = s.expected_human;
        if (s.gaze_error_cm) {
          std::snprintf(err, sizeof err, "%.6f", *s.gaze_error_cm);
          error = err;
        }
      }
      out << r.scenario_id << ',' << r.trial << ',' << i << ',' << selected << ',' << expected << ','
          << (r.success ? 1 : 0) << ',' << error << ',' << stage << '\n';
    }
  }
}

std::string csv_string(const std::vector<RunResult>& results) {
  std::ostringstream out;
  write_csv(out, results);
  return out.str();
}

json to_json(const RunResult& r) {
  json slots = json::array();
  for (const SlotResult& s : r.slots) {
    json j = {{"word", s.slot.source_word},
              {"property", std::string(to_string(s.slot.property))},
              {"category", s.slot.category},
              {"interval", {s.slot.interval.start, s.slot.interval.end}},
              {"gaze_points", s.trace.points.size()},
              {"expected_human", s.expected_human},
              {"expected_robot", s.expected_robot},
              {"correct", s.correct}};
    j["selected_human"] = s.fusion ? json(s.fusion->selected.observation.id()) : json(nullptr);
    j["fusion_margin_px"] = s.fusion ? json(s.fusion->margin) : json(nullptr);
    j["selected_robot"] = s.alignment ? json(s.alignment->referred.observation.id()) : json(nullptr);
    j["alignment_margin"] = s.alignment ? json(s.alignment->margin) : json(nullptr);
    j["gaze_error_cm"] = s.gaze_error_cm ? json(*s.gaze_error_cm) : json(nullptr);
    slots.push_back(std::move(j));
  }
  return {{"scenario_id", r.scenario_id},
          {"trial", r.trial},
          {"sigma_cm", r.sigma_cm},
          {"success", r.success},
          {"failure_stage", r.failure_stage ? json(std::string(to_string(*r.failure_stage))) : json(nullptr)},
          {"diagnostic", r.diagnostic},
          {"slots", slots},
          {"policy", r.policy ? steps_json(*r.policy) : json(nullptr)}};
}

}  // namespace gazeintent
