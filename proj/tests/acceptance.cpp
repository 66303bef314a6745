// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gazeintent/alignment.hpp"
#include "gazeintent/fusion.hpp"
#include "gazeintent/geometry.hpp"
#include "gazeintent/harness.hpp"
#include "gazeintent/planner.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gazeintent;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first few problems and flips the outcome.
struct Tally {
  Outcome out;
  int shown = 0;
  void fail(const std::string& why) {
    out.pass = false;
    if (shown++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + why;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::filesystem::path> files_in(const std::string& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(testing::scenario_path(dir)))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Scenario> load_all(const std::vector<std::string>& dirs) {
  std::vector<Scenario> out;
  for (const auto& d : dirs)
    for (const auto& p : files_in(d)) out.push_back(load_scenario(p));
  return out;
}

// ---- 1 ---------------------------------------------------------------------

Outcome fusion_vs_brute_force() {
  Tally t;
  Rng rng(1001);
  const auto t0 = Clock::now();
  for (int inst = 0; inst < 1000; ++inst) {
    const int n_pts = 1 + static_cast<int>(rng.uniform() * 40);
    const int n_obj = 1 + static_cast<int>(rng.uniform() * (inst % 50 == 0 ? 3000 : 60));
    GazeTrace trace;
    std::vector<oracle::Vec2> g;
    for (int i = 0; i < n_pts; ++i) {
      trace.points.emplace_back(rng.uniform(0, 1408), rng.uniform(0, 1408));
      g.push_back({trace.points.back().x(), trace.points.back().y()});
    }
    // a few instances with duplicated positions force the tie-break
    const bool dup = inst % 10 == 0;
    SceneObservationSet scene;
    std::vector<oracle::Obj> objs;
    for (int i = 0; i < n_obj; ++i) {
      double x = rng.uniform(2, 1400), y = rng.uniform(2, 1400);
      if (dup && i % 2 == 1) x = objs.back().x, y = objs.back().y;
      const std::string id = "obj" + std::to_string(static_cast<long>(rng.uniform() * 1e7));
      scene.objects.emplace_back(id, BBox{x - 2, y - 2, x + 2, y + 2});
      objs.push_back({id, scene.objects.back().position().x(), scene.objects.back().position().y()});
    }
    const auto got = fuse(trace, scene);
    const auto& want = objs[oracle::fuse(g, objs)].id;
    t.expect(got.selected.observation.id() == want,
             "instance " + std::to_string(inst) + ": " + got.selected.observation.id() + " != " + want);
  }
  const double secs = seconds_since(t0);
  t.expect(secs < 5.0, "took " + fmt("%.2f", secs) + " s");
  if (t.out.pass) t.out.detail = "1000 instances, " + fmt("%.2f", secs) + " s";
  return t.out;
}

// ---- 2 ---------------------------------------------------------------------

Outcome decay_schedule() {
  Tally t;
  for (long n = 0; n <= 50; ++n)
    t.expect(std::abs(alpha_for(n) - oracle::alpha(n)) <= 1e-15,
             "alpha_for(" + std::to_string(n) + ") = " + fmt("%.17g", alpha_for(n)));
  const auto w = normalized_weights(2);
  t.expect(w.size() == 3, "N=2 gives " + std::to_string(w.size()) + " weights");
  for (double x : w) t.expect(std::abs(x - 1.0 / 3.0) <= 1e-12, "N=2 weight " + fmt("%.17g", x));
  if (t.out.pass) t.out.detail = "N in 0..50; N=2 weights uniform to 1e-12";
  return t.out;
}

// ---- 3 ---------------------------------------------------------------------

Outcome alignment_vs_brute_force() {
  Tally t;
  Rng rng(3003);
  long edge_hits = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    SceneObservationSet scene;
    scene.view = View::Robot;
    scene.intrinsics = {900, 900, 640, 360, 1280, 720};
    std::vector<oracle::Region> regions;
    const int n_obj = 1 + static_cast<int>(rng.uniform() * 10);
    for (int i = 0; i < n_obj; ++i) {
      const double x0 = std::floor(rng.uniform(0, 100)), y0 = std::floor(rng.uniform(0, 100));
      const double x1 = x0 + std::floor(rng.uniform(0, 30)), y1 = y0 + std::floor(rng.uniform(0, 30));
      const std::string id = "r" + std::to_string(static_cast<int>(rng.uniform() * 50));
      oracle::Region reg{id, x0, y0, x1, y1};
      std::optional<Mask> mask;
      if (rng.uniform() < 0.25) {
        std::vector<std::uint8_t> bits(140 * 140);
        for (auto& b : bits) b = rng.uniform() < 0.5;
        reg.w = reg.h = 140;
        reg.mask = bits;
        mask = Mask(140, 140, bits);
      }
      scene.objects.emplace_back(id, BBox{x0, y0, x1, y1}, mask);
      regions.push_back(reg);
    }
    MatchSet m;
    std::vector<oracle::Vec2> pts;
    const int n_pts = static_cast<int>(rng.uniform() * (inst % 25 == 0 ? 2000 : 80));
    for (int i = 0; i < n_pts; ++i) {
      // most points sit on integer coordinates, so many land on box edges
      double x = rng.uniform() < 0.8 ? std::floor(rng.uniform(0, 140)) : rng.uniform(0, 140);
      double y = rng.uniform() < 0.8 ? std::floor(rng.uniform(0, 140)) : rng.uniform(0, 140);
      // and some are put right on a box border
      if (rng.uniform() < 0.2) {
        const auto& r = regions[static_cast<std::size_t>(rng.uniform() * static_cast<double>(regions.size()))];
        if (rng.uniform() < 0.5) {
          x = rng.uniform() < 0.5 ? r.x0 : r.x1;
          y = rng.uniform(r.y0, r.y1);
        } else {
          y = rng.uniform() < 0.5 ? r.y0 : r.y1;
          x = rng.uniform(r.x0, r.x1);
        }
      }
      m.matches.push_back({Point2(0, 0), Point2(x, y), 1.0});
      pts.push_back({x, y});
      for (const auto& r : regions)
        if (r.mask.empty() && (x == r.x0 || x == r.x1 || y == r.y0 || y == r.y1) && oracle::inside(r, x, y)) ++edge_hits;
    }
    const auto [counts, best] = oracle::align(pts, regions);
    const std::string tag = "instance " + std::to_string(inst);
    try {
      const auto got = align(m, scene);
      t.expect(best >= 0, tag + ": expected NoCorrespondence");
      if (best >= 0)
        t.expect(got.referred.observation.id() == regions[static_cast<std::size_t>(best)].id,
                 tag + ": " + got.referred.observation.id());
      for (std::size_t i = 0; i < counts.size(); ++i)
        t.expect(got.counts[i].count == counts[i], tag + ": count mismatch on " + regions[i].id);
    } catch (const Error& e) {
      t.expect(best < 0 && e.code() == ErrorCode::NoCorrespondence, tag + ": " + e.what());
    }
  }
  t.expect(edge_hits > 1000, "only " + std::to_string(edge_hits) + " edge hits exercised");
  if (t.out.pass) t.out.detail = "1000 instances, " + std::to_string(edge_hits) + " edge hits";
  return t.out;
}

// ---- 4 ---------------------------------------------------------------------

Outcome geometry() {
  Tally t;
  Rng rng(4004);
  const auto kR = FrameId::fixed(FrameName::RobotBase);
  const auto kC = FrameId::fixed(FrameName::RobotCamera);
  const auto kS = FrameId::fixed(FrameName::SlamWorld);
  const auto kGp = FrameId::fixed(FrameName::GlassesPupil);
  const auto kGc = FrameId::fixed(FrameName::GlassesCamera);
  double worst_rt = 0, worst_px = 0, worst_static = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testing::to_pose(testing::random_raw_pose(rng), kC, kR);
    const Pose q = testing::to_pose(testing::random_raw_pose(rng), kGc, kC);
    const Eigen::Matrix4d rt1 = compose(p, invert(p)).matrix() - Eigen::Matrix4d::Identity();
    const Eigen::Matrix4d rt2 = compose(compose(p, q), invert(q)).matrix() - p.matrix();
    worst_rt = std::max({worst_rt, rt1.cwiseAbs().maxCoeff(), rt2.cwiseAbs().maxCoeff()});
  }
  const Intrinsics k{610, 610, 704, 704, 1408, 1408};
  int chains = 0;
  while (chains < 1000) {
    const auto a = testing::random_raw_pose(rng, 0.05);
    const auto b = testing::random_raw_pose(rng, 0.05);
    const auto c = testing::random_raw_pose(rng, 0.02);
    const oracle::Vec3 g{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-1.5, 1.5)};
    const oracle::Mat4 chain =
        oracle::mul(oracle::mul(oracle::inverse(testing::to_mat4(a)), testing::to_mat4(b)), testing::to_mat4(c));
    const oracle::Vec3 cam = oracle::apply(chain, g);
    if (cam[2] < 0.05) continue;
    const auto want = oracle::project(k.fx, k.fy, k.cx, k.cy, cam);
    const Point2 got = reproject_gaze(Point3(g[0], g[1], g[2]), testing::to_pose(c, kGp, kGc),
                                      testing::to_pose(a, FrameId::at(FrameName::GlassesCamera, 1.0), kS),
                                      testing::to_pose(b, FrameId::at(FrameName::GlassesCamera, 1.2), kS), k);
    worst_px = std::max({worst_px, std::abs(got.x() - want[0]), std::abs(got.y() - want[1])});

    // the same head pose at both instants must drop out of the chain
    const Pose head_i = testing::to_pose(a, FrameId::at(FrameName::GlassesCamera, 1.0), kS);
    const Pose head_n = testing::to_pose(a, FrameId::at(FrameName::GlassesCamera, 1.2), kS);
    const Pose calib = testing::to_pose(c, kGp, kGc);
    const Point3 gp(g[0], g[1], std::abs(g[2]) + 0.3);
    const Point3 in_cam = transform_point(calib, gp);
    if (in_cam.z() > 0.05) {
      const Point2 st = reproject_gaze(gp, calib, head_i, head_n, k);
      worst_static = std::max(worst_static, (st - project(k, in_cam)).cwiseAbs().maxCoeff());
    }
    ++chains;
  }
  t.expect(worst_rt <= 1e-9, "round trip error " + fmt("%.3g", worst_rt));
  t.expect(worst_px <= 1e-9, "reprojection error " + fmt("%.3g", worst_px) + " px");
  t.expect(worst_static <= 1e-9, "static head residual " + fmt("%.3g", worst_static) + " px");
  if (t.out.pass)
    t.out.detail = "round trip " + fmt("%.1e", worst_rt) + ", 1000 chains " + fmt("%.1e", worst_px) + " px, static " +
                   fmt("%.1e", worst_static) + " px";
  return t.out;
}

// ---- 5 ---------------------------------------------------------------------

Outcome policies() {
  Tally t;
  const Scenario apple = load_scenario(testing::scenario_path("apple_put_there.json"));
  const auto r = run_scenario(apple, RunConfig{});
  // written out by hand from the worked example
  const std::string want = json::parse(R"([
      ["open_gripper", {}],
      ["pick", {"label": "apple", "position": [865.0, 472.5]}],
      ["close_gripper", {}],
      ["put", {"label": "table", "position": [257.5, 360.0]}],
      ["open_gripper", {}]])").dump();
  if (!r.policy) {
    t.fail("apple: no policy (" + r.diagnostic + ")");
  } else {
    const std::string got = json::parse(serialize_steps(*r.policy)).dump();
    t.expect(got == want, "apple policy " + got);
  }
  int clean = 0;
  for (const auto& s : load_all({"table2"})) {
    RunConfig cfg;
    const auto res = run_scenario(s, cfg);
    if (!res.policy) {
      t.fail(s.id + ": " + res.diagnostic);
      continue;
    }
    const auto report = validate_policy(*res.policy, s.workspace);
    t.expect(report.ok(), s.id + ": " + report.summary());
    clean += report.ok() && res.success;
    t.expect(res.success, s.id + ": " + res.diagnostic);
  }
  t.expect(clean == 16, std::to_string(clean) + "/16 templates clean");
  if (t.out.pass) t.out.detail = "apple policy byte-identical; 16/16 templates without violations";
  return t.out;
}

// ---- 6 ---------------------------------------------------------------------

Outcome complexity_rows() {
  Tally t;
  struct Row {
    const char* id;
    int params, actions, complexity;
  };
  // parameters, actions and complexity as tabulated for the sixteen templates
  const Row rows[] = {{"pick_object", 1, 1, 2},       {"grab_pieces", 1, 1, 2},
                      {"put_on_plate", 2, 3, 5},      {"put_then_pour", 4, 6, 10},
                      {"put_there", 2, 3, 5},         {"put_two_on_plate", 3, 6, 9},
                      {"put_then_put", 4, 6, 10},     {"grab_lift_turn", 3, 3, 6},
                      {"pick_this", 1, 1, 2},         {"grab_this", 1, 1, 2},
                      {"put_this_on_that", 2, 3, 5},  {"put_this_then_pour", 4, 6, 10},
                      {"put_this_there", 2, 3, 5},    {"put_this_and_this_on_that", 3, 6, 9},
                      {"put_this_then_put", 4, 6, 10}, {"grab_this_lift_turn", 3, 3, 6}};
  std::map<std::string, Policy> planned;
  for (const auto& s : load_all({"table2"})) {
    const auto r = run_scenario(s, RunConfig{});
    if (r.policy && s.expected.template_id) planned[*s.expected.template_id] = *r.policy;
  }
  int matched = 0;
  for (const Row& row : rows) {
    const ComplexityRow* c = find_complexity_row(row.id);
    if (!c) {
      t.fail(std::string(row.id) + " missing");
      continue;
    }
    bool ok = c->params == row.params && c->actions == row.actions && c->complexity() == row.complexity;
    const auto it = planned.find(row.id);
    if (it == planned.end()) {
      ok = false;
    } else {
      try {
        ok = ok && complexity(row.id, it->second) == row.complexity;
      } catch (const Error& e) {
        ok = false;
        t.fail(std::string(row.id) + ": " + e.what());
      }
    }
    t.expect(ok, std::string(row.id) + " does not reproduce");
    matched += ok;
  }
  t.expect(complexity_table().size() == 16, "table has " + std::to_string(complexity_table().size()) + " rows");
  if (t.out.pass) t.out.detail = std::to_string(matched) + "/16 rows";
  return t.out;
}

// ---- 7 ---------------------------------------------------------------------

// Success probability of nearest-neighbour selection on the pawn grid for
// the expected pawn, from the scenario's own geometry.
double pawn_oracle(const Scenario& s, double sigma_cm) {
  const auto* p0 = s.human_scene.find("h_pawn_0");
  const auto* p1 = s.human_scene.find("h_pawn_1");
  const double spacing = std::abs(p1->bbox.midpoint().x() - p0->bbox.midpoint().x());
  const std::string& target = s.expected.slots.at(0).human;
  const int idx = std::stoi(target.substr(target.rfind('_') + 1));
  return oracle::grid_keep_probability(idx % 3, idx / 3, 3, 3, spacing, sigma_cm * s.noise.px_per_cm);
}

Outcome s1_monte_carlo() {
  Tally t;
  const Scenario centre = load_scenario(testing::scenario_path("s1_pawns.json"));
  RunConfig cfg;
  cfg.seed = 0;
  const auto t0 = Clock::now();
  const auto runs = monte_carlo(centre, 10000, {0.62}, cfg);
  const double secs = seconds_since(t0);
  const auto m = success_rate(runs);
  const double want = 100.0 * pawn_oracle(centre, 0.62);
  t.expect(std::abs(m.success_rate - want) <= 1.0,
           "sigma 0.62: " + fmt("%.2f", m.success_rate) + "% vs oracle " + fmt("%.2f", want) + "%");
  t.expect(secs < 30.0, "took " + fmt("%.1f", secs) + " s");
  std::string detail = "sigma 0.62: " + fmt("%.2f", m.success_rate) + "% vs " + fmt("%.2f", want) + "% in " +
                       fmt("%.1f", secs) + " s";

  // 0.62 cm sits far inside a pawn cell, so the oracle is ~100% there; wider
  // noise and off-centre pawns keep the comparison from being trivial.
  for (const auto& [file, sigma] : std::vector<std::pair<std::string, double>>{
           {"s1_pawns.json", 4.0}, {"s1_pawns_corner.json", 6.0}, {"s1_pawns_edge.json", 5.0}}) {
    const Scenario s = load_scenario(testing::scenario_path(file));
    const auto rr = monte_carlo(s, 10000, {sigma}, cfg);
    const double got = success_rate(rr).success_rate;
    const double w = 100.0 * pawn_oracle(s, sigma);
    t.expect(std::abs(got - w) <= 1.0, s.id + " sigma " + fmt("%.1f", sigma) + ": " + fmt("%.2f", got) + "% vs " +
                                           fmt("%.2f", w) + "%");
    detail += "; " + s.id + "@" + fmt("%.0f", sigma) + " " + fmt("%.2f", got) + "/" + fmt("%.2f", w);
  }
  if (t.out.pass) t.out.detail = detail;
  return t.out;
}

// ---- 8 ---------------------------------------------------------------------

Outcome determinism() {
  Tally t;
  const Scenario s = load_scenario(testing::scenario_path("s1_pawns_edge.json"));
  RunConfig cfg;
  cfg.seed = 7;
  const auto a = csv_string(monte_carlo(s, 2000, {1.0, 5.0}, cfg));
  const auto b = csv_string(monte_carlo(s, 2000, {1.0, 5.0}, cfg));
  const auto c = csv_string(monte_carlo_serial(s, 2000, {1.0, 5.0}, cfg));
  t.expect(a == b, "two parallel runs differ");
  t.expect(a == c, "parallel and serial runs differ");

  auto all = load_all({"", "table2", "faults"});
  const auto ordered = csv_string(run_batch(all, cfg));
  std::mt19937 shuffle_rng(12345);
  for (int k = 0; k < 3; ++k) {
    std::shuffle(all.begin(), all.end(), shuffle_rng);
    t.expect(csv_string(run_batch(all, cfg)) == ordered, "shuffled batch " + std::to_string(k) + " differs");
  }
  if (t.out.pass)
    t.out.detail = std::to_string(a.size()) + " + " + std::to_string(ordered.size()) + " bytes identical";
  return t.out;
}

// ---- 9 ---------------------------------------------------------------------

Outcome offline_mock() {
  Tally t;
  auto transport = std::make_shared<FailingTransport>();
  // the stub really does refuse: a remote agent wired to it cannot answer
  {
    RunConfig remote;
    remote.agent = AgentChoice::Remote;
    RemoteAgentConfig rc;
    rc.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    rc.api_key = "unused";
    rc.retry.base_delay_s = 0;
    remote.remote = rc;
    remote.transport = transport;
    const auto r = run_scenario(load_scenario(testing::scenario_path("s2_pick.json")), remote);
    t.expect(!r.success && transport->calls() > 0, "remote run did not hit the failing transport");
  }
  auto offline = std::make_shared<FailingTransport>();
  RunConfig cfg;
  cfg.agent = AgentChoice::Mock;
  cfg.transport = offline;
  int met = 0, total = 0;
  for (const auto& s : load_all({"", "table2", "faults"})) {
    const auto r = run_scenario(s, cfg);
    ++total;
    met += r.expectation_met(s);
    t.expect(r.expectation_met(s), s.id + ": " + r.diagnostic);
  }
  t.expect(offline->calls() == 0, std::to_string(offline->calls()) + " network calls in mock mode");
  if (t.out.pass) t.out.detail = std::to_string(met) + "/" + std::to_string(total) + " scenarios, 0 network calls";
  return t.out;
}

// ---- 10 --------------------------------------------------------------------

Outcome fault_injection() {
  Tally t;
  const std::map<std::string, FailureStage> want = {
      {"fault_gaze_dropout", FailureStage::Input},         {"fault_empty_detections", FailureStage::Observation},
      {"fault_gaze_off_target", FailureStage::Fusion},     {"fault_deleted_matches", FailureStage::Alignment},
      {"fault_malformed_plan", FailureStage::Planning},    {"fault_malformed_o1", FailureStage::Planning},
      {"fault_out_of_workspace", FailureStage::Planning}};
  int ok = 0;
  const auto faults = load_all({"faults"});
  t.expect(faults.size() == want.size(), std::to_string(faults.size()) + " fault scenarios");
  for (const auto& s : faults) {
    const auto it = want.find(s.id);
    if (it == want.end()) {
      t.fail("unexpected fault scenario " + s.id);
      continue;
    }
    const auto r = run_scenario(s, RunConfig{});
    const bool good = !r.success && r.failure_stage == it->second;
    t.expect(good, s.id + " ended at " + (r.failure_stage ? std::string(to_string(*r.failure_stage)) : "success"));
    ok += good;
  }
  if (t.out.pass) t.out.detail = std::to_string(ok) + "/" + std::to_string(want.size()) + " faults at the right stage";
  return t.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fusion matches brute force", fusion_vs_brute_force},
      {"decay schedule and weights", decay_schedule},
      {"alignment matches brute force", alignment_vs_brute_force},
      {"frame algebra and reprojection", geometry},
      {"apple policy and template plans", policies},
      {"complexity table", complexity_rows},
      {"pawn selection Monte-Carlo", s1_monte_carlo},
      {"deterministic CSV", determinism},
      {"mock agent stays offline", offline_mock},
      {"fault injection stages", fault_injection},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
