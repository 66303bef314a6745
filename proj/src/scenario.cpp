#include "gazeintent/scenario.hpp"

#include <fstream>
#include <set>

#include <Eigen/Geometry>

#include "gazeintent/error.hpp"
#include "gazeintent/harness.hpp"
#include "gazeintent/interpreter.hpp"

namespace gazeintent {

using nlohmann::json;

std::string_view to_string(FailureStage stage) noexcept {
  switch (stage) {
    case FailureStage::Input: return "Input";
    case FailureStage::Observation: return "Observation";
    case FailureStage::Fusion: return "Fusion";
    case FailureStage::Alignment: return "Alignment";
    case FailureStage::Planning: return "Planning";
  }
  return "?";
}

std::optional<FailureStage> failure_stage_from(std::string_view text) noexcept {
  for (FailureStage s : {FailureStage::Input, FailureStage::Observation, FailureStage::Fusion,
                         FailureStage::Alignment, FailureStage::Planning}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ScenarioInvalid, path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected object");
  const auto it = j.find(key);
  if (it == j.end()) invalid(path + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected number, got " + std::string(j.type_name()));
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected string, got " + std::string(j.type_name()));
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) invalid(path, "expected array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Point2 point2(const json& j, const std::string& path) {
  const auto v = numbers(j, 2, path);
  return {v[0], v[1]};
}

Point3 point3(const json& j, const std::string& path) {
  const auto v = numbers(j, 3, path);
  return {v[0], v[1], v[2]};
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  return j.contains(key) ? number(j[key], path + "." + key) : fallback;
}

// {"rotation": 3x3 rows} or {"quaternion": [w, x, y, z]}, plus "translation".
Pose pose(const json& j, FrameId from, FrameId to, const std::string& path) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  if (j.contains("rotation")) {
    const json& rows = j["rotation"];
    if (!rows.is_array() || rows.size() != 3) invalid(path + ".rotation", "expected 3 rows");
    for (int i = 0; i < 3; ++i) {
      const auto row = numbers(rows[i], 3, path + ".rotation[" + std::to_string(i) + "]");
      for (int k = 0; k < 3; ++k) r(i, k) = row[k];
    }
  } else if (j.contains("quaternion")) {
    const auto q = numbers(j["quaternion"], 4, path + ".quaternion");
    Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    if (quat.norm() < 1e-12) invalid(path + ".quaternion", "zero quaternion");
    r = quat.normalized().toRotationMatrix();
  }
  const Point3 t = j.contains("translation") ? point3(j["translation"], path + ".translation") : Point3::Zero();
  try {
    return Pose::ingest(from, to, r, t);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

Intrinsics intrinsics(const json& j, const std::string& path) {
  Intrinsics k;
  k.fx = number(field(j, "fx", path), path + ".fx");
  k.fy = number(field(j, "fy", path), path + ".fy");
  k.cx = number(field(j, "cx", path), path + ".cx");
  k.cy = number(field(j, "cy", path), path + ".cy");
  k.width = static_cast<int>(number(field(j, "width", path), path + ".width"));
  k.height = static_cast<int>(number(field(j, "height", path), path + ".height"));
  try {
    k.validate();
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return k;
}

AnnotatedScene scene(const json& j, View view, const Intrinsics& k, const std::string& path) {
  AnnotatedScene s;
  s.view = view;
  s.intrinsics = k;
  const json& objects = field(j, "objects", path);
  if (!objects.is_array()) invalid(path + ".objects", "expected array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string p = path + ".objects[" + std::to_string(i) + "]";
    const json& o = objects[i];
    AnnotatedObject a;
    a.id = text(field(o, "id", p), p + ".id");
    if (!seen.insert(a.id).second) invalid(p + ".id", "duplicate id '" + a.id + "'");
    a.category = text(field(o, "category", p), p + ".category");
    const std::string kind = o.contains("kind") ? text(o["kind"], p + ".kind") : "object";
    if (kind == "object") {
      a.kind = AnnotationKind::Object;
    } else if (kind == "region") {
      a.kind = AnnotationKind::Region;
    } else {
      invalid(p + ".kind", "expected \"object\" or \"region\"");
    }
    const auto b = numbers(field(o, "bbox", p), 4, p + ".bbox");
    a.bbox = {b[0], b[1], b[2], b[3]};
    if (!a.bbox.valid()) invalid(p + ".bbox", "inverted box");
    if (o.contains("mask")) {
      const json& counts = field(o["mask"], "counts", p + ".mask");
      if (!counts.is_array()) invalid(p + ".mask.counts", "expected array");
      try {
        a.mask = Mask::from_rle(k.width, k.height, counts.get<std::vector<long>>());
      } catch (const std::exception& e) {
        invalid(p + ".mask", e.what());
      }
    }
    if (o.contains("anchor_px")) a.anchor_px = point2(o["anchor_px"], p + ".anchor_px");
    if (o.contains("position_m")) a.position_m = point3(o["position_m"], p + ".position_m");
    s.objects.push_back(std::move(a));
  }
  return s;
}

std::vector<GazeRecord> gaze_records(const json& gaze, const json& doc, const std::string& path) {
  std::vector<std::pair<double, Pose>> trajectory;
  if (doc.contains("head_poses")) {
    const json& hp = doc["head_poses"];
    if (!hp.is_array()) invalid("head_poses", "expected array");
    for (std::size_t i = 0; i < hp.size(); ++i) {
      const std::string p = "head_poses[" + std::to_string(i) + "]";
      const double t = number(field(hp[i], "t", p), p + ".t");
      trajectory.emplace_back(t, pose(hp[i], FrameId::at(FrameName::GlassesCamera, t),
                                      FrameId::fixed(FrameName::SlamWorld), p));
      if (i > 0 && trajectory[i - 1].first > t) invalid(p + ".t", "head poses out of order");
    }
  }
  const auto pose_at = [&](double t) {
    if (trajectory.empty()) {
      return Pose(FrameId::at(FrameName::GlassesCamera, t), FrameId::fixed(FrameName::SlamWorld),
                  Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      if (std::abs(trajectory[i].first - t) < std::abs(trajectory[best].first - t)) best = i;
    }
    const Pose& p = trajectory[best].second;
    return Pose(FrameId::at(FrameName::GlassesCamera, t), p.to(), p.rotation(), p.translation());
  };

  const json& records = field(gaze, "records", path);
  if (!records.is_array()) invalid(path + ".records", "expected array");
  std::vector<GazeRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string p = path + ".records[" + std::to_string(i) + "]";
    const json& r = records[i];
    GazeRecord g;
    g.t = number(field(r, "t", p), p + ".t");
    if (!out.empty() && out.back().t > g.t) invalid(p + ".t", "records out of order");
    if (r.contains("gaze")) {
      g.gaze_pupil = point3(r["gaze"], p + ".gaze");
    } else if (r.contains("direction")) {
      const Point3 d = point3(r["direction"], p + ".direction");
      if (d.norm() < 1e-12) invalid(p + ".direction", "zero direction");
      g.gaze_pupil = gaze_point_from_direction(d, number_or(r, "depth", kNominalGazeRange, p));
    } else {
      invalid(p, "needs \"gaze\" or \"direction\"");
    }
    g.head_pose = r.contains("head_pose")
                      ? pose(r["head_pose"], FrameId::at(FrameName::GlassesCamera, g.t),
                             FrameId::fixed(FrameName::SlamWorld), p + ".head_pose")
                      : pose_at(g.t);
    out.push_back(std::move(g));
  }
  return out;
}

Workspace workspace(const json& j, const std::string& path) {
  Workspace ws;
  if (j.contains("image_bounds")) {
    const auto b = numbers(j["image_bounds"], 4, path + ".image_bounds");
    ws.image_bounds = {b[0], b[1], b[2], b[3]};
  }
  if (j.contains("box_min")) ws.box_min = point3(j["box_min"], path + ".box_min");
  if (j.contains("box_max")) ws.box_max = point3(j["box_max"], path + ".box_max");
  ws.max_translation_m = number_or(j, "max_translation_m", ws.max_translation_m, path);
  ws.max_rotation_deg = number_or(j, "max_rotation_deg", ws.max_rotation_deg, path);
  if (j.contains("staging")) ws.staging = point2(j["staging"], path + ".staging");
  return ws;
}

Expectation expectation(const json& j, const std::string& path) {
  Expectation e;
  const json& slots = field(j, "slots", path);
  if (!slots.is_array()) invalid(path + ".slots", "expected array");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string p = path + ".slots[" + std::to_string(i) + "]";
    e.slots.push_back({text(field(slots[i], "human", p), p + ".human"), text(field(slots[i], "robot", p), p + ".robot")});
  }
  if (j.contains("actions")) {
    for (std::size_t i = 0; i < j["actions"].size(); ++i) {
      e.actions.push_back(text(j["actions"][i], path + ".actions[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("policy")) {
    try {
      e.policy = steps_json(parse_policy(j["policy"].dump()));
    } catch (const Error& err) {
      invalid(path + ".policy", err.what());
    }
  }
  if (j.contains("template")) {
    e.template_id = text(j["template"], path + ".template");
    if (!find_complexity_row(*e.template_id)) invalid(path + ".template", "unknown template '" + *e.template_id + "'");
  }
  if (j.contains("failure_stage")) {
    e.failure_stage = failure_stage_from(text(j["failure_stage"], path + ".failure_stage"));
    if (!e.failure_stage) invalid(path + ".failure_stage", "unknown stage");
  }
  return e;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  s.source = doc;
  const int version = static_cast<int>(number(field(doc, "schema_version", "$"), "schema_version"));
  if (version != kScenarioSchemaVersion) {
    invalid("schema_version", "unsupported version " + std::to_string(version));
  }
  s.id = text(field(doc, "id", "$"), "id");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) invalid("seed", "expected non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }

  const json& tr = field(doc, "transcript", "$");
  try {
    s.human.transcript = transcript_from_json(tr);
  } catch (const Error& e) {
    invalid("transcript", e.what());
  } catch (const json::exception& e) {
    invalid("transcript", e.what());
  }

  const json& gaze = field(doc, "gaze", "$");
  s.gaze_rate_hz = number_or(gaze, "rate_hz", s.gaze_rate_hz, "gaze");
  if (s.gaze_rate_hz <= 0) invalid("gaze.rate_hz", "must be positive");
  s.human.gaze_stream = gaze_records(gaze, doc, "gaze");
  if (doc.contains("frames")) {
    for (const json& f : doc["frames"]) {
      s.human.frames.push_back({number(field(f, "t", "frames"), "frames.t"), text(field(f, "frame_id", "frames"), "frames.frame_id")});
    }
  }

  const json& cal = field(doc, "calibration", "$");
  if (cal.contains("glasses_camera_from_pupil")) {
    s.camera_from_pupil = pose(cal["glasses_camera_from_pupil"], FrameId::fixed(FrameName::GlassesPupil),
                               FrameId::fixed(FrameName::GlassesCamera), "calibration.glasses_camera_from_pupil");
  } else {
    s.camera_from_pupil = Pose(FrameId::fixed(FrameName::GlassesPupil), FrameId::fixed(FrameName::GlassesCamera),
                               Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  }
  const Intrinsics hk = intrinsics(field(cal, "human_intrinsics", "calibration"), "calibration.human_intrinsics");
  const Intrinsics rk = intrinsics(field(cal, "robot_intrinsics", "calibration"), "calibration.robot_intrinsics");
  s.human_scene = scene(field(doc, "human_scene", "$"), View::Human, hk, "human_scene");
  s.robot_scene = scene(field(doc, "robot_scene", "$"), View::Robot, rk, "robot_scene");

  if (doc.contains("correspondence")) {
    for (const auto& [h, r] : doc["correspondence"].items()) {
      const std::string p = "correspondence." + h;
      if (!s.human_scene.find(h)) invalid(p, "unknown human id");
      const std::string rid = text(r, p);
      if (!s.robot_scene.find(rid)) invalid(p, "unknown robot id '" + rid + "'");
      s.correspondence[h] = rid;
    }
  }

  if (doc.contains("workspace")) {
    s.workspace = workspace(doc["workspace"], "workspace");
  } else {
    s.workspace.image_bounds = {0, 0, static_cast<double>(rk.width), static_cast<double>(rk.height)};
  }
  if (doc.contains("matcher")) {
    const json& m = doc["matcher"];
    s.matcher.matches_per_object =
        static_cast<int>(number_or(m, "matches_per_object", s.matcher.matches_per_object, "matcher"));
    s.matcher.outlier_rate = number_or(m, "outlier_rate", s.matcher.outlier_rate, "matcher");
    s.matcher.jitter_px = number_or(m, "jitter_px", s.matcher.jitter_px, "matcher");
    if (s.matcher.matches_per_object < 0) invalid("matcher.matches_per_object", "must be >= 0");
    if (s.matcher.outlier_rate < 0 || s.matcher.outlier_rate > 1) invalid("matcher.outlier_rate", "must be in [0, 1]");
  }
  if (doc.contains("alignment")) {
    const json& a = doc["alignment"];
    s.alignment.min_count = static_cast<long>(number_or(a, "min_count", 1, "alignment"));
    if (a.contains("normalize_by_area")) s.alignment.normalize_by_area = a["normalize_by_area"].get<bool>();
  }
  if (doc.contains("noise")) {
    s.noise.gaze_sigma_cm = number_or(doc["noise"], "gaze_sigma_cm", 0.0, "noise");
    s.noise.px_per_cm = number_or(doc["noise"], "px_per_cm", 1.0, "noise");
    if (s.noise.gaze_sigma_cm < 0) invalid("noise.gaze_sigma_cm", "must be >= 0");
    if (s.noise.px_per_cm <= 0) invalid("noise.px_per_cm", "must be positive");
  }
  if (doc.contains("interpreter")) s.padding_s = number_or(doc["interpreter"], "padding_s", 0.0, "interpreter");

  if (doc.contains("agent_responses")) {
    const json& ar = doc["agent_responses"];
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const std::string p = "agent_responses[" + std::to_string(i) + "]";
      CannedResponse c;
      c.template_id = text(field(ar[i], "template_id", p), p + ".template_id");
      if (ar[i].contains("variables")) {
        c.variables = ar[i]["variables"].get<std::map<std::string, std::string>>();
      }
      const json& t = field(ar[i], "text", p);
      c.text = t.is_string() ? t.get<std::string>() : t.dump();
      s.agent_responses.push_back(std::move(c));
    }
  }

  s.expected = expectation(field(doc, "expected", "$"), "expected");
  // fault scenarios may expect ids that a broken view no longer has
  for (std::size_t i = 0; !s.expected.failure_stage && i < s.expected.slots.size(); ++i) {
    const std::string p = "expected.slots[" + std::to_string(i) + "]";
    if (!s.human_scene.find(s.expected.slots[i].human)) invalid(p + ".human", "unknown id");
    if (!s.robot_scene.find(s.expected.slots[i].robot)) invalid(p + ".robot", "unknown id");
  }
  if (!s.expected.failure_stage) {
    std::size_t n = 0;
    try {
      n = interpret_rule_based(s.human.transcript).slots.size();
    } catch (const Error& e) {
      invalid("transcript", e.what());
    }
    if (n != s.expected.slots.size()) {
      invalid("expected.slots", std::to_string(s.expected.slots.size()) + " slots but the command has " +
                                    std::to_string(n) + " referential expressions");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScenarioInvalid, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ScenarioInvalid, path.string() + ": " + e.what());
  }
  try {
    return scenario_from_json(doc);
  } catch (const Error& e) {
    throw Error(ErrorCode::ScenarioInvalid, path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ScenarioInvalid, path.string() + ": " + e.what());
  }
}

}  // namespace gazeintent
