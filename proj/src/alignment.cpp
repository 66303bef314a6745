#include "gazeintent/alignment.hpp"

#include <algorithm>
#include <limits>

#include "gazeintent/error.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace {

constexpr std::size_t kParallelWork = 4096;

RegionCount count_region(const ObjectObservation& obj, const std::vector<KeypointMatch>& matches,
                         const AlignmentConfig& cfg) {
  RegionCount rc;
  rc.id = obj.id();
  rc.region = obj.mask() ? RegionKind::Mask : RegionKind::BBox;
  for (const KeypointMatch& m : matches) {
    if (region_contains(obj, m.robot_pt)) ++rc.count;
  }
  rc.score = static_cast<double>(rc.count);
  if (cfg.normalize_by_area) {
    const double area = obj.mask() ? static_cast<double>(obj.mask()->area()) : obj.bbox().area();
    rc.score = area > 0 ? rc.score / area : 0.0;
  }
  return rc;
}

AlignmentResult select(const SceneObservationSet& scene, std::vector<RegionCount> counts,
                       const AlignmentConfig& cfg) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i].score > counts[best].score ||
        (counts[i].score == counts[best].score && counts[i].id < counts[best].id)) {
      best = i;
    }
  }
  if (counts[best].count < std::max<long>(cfg.min_count, 1)) {
    throw Error(ErrorCode::NoCorrespondence,
                "best robot region '" + counts[best].id + "' holds " +
                    std::to_string(counts[best].count) + " matches");
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, counts[i].score);
  }
  const double margin = std::isfinite(runner_up) ? counts[best].score - runner_up : counts[best].score;
  return AlignmentResult{ReferredObject{scene.view, scene.objects[best]}, std::move(counts), margin};
}

}  // namespace

std::string_view to_string(RegionKind kind) noexcept {
  return kind == RegionKind::Mask ? "mask" : "bbox";
}

bool region_contains(const ObjectObservation& obj, const Point2& p) noexcept {
  if (obj.mask()) return obj.mask()->contains(p);
  return obj.bbox().contains(p);
}

AlignmentResult align(const MatchSet& matches, const SceneObservationSet& robot_scene,
                      const AlignmentConfig& cfg) {
  if (robot_scene.empty()) throw Error(ErrorCode::EmptyScene, "robot view has no candidates");
  const auto count = static_cast<long>(robot_scene.objects.size());
  std::vector<RegionCount> counts(robot_scene.objects.size());
  const bool parallel = robot_scene.objects.size() * matches.matches.size() >= kParallelWork;

#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    counts[idx] = count_region(robot_scene.objects[idx], matches.matches, cfg);
  }
  return select(robot_scene, std::move(counts), cfg);
}

AlignmentResult align_serial(const MatchSet& matches, const SceneObservationSet& robot_scene,
                             const AlignmentConfig& cfg) {
  if (robot_scene.empty()) throw Error(ErrorCode::EmptyScene, "robot view has no candidates");
  std::vector<RegionCount> counts;
  counts.reserve(robot_scene.objects.size());
  for (const auto& obj : robot_scene.objects) counts.push_back(count_region(obj, matches.matches, cfg));
  return select(robot_scene, std::move(counts), cfg);
}

MatchSet synth_matches(const ObjectObservation& source, const Intrinsics& human_image,
                       const ObjectObservation* target, const Intrinsics& robot_image,
                       const MatcherNoise& noise, std::uint64_t seed) {
  Rng rng(seed);
  MatchSet out;
  out.source_bbox = source.bbox();
  const BBox& sb = source.bbox();
  const double rw = robot_image.width;
  const double rh = robot_image.height;
  out.matches.reserve(static_cast<std::size_t>(std::max(noise.matches_per_object, 0)));
  for (int k = 0; k < noise.matches_per_object; ++k) {
    KeypointMatch m;
    m.human_pt = Point2(std::clamp(rng.uniform(sb.x_min, sb.x_max), 0.0, double(human_image.width)),
                        std::clamp(rng.uniform(sb.y_min, sb.y_max), 0.0, double(human_image.height)));
    const bool outlier = target == nullptr || rng.uniform() < noise.outlier_rate;
    if (outlier) {
      m.robot_pt = Point2(rng.uniform(0, rw), rng.uniform(0, rh));
    } else {
      const BBox& tb = target->bbox();
      double x = rng.uniform(tb.x_min, tb.x_max);
      double y = rng.uniform(tb.y_min, tb.y_max);
      if (noise.jitter_px > 0) {
        x += noise.jitter_px * rng.normal();
        y += noise.jitter_px * rng.normal();
      }
      m.robot_pt = Point2(std::clamp(x, 0.0, rw), std::clamp(y, 0.0, rh));
    }
    m.confidence = rng.uniform();
    out.matches.push_back(m);
  }
  return out;
}

}  // namespace gazeintent
