#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazeintent/geometry.hpp"
#include "gazeintent/scene.hpp"

namespace gazeintent {

struct KeypointMatch {
  Point2 human_pt;
  Point2 robot_pt;
  double confidence = 1.0;
};

/// Matches seeded from keypoints inside the human-view referred bbox.
struct MatchSet {
  std::vector<KeypointMatch> matches;
  BBox source_bbox;
};

enum class RegionKind { Mask, BBox };
std::string_view to_string(RegionKind kind) noexcept;

struct RegionCount {
  std::string id;
  long count = 0;
  RegionKind region = RegionKind::BBox;
  double score = 0;  // count, or count per pixel of region when density-normalised
};

struct AlignmentResult {
  ReferredObject referred;
  std::vector<RegionCount> counts;  // robot scene order
  double margin = 0;                // winner score minus runner-up
};

struct AlignmentConfig {
  /// A winner needs at least this many matches, else NoCorrespondence.
  long min_count = 1;
  /// Rank by matches per region pixel instead of raw counts.
  bool normalize_by_area = false;
};

/// Robot object whose region (mask if present, else bbox; edges inclusive)
/// holds the most matched keypoints. Ties go to the lowest id. Confidence
/// is not used. Throws EmptyScene or NoCorrespondence.
AlignmentResult align(const MatchSet& matches, const SceneObservationSet& robot_scene,
                      const AlignmentConfig& cfg = {});

/// Single-threaded reference of align().
AlignmentResult align_serial(const MatchSet& matches, const SceneObservationSet& robot_scene,
                             const AlignmentConfig& cfg = {});

bool region_contains(const ObjectObservation& obj, const Point2& p) noexcept;

/// Knobs for the synthetic matcher that stands in for a learned one.
struct MatcherNoise {
  int matches_per_object = 30;
  double outlier_rate = 0.0;  // fraction of matches landing uniformly in the robot image
  double jitter_px = 0.0;     // Gaussian sigma added to inlier robot points
};

/// Settings a real feature-matching adapter would take.
struct MatcherConfig {
  int max_keypoints = 10000;
  double keypoint_threshold = 1e-5;
  double match_threshold = 1e-5;
  bool resize = false;
  std::string weights = "indoor";
};

/// Synthesises matches from `source` (human view) to `target` (its ground-truth
/// correspondence in the robot view). Human points are uniform in the source
/// bbox; inlier robot points are uniform in the target bbox plus jitter, outliers
/// uniform over the robot image. Robot points are clamped to the image.
MatchSet synth_matches(const ObjectObservation& source, const Intrinsics& human_image,
                       const ObjectObservation* target, const Intrinsics& robot_image,
                       const MatcherNoise& noise, std::uint64_t seed);

}  // namespace gazeintent
