#pragma once

#include <span>
#include <string>
#include <vector>

#include "gazeintent/geometry.hpp"
#include "gazeintent/scene.hpp"

namespace gazeintent {

/// Projected gaze points on the window-start image, oldest first.
/// N (index_bound) is points.size() - 1.
struct GazeTrace {
  std::vector<Point2> points;

  bool empty() const noexcept { return points.empty(); }
  long index_bound() const noexcept { return static_cast<long>(points.size()) - 1; }
};

/// Recency decay: 0 when N == 2, otherwise min(0.65, N / 10).
double alpha_for(long index_bound);

inline constexpr double kAlphaCap = 0.65;

struct FusionWeights {
  double alpha = 0;
  std::vector<double> weights;  // e^{alpha (n - N)}, n = 0..N; weights.back() == 1
};

FusionWeights fusion_weights(long index_bound);

/// fusion_weights divided by their sum.
std::vector<double> normalized_weights(long index_bound);

struct ObjectScore {
  std::string id;
  double score = 0;  // weighted distance sum, pixels
};

struct FusionResult {
  ReferredObject selected;
  std::vector<ObjectScore> scores;  // scene order
  double margin = 0;                // runner-up minus winner; 0 for one object
};

/// Picks the object minimising sum_n e^{alpha (n - N)} |gaze_n - p_i|.
/// Exact ties go to the lexicographically lowest id.
/// Throws EmptyScene / EmptyTrace. Objects are scored in parallel.
FusionResult fuse(const GazeTrace& trace, const SceneObservationSet& scene);

/// Single-threaded reference of fuse(); identical results bit for bit.
FusionResult fuse_serial(const GazeTrace& trace, const SceneObservationSet& scene);

/// Recency-weighted mean of the trace using normalized_weights.
Point2 weighted_gaze_point(const GazeTrace& trace);

}  // namespace gazeintent
