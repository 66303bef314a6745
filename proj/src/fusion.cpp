#include "gazeintent/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gazeintent/error.hpp"

namespace gazeintent {

namespace {

// Below this many (object, point) pairs the thread team costs more than it saves.
constexpr std::size_t kParallelWork = 4096;

void check_inputs(const GazeTrace& trace, const SceneObservationSet& scene) {
  if (scene.empty()) throw Error(ErrorCode::EmptyScene, "no candidate objects to fuse against");
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "no gaze points in the window");
}

double weighted_distance(std::span<const Point2> points, std::span<const double> weights,
                         const Point2& target) {
  double sum = 0;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const double dx = points[n].x() - target.x();
    const double dy = points[n].y() - target.y();
    sum += weights[n] * std::sqrt(dx * dx + dy * dy);
  }
  return sum;
}

FusionResult select(const SceneObservationSet& scene, std::vector<ObjectScore> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].score < scores[best].score ||
        (scores[i].score == scores[best].score && scores[i].id < scores[best].id)) {
      best = i;
    }
  }
  double runner_up = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != best) runner_up = std::min(runner_up, scores[i].score);
  }
  const double margin = std::isfinite(runner_up) ? runner_up - scores[best].score : 0.0;
  return FusionResult{ReferredObject{scene.view, scene.objects[best]}, std::move(scores), margin};
}

}  // namespace

double alpha_for(long index_bound) {
  if (index_bound == 2) return 0.0;
  return std::min(kAlphaCap, static_cast<double>(index_bound) / 10.0);
}

FusionWeights fusion_weights(long index_bound) {
  FusionWeights w;
  if (index_bound < 0) return w;
  w.alpha = alpha_for(index_bound);
  w.weights.resize(static_cast<std::size_t>(index_bound) + 1);
  for (long n = 0; n <= index_bound; ++n) {
    w.weights[static_cast<std::size_t>(n)] =
        std::exp(w.alpha * static_cast<double>(n - index_bound));
  }
  return w;
}

std::vector<double> normalized_weights(long index_bound) {
  std::vector<double> w = fusion_weights(index_bound).weights;
  double total = 0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

FusionResult fuse(const GazeTrace& trace, const SceneObservationSet& scene) {
  check_inputs(trace, scene);
  const FusionWeights w = fusion_weights(trace.index_bound());
  const auto count = static_cast<long>(scene.objects.size());
  std::vector<ObjectScore> scores(scene.objects.size());
  const bool parallel = scene.objects.size() * trace.points.size() >= kParallelWork;

#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < count; ++i) {
    const auto& obj = scene.objects[static_cast<std::size_t>(i)];
    scores[static_cast<std::size_t>(i)] =
        ObjectScore{obj.id(), weighted_distance(trace.points, w.weights, obj.position())};
  }
  return select(scene, std::move(scores));
}

FusionResult fuse_serial(const GazeTrace& trace, const SceneObservationSet& scene) {
  check_inputs(trace, scene);
  const FusionWeights w = fusion_weights(trace.index_bound());
  std::vector<ObjectScore> scores;
  scores.reserve(scene.objects.size());
  for (const auto& obj : scene.objects) {
    scores.push_back(ObjectScore{obj.id(), weighted_distance(trace.points, w.weights, obj.position())});
  }
  return select(scene, std::move(scores));
}

Point2 weighted_gaze_point(const GazeTrace& trace) {
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "no gaze points in the window");
  const std::vector<double> w = normalized_weights(trace.index_bound());
  Point2 acc = Point2::Zero();
  for (std::size_t n = 0; n < trace.points.size(); ++n) acc += w[n] * trace.points[n];
  return acc;
}

}  // namespace gazeintent
