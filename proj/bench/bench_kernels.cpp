// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "gazeintent/alignment.hpp"
#include "gazeintent/fusion.hpp"
#include "gazeintent/harness.hpp"
#include "gazeintent/rng.hpp"

using namespace gazeintent;

namespace {

GazeTrace random_trace(Rng& rng, int n) {
  GazeTrace t;
  for (int i = 0; i < n; ++i) t.points.emplace_back(rng.uniform(0, 1408), rng.uniform(0, 1408));
  return t;
}

SceneObservationSet random_scene(Rng& rng, long n) {
  SceneObservationSet s;
  s.view = View::Robot;
  s.intrinsics = {900, 900, 640, 360, 1280, 720};
  for (long i = 0; i < n; ++i) {
    const double x = rng.uniform(0, 1200), y = rng.uniform(0, 650);
    s.objects.emplace_back("o" + std::to_string(i), BBox{x, y, x + rng.uniform(5, 80), y + rng.uniform(5, 70)});
  }
  return s;
}

MatchSet random_matches(Rng& rng, long n) {
  MatchSet m;
  for (long i = 0; i < n; ++i) m.matches.push_back({Point2(0, 0), Point2(rng.uniform(0, 1280), rng.uniform(0, 720)), 1.0});
  return m;
}

template <auto Fn>
void fuse_bench(benchmark::State& state) {
  Rng rng(1);
  const auto trace = random_trace(rng, 20);
  const auto scene = random_scene(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(trace, scene));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void align_bench(benchmark::State& state) {
  Rng rng(2);
  const auto scene = random_scene(rng, state.range(0));
  const auto matches = random_matches(rng, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(matches, scene, AlignmentConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

const Scenario& pawns() {
  static const Scenario s =
      load_scenario(std::filesystem::path(GAZEINTENT_SOURCE_DIR) / "scenarios" / "s1_pawns.json");
  return s;
}

template <auto Fn>
void monte_carlo_bench(benchmark::State& state) {
  RunConfig cfg;
  cfg.agent = AgentChoice::Rule;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(pawns(), state.range(0), {0.62}, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(fuse_bench<fuse>)->Name("fuse/parallel")->Arg(64)->Arg(4096)->Arg(65536);
BENCHMARK(fuse_bench<fuse_serial>)->Name("fuse/serial")->Arg(64)->Arg(4096)->Arg(65536);
BENCHMARK(align_bench<align>)->Name("align/parallel")->Arg(8)->Arg(256)->Arg(4096);
BENCHMARK(align_bench<align_serial>)->Name("align/serial")->Arg(8)->Arg(256)->Arg(4096);
BENCHMARK(monte_carlo_bench<monte_carlo>)->Name("monte_carlo/parallel")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(monte_carlo_bench<monte_carlo_serial>)->Name("monte_carlo/serial")->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
