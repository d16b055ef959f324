#include <benchmark/benchmark.h>

#include "lakenet/config.hpp"
#include "lakenet/dataset.hpp"
#include "lakenet/keypoints.hpp"
#include "lakenet/metrics.hpp"
#include "lakenet/skeleton.hpp"

namespace {

using namespace lakenet;

PointCloud shape(std::size_t points, std::uint64_t seed) {
  return sample_shape(SyntheticShapeSpec::random(ShapeFamily::Chair, points, seed)).cloud;
}

void BM_Chamfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = shape(n, 1);
  const auto y = shape(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Chamfer)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_EmdExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = shape(n, 1);
  const auto y = shape(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(emd_exact(x, y));
}
BENCHMARK(BM_EmdExact)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EmdApprox(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = shape(n, 1);
  const auto y = shape(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(emd_approx(x, y, 0.01));
}
BENCHMARK(BM_EmdApprox)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_FarthestPointSampling(benchmark::State& state) {
  const auto x = shape(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_sampling(x, 256));
}
BENCHMARK(BM_FarthestPointSampling)->Arg(2048)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_SurfaceSkeleton(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto reference = shape(2048, 4);
  const auto idx = farthest_point_sampling(reference, k);
  std::vector<Vec3> keypoints;
  for (auto i : idx) keypoints.push_back(reference[i]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(make_surface_skeleton(keypoints, reference, 4 * k, InterpolationOptions{}));
  }
}
BENCHMARK(BM_SurfaceSkeleton)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DetectorForward(benchmark::State& state) {
  const auto cfg = TrainingConfig::toy();
  const KeypointDetector detector(DetectorConfig::from(cfg), 1);
  const auto x = shape(cfg.complete_points, 5);
  for (auto _ : state) benchmark::DoNotOptimize(detector.detect(x));
}
BENCHMARK(BM_DetectorForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
