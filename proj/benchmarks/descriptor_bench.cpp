#include <benchmark/benchmark.h>

#include "raid/baseline.hpp"
#include "raid/descriptor.hpp"
#include "raid/synthetic.hpp"

namespace {

using namespace raid;

const synthetic::SyntheticPair& pair() {
  static const auto p = synthetic::generate_synthetic("surrounding", 1, 1)[0];
  return p;
}

const descriptor::ImageFrame kFrame{synthetic::kFrameSize, synthetic::kFrameSize};

// Arg: sample_count_target. Time should grow linearly with it.
void BM_Raid(benchmark::State& state) {
  descriptor::DescriptorConfig cfg;
  cfg.sample_count_target = static_cast<double>(state.range(0));
  const auto target = pair().target();
  for (auto _ : state) benchmark::DoNotOptimize(descriptor::raid(pair().source, target, kFrame, cfg));
}
BENCHMARK(BM_Raid)->RangeMultiplier(2)->Range(2500, 40000)->Unit(benchmark::kMillisecond);

void BM_RaidCached(benchmark::State& state) {
  const auto target = pair().target();
  descriptor::PointHistogramCache cache;
  for (auto _ : state) benchmark::DoNotOptimize(descriptor::raid(pair().source, target, kFrame, {}, &cache));
}
BENCHMARK(BM_RaidCached)->Unit(benchmark::kMillisecond);

void BM_PointHistogram(benchmark::State& state) {
  const auto target = pair().target();
  const auto c = geometry::centroid(pair().source);
  const double r = descriptor::compute_r_max(pair().source);
  for (auto _ : state) benchmark::DoNotOptimize(descriptor::point_histogram(c, target, r));
}
BENCHMARK(BM_PointHistogram);

void BM_ShapeContext(benchmark::State& state) {
  const auto target = pair().target();
  for (auto _ : state) benchmark::DoNotOptimize(baseline::shape_context(pair().source, target));
}
BENCHMARK(BM_ShapeContext);

}  // namespace

BENCHMARK_MAIN();
