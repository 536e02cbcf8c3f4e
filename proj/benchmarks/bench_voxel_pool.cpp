#include <benchmark/benchmark.h>

#include "bevkit/voxel_pool.hpp"

namespace {

using bevkit::HeightBinConfig;

const bevkit::LiftedPoints& points() {
  static const auto pts = bevkit::random_lifted_points(1'000'000, 16, 7, bevkit::BevGridSpec{});
  return pts;
}

HeightBinConfig config(int index) { return bevkit::ablation_height_bin_configs().at(static_cast<std::size_t>(index)); }

void BM_PoolNaive(benchmark::State& state) {
  const auto h = config(static_cast<int>(state.range(0)));
  state.SetLabel(h.label());
  for (auto _ : state) benchmark::DoNotOptimize(bevkit::pool_naive(points(), bevkit::BevGridSpec{}, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().positions.size()));
}

void BM_PoolFast(benchmark::State& state) {
  const auto h = config(static_cast<int>(state.range(0)));
  state.SetLabel(h.label());
  for (auto _ : state) benchmark::DoNotOptimize(bevkit::pool_fast(points(), bevkit::BevGridSpec{}, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().positions.size()));
}

}  // namespace

BENCHMARK(BM_PoolNaive)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PoolFast)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
