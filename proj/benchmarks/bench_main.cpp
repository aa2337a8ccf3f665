#include <benchmark/benchmark.h>

#include "hwq/bounding.hpp"
#include "hwq/diffusions.hpp"
#include "hwq/gaussian_limit.hpp"
#include "hwq/queue_sim.hpp"
#include "hwq/renewal.hpp"
#include "hwq/rng.hpp"

namespace {

const hwq::DistributionSpec kExp = hwq::DistributionSpec::exponential(1.0);

// One replication of the n-server DES over 100 service means.
void BM_SimulateQueue(benchmark::State& state) {
  hwq::HwConfig c;
  c.n = static_cast<std::size_t>(state.range(0));
  c.B = 1.0;
  c.horizon = 100.0;
  hwq::Rng rng = hwq::make_rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(hwq::simulate_queue(c, rng).q.back());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.n * 100));
}
BENCHMARK(BM_SimulateQueue)->Arg(20)->Arg(100)->Arg(500);

void BM_Phi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const hwq::RenewalPathBundle b =
      hwq::make_bundle(kExp.scaled(1.0 / hwq::hw_rate(n, 1.0)), kExp, n, 50.0, 2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(hwq::phi(b, 0.0, 50.0, n));
}
BENCHMARK(BM_Phi)->Arg(20)->Arg(100)->Arg(500);

void BM_BuildZCov(benchmark::State& state) {
  const auto grid = hwq::uniform_grid(static_cast<double>(state.range(0)), 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(hwq::build_Z_cov(kExp, kExp, grid).factor(0, 0));
}
BENCHMARK(BM_BuildZCov)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SampleZ(benchmark::State& state) {
  hwq::CovarianceGrid g = hwq::build_Z_cov(kExp, kExp, hwq::uniform_grid(12.5, 0.05));
  hwq::Rng rng = hwq::make_rng(3);
  const auto reps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hwq::sample_Z(g, reps, rng)(0, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(reps));
}
BENCHMARK(BM_SampleZ)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Williams(benchmark::State& state) {
  hwq::Rng rng = hwq::make_rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(hwq::williams_sample(1.0, 0.01, 1.0, rng).values.back());
}
BENCHMARK(BM_Williams);

}  // namespace

BENCHMARK_MAIN();
