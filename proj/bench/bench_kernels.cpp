// Serial vs OpenMP timings for the kernels that fan out over independent items.
#include "dirac/conic_finsler.hpp"
#include "dirac/courant_calculus.hpp"
#include "dirac/direct_limit.hpp"
#include "dirac/scenarios.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dirac;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_Involutivity(benchmark::State& state) {
  const std::vector<SectionField> frame = heisenberg_dirac_frame();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> points;
  for (int i = 0; i < 64; ++i) points.push_back(Vec{{u(rng), u(rng), u(rng)}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(involutivity_test(frame, points, {}, mode(state)));
  }
}

void BM_MinkowskiProbe(benchmark::State& state) {
  Mat g(3, 3);
  g << 2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 1.5;
  const ConicMinkowskiNorm norm = randers_norm(g, Vec{{0.2, -0.3, 0.4}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(minkowski_property_probe(norm, 2000, 11, mode(state)));
  }
}

void BM_IntegrateLevels(benchmark::State& state) {
  const AscendingFamily rope = rope_family(8, 4);
  Vec bump = Vec::Zero(18);
  for (int j = 0; j <= 8; ++j) bump[2 * j] = 0.05 * std::sin(3.141592653589793 * j / 8);
  MechState init;
  init.x = bump;
  init.v = Vec::Zero(18);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_levels(rope, {1, 2, 3, 4}, init, 0.2, 1e-2, mode(state)));
  }
}

}  // namespace

BENCHMARK(BM_Involutivity)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinkowskiProbe)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntegrateLevels)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
