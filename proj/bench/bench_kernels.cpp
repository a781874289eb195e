// Serial reference loops vs OpenMP kernels.

#include "xisub/catalog.hpp"
#include "xisub/functionals.hpp"
#include "xisub/stability.hpp"
#include "xisub/xi_equation.hpp"

#include <benchmark/benchmark.h>

using namespace xisub;

namespace {

kernels::ExecutionPolicy policy_for(int mode) {
  // 0 serial, 1 parallel reproducible, 2 parallel unordered
  return {mode != 0, mode != 2};
}

void BM_WeightedVolume(benchmark::State& state) {
  const CatalogImmersion s = make_sphere(3, 1.5);
  const QuadratureGrid grid = variation_grid(s.immersion, static_cast<int>(state.range(1)));
  const auto policy = policy_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_volume(s.immersion, s.xi, grid, policy).V);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_WeightedVolume)->ArgsProduct({{0, 1, 2}, {16, 32}})->Unit(benchmark::kMillisecond);

void BM_XiResidual(benchmark::State& state) {
  const CatalogImmersion s = make_sphere(2, 1.2);
  const QuadratureGrid grid = verification_grid(s.immersion, 24);
  const auto policy = policy_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(xi_residual(s.immersion, grid, policy).residual);
}
BENCHMARK(BM_XiResidual)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GalerkinAssembly(benchmark::State& state) {
  const SpectralProblem pb = sphere_problem(2, 1, 1.2, true, 4);
  const int mode = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const Assembly a = mode == 0 ? assemble_serial(pb) : assemble_parallel(pb, mode == 1);
    benchmark::DoNotOptimize(a.K.data());
  }
}
BENCHMARK(BM_GalerkinAssembly)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
