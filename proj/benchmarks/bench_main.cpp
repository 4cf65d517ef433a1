#include <benchmark/benchmark.h>

#include "mdual/cannings.hpp"
#include "mdual/coarse_graining.hpp"
#include "mdual/lattices.hpp"
#include "mdual/poset.hpp"

namespace {

void BM_SubsetMoebius(benchmark::State& state) {
  const auto lattice = mdual::subset_lattice(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdual::moebius_matrix(lattice.poset()));
}
BENCHMARK(BM_SubsetMoebius)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

void BM_PartitionMoebius(benchmark::State& state) {
  const auto lattice = mdual::partition_lattice(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdual::moebius_matrix(lattice.poset()));
}
BENCHMARK(BM_PartitionMoebius)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_ForwardKernel(benchmark::State& state) {
  const auto law = mdual::wright_fisher_law(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdual::forward_kernel(law));
}
BENCHMARK(BM_ForwardKernel)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_CoarseSetEnumeration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mdual::coarse_set_matrices_by_enumeration(n));
}
BENCHMARK(BM_CoarseSetEnumeration)->DenseRange(4, 12, 4)->Unit(benchmark::kMillisecond);

void BM_MultiAllelicKernels(benchmark::State& state) {
  const auto law = mdual::wright_fisher_law(3);
  const int types = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mdual::multiallelic_kernels(law, types));
}
BENCHMARK(BM_MultiAllelicKernels)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  const auto law = mdual::wright_fisher_law(4);
  mdual::MonteCarloOptions options;
  options.steps = 2;
  options.reps = static_cast<std::size_t>(state.range(0));
  options.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mdual::monte_carlo_duality(law, 2, 1, options));
}
BENCHMARK(BM_MonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
