#include <benchmark/benchmark.h>

#include "histolim/covariance.hpp"
#include "histolim/diagnostics.hpp"
#include "histolim/samplers.hpp"

using namespace histolim;

namespace {

void draw_level(benchmark::State& state, const HistogramSystem& sys) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  const PartitionChain chain = dyadic_chain(Domain{}, depth);
  const LevelSampler sampler(sys, chain, depth);
  RandomStream s(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sampler.partition()->size()));
}

void BM_Dirichlet(benchmark::State& state) { draw_level(state, DirichletSystem{}); }
void BM_Polya(benchmark::State& state) {
  draw_level(state, PolyaTreeSystem{HomogeneousRule{BetaExpression::parse("m^2")}, 0.0});
}
void BM_GaussianDiagonal(benchmark::State& state) { draw_level(state, GaussianSystem{}); }
void BM_GaussianMinKernel(benchmark::State& state) {
  draw_level(state, GaussianSystem{{}, KernelCovariance{KernelType::kMin, 1, 1, 8}});
}

void BM_AssembleMinKernel(benchmark::State& state) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  const PartitionChain chain = dyadic_chain(Domain{}, depth);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_sigma(KernelCovariance{KernelType::kMin, 1, 1, 8}, *chain.level(depth)));
  }
}

void BM_Coherence(benchmark::State& state) {
  const PartitionChain chain = dyadic_chain(Domain{}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coherence_test(DirichletSystem{}, chain, 6, MonteCarloConfig{1, 10000, 1}));
  }
}

}  // namespace

BENCHMARK(BM_Dirichlet)->Arg(6)->Arg(12);
BENCHMARK(BM_Polya)->Arg(6)->Arg(12);
BENCHMARK(BM_GaussianDiagonal)->Arg(6)->Arg(12);
BENCHMARK(BM_GaussianMinKernel)->Arg(4)->Arg(8);
BENCHMARK(BM_AssembleMinKernel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coherence)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
