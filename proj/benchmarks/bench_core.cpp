#include <benchmark/benchmark.h>

#include "metastab/annealed.hpp"
#include "metastab/dynamics.hpp"
#include "metastab/experiments.hpp"
#include "metastab/potential.hpp"

namespace ms = metastab;

namespace {

ms::CouplingMatrix sample(int N) {
  ms::DisorderSpec ds;
  ds.kind = ms::DisorderKind::erdos_renyi;
  ds.N = N;
  ds.p = 0.5;
  ds.k_J = 1.0;
  return ms::sample_couplings(ds, {99, 0});
}

void BM_sample_couplings(benchmark::State& state) {
  ms::DisorderSpec ds;
  ds.kind = ms::DisorderKind::erdos_renyi;
  ds.N = int(state.range(0));
  ds.p = 0.5;
  ds.k_J = 1.0;
  std::uint64_t r = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(ms::sample_couplings(ds, {99, r++}));
}
BENCHMARK(BM_sample_couplings)->Arg(12)->Arg(64)->Arg(256);

void BM_equilibrium_potential(benchmark::State& state) {
  const int N = int(state.range(0));
  const ms::CouplingMatrix cm = sample(N);
  const ms::ModelParams mp{N, 1.5, 0.05, 1.0};
  const ms::ExactChain chain(cm, mp);
  const auto A = ms::StateSet::from_levels(N, {1});
  const auto B = ms::StateSet::from_levels(N, {N - 1});
  for (auto _ : state)
    benchmark::DoNotOptimize(ms::equilibrium_potential(chain, A, B));
}
BENCHMARK(BM_equilibrium_potential)->Arg(8)->Arg(10)->Arg(12);

void BM_glauber_step(benchmark::State& state) {
  const int N = int(state.range(0));
  const ms::CouplingMatrix cm = sample(N);
  const ms::ModelParams mp{N, 1.5, 0.05, 1.0};
  ms::GlauberChain chain(cm, mp, 0);
  ms::Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(chain.step(rng));
}
BENCHMARK(BM_glauber_step)->Arg(12)->Arg(24)->Arg(32);

void BM_lumped_chain(benchmark::State& state) {
  const ms::FreeEnergySpec spec{1.5, 0.05, 1.0};
  const int N = int(state.range(0));
  for (auto _ : state) {
    auto ch = ms::make_birth_death_chain(spec, N);
    auto lv = ms::metastable_levels(spec, N);
    benchmark::DoNotOptimize(ms::lumped_mean_hitting(ch, lv.k2, lv.k1));
  }
}
BENCHMARK(BM_lumped_chain)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
