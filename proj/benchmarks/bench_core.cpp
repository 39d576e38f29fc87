#include <benchmark/benchmark.h>

#include <random>

#include "rydpar/encoding.hpp"
#include "rydpar/open_system.hpp"
#include "rydpar/plaquette.hpp"
#include "rydpar/qaoa.hpp"

using namespace rydpar;

namespace {

constexpr double kV = 251.327;

ParityLayout bipartite(int a, int b) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> j(a, std::vector<double>(b));
  for (auto& row : j)
    for (auto& x : row) x = u(rng);
  return encode_complete_bipartite(a, b, j);
}

PiecewisePulse test_pulse() {
  const LaserPoint dark{0.0, -kV}, p{kV / 2, -kV / 3};
  return PiecewisePulse({linear_ramp(dark, p, 0.3), HoldSegment{p, 0.2}, linear_ramp(p, dark, 0.3)});
}

}  // namespace

static void BM_QaoaLayer(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  const QaoaSimulator sim(bipartite(4, b));
  Statevector psi = sim.plus_state();
  for (auto _ : state) {
    sim.apply_layer(psi, 0.3, 0.2, 0.1);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sim.dimension()));
}
BENCHMARK(BM_QaoaLayer)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_NoisyEstimate(benchmark::State& state) {
  const QaoaSimulator sim(bipartite(4, 4));
  QaoaParams p = QaoaParams::zeros(3);
  p.alpha = {0.3, 0.2, 0.1};
  p.gamma = {0.1, 0.2, 0.3};
  const NoiseModel noise{5e-4, state.range(0) * 1e-3};
  std::uint64_t update = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.estimate_energy(p, noise, 100, 1, update++));
}
BENCHMARK(BM_NoisyEstimate)->Arg(0)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_SectorEvolve(benchmark::State& state) {
  const PiecewisePulse pulse = test_pulse();
  const int n = static_cast<int>(state.range(0));
  IntegratorOptions o;
  o.richardson = false;
  for (auto _ : state) benchmark::DoNotOptimize(evolve_sector(pulse, n, {kV}, o).matrix.data());
}
BENCHMARK(BM_SectorEvolve)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

static void BM_CoherentGate(benchmark::State& state) {
  const PiecewisePulse pulse = test_pulse();
  for (auto _ : state) benchmark::DoNotOptimize(coherent_gate_channel(pulse, pulse, {kV}));
}
BENCHMARK(BM_CoherentGate)->Unit(benchmark::kMillisecond);

static void BM_DecayChannel(benchmark::State& state) {
  const PiecewisePulse pulse = test_pulse();
  const DecayModel d;
  for (auto _ : state) benchmark::DoNotOptimize(gate_channel(pulse, pulse, {kV}, d).superop.data());
}
BENCHMARK(BM_DecayChannel)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
