#include <benchmark/benchmark.h>

#include <memory>

#include "ringsfwm/perturbative.hpp"
#include "ringsfwm/propagator.hpp"

using namespace ringsfwm;

namespace {

RingSystem critical_ring() {
  RingParams p;
  const double v = 1.5e8;
  p.pump = ModeParams::from_rates(1.215e15, v, v, 1e10, 1e10);
  p.signal = ModeParams::from_rates(1.245e15, v, v, 1e10, 1e10);
  p.idler = ModeParams::from_rates(1.185e15, v, v, 1e10, 1e10);
  p.lambda = 1.0;
  return RingSystem(p);
}

// unequal speeds: every grid point has its own kappa v_S + kappa' v_I
RingSystem dispersive_ring() {
  RingParams p = critical_ring().params();
  p.signal.v = p.signal.u = 1.4e8;
  p.idler.v = p.idler.u = 1.6e8;
  return RingSystem(p);
}

void pump_pair(benchmark::State& state, const RingSystem& sys) {
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const double v = sys.mode(Field::pump).v;
  const auto pump = intracavity_field(sys, spec, SpectralGrid(spec.support(v), 257));
  const SpectralGrid grid(default_spectral_half_width(sys, spec), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pump_pair_function(pump, sys, grid, grid));
  state.SetComplexityN(state.range(0) * state.range(0));
}

void BM_PumpPairEqualSpeeds(benchmark::State& state) { pump_pair(state, critical_ring()); }
void BM_PumpPairUnequalSpeeds(benchmark::State& state) { pump_pair(state, dispersive_ring()); }

void BM_PropagatorColumn(benchmark::State& state) {
  const auto sys = critical_ring();
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = default_time_grid(sys, spec, n);
  const auto pump = pump_time_evolution(sys, spec, grid.refined(), SpectralGrid(spec.support(1.5e8), 65));
  PropagatorOptions opt;
  opt.materialize = false;
  const PropagatorTable table(std::make_shared<const DriveMatrix>(build_drive_matrix(sys, pump)), grid, opt);
  for (auto _ : state) benchmark::DoNotOptimize(table.first_column(0));
}

void BM_TimeDomainPairAmplitude(benchmark::State& state) {
  const auto sys = critical_ring();
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const SpectralGrid axis(default_spectral_half_width(sys, spec), static_cast<std::size_t>(state.range(0)));
  const auto grid = default_time_grid(sys, spec, 1025);
  for (auto _ : state) benchmark::DoNotOptimize(run_time_domain(sys, spec, grid, axis, axis));
}

void BM_SchmidtDecomposition(benchmark::State& state) {
  const auto sys = critical_ring();
  const auto spec = PumpSpec::gaussian(1.0, 1e-9);
  const auto pump = intracavity_field(sys, spec, SpectralGrid(spec.support(1.5e8), 257));
  const SpectralGrid grid(default_spectral_half_width(sys, spec), static_cast<std::size_t>(state.range(0)));
  const auto pair = pair_amplitude(response_kernels(sys, pump_pair_function(pump, sys, grid, grid)));
  for (auto _ : state) benchmark::DoNotOptimize(schmidt_analysis(pair));
}

}  // namespace

BENCHMARK(BM_PumpPairEqualSpeeds)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PumpPairUnequalSpeeds)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagatorColumn)->Arg(1025)->Arg(2049)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TimeDomainPairAmplitude)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchmidtDecomposition)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
