#include <benchmark/benchmark.h>

#include <cmath>

#include "fluxom/circuit.hpp"
#include "fluxom/fit/cavity.hpp"
#include "fluxom/fit/circle.hpp"
#include "fluxom/fit/pipeline.hpp"
#include "fluxom/synth.hpp"

using namespace fluxom;

namespace {

DeviceParams paper_device() {
  DeviceParams d;
  d.b_parallel = 0.01;
  return d;
}

void BM_CircuitForward(benchmark::State& st) {
  const CircuitParams p;
  for (auto _ : st) {
    const auto d = delta_y_reduce(p, 13.2e-12);
    benchmark::DoNotOptimize(lumped_frequencies(d, p).omega0);
  }
}
BENCHMARK(BM_CircuitForward);

void BM_SynthCavity(benchmark::State& st) {
  Scenario s;
  s.cavity.f0_hz = 5.2e9;
  s.noise = {1, 0.01};
  const auto grid = linear_grid(5.16e9, 5.24e9, static_cast<std::size_t>(st.range(0)));
  const auto dev = paper_device();
  for (auto _ : st) benchmark::DoNotOptimize(synthesize(s, dev, BackgroundCoeffs{}, s.noise, grid));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SynthCavity)->Arg(801)->Arg(8001);

void BM_CavityFit(benchmark::State& st) {
  Scenario s;
  s.cavity.f0_hz = 5.2e9;
  const auto tr = synthesize(s, paper_device(), BackgroundCoeffs{}, {2, 0.01},
                             linear_grid(5.16e9, 5.24e9, static_cast<std::size_t>(st.range(0))))
                      .at(0);
  for (auto _ : st) benchmark::DoNotOptimize(fit_cavity_response(tr));
}
BENCHMARK(BM_CavityFit)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);

void BM_CircleFit(benchmark::State& st) {
  std::vector<cplx> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(cplx(0.5, 0.2) + 0.25 * std::polar(1.0, 0.01 * i) + 1e-3 * std::sin(7.0 * i));
  for (auto _ : st) benchmark::DoNotOptimize(fit_circle(pts));
}
BENCHMARK(BM_CircleFit)->Unit(benchmark::kMicrosecond);

void BM_Pipeline(benchmark::State& st) {
  const auto dev = paper_device();
  OmitScenario o;
  o.flux_phi0 = 1.4245;
  const auto b = ripple_background(5.10e9, 5.28e9, 2.4, 60e6);
  const auto set = synthesize_omit_set(o, dev, b, {5, 0.01}, linear_grid(5.10e9, 5.28e9, 1201));
  const PipelineInputs in{set.background_lo, set.background_hi, set.cavity, set.omit, {}, {}};
  for (auto _ : st) benchmark::DoNotOptimize(run_g0_pipeline(in, {}, dev));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
