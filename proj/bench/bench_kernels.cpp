// Serial reference vs OpenMP kernels on the two hot paths.
#include <benchmark/benchmark.h>

#include "cetrace/local_detector.hpp"
#include "cetrace/parametric.hpp"
#include "cetrace/synth.hpp"

namespace {

using namespace cetrace;

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_GammaGridSearch(benchmark::State& state) {
  SynthSpec spec;
  spec.width = spec.height = 400;
  spec.curve = CurveSpec::parse("gamma:1.3");
  spec.sigma = 0.01;
  spec.seed = 11;
  const SynthResult synth = synth_image(spec);
  const PixelHistogram h_obs = from_pixels(synth.transformed.pixels(), 8);
  const ParamGrid grid = ParamGrid::gamma_range(0.1, 0.01, 2.5);
  const NoiseMatrix noise(0.01, 255);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_parametric(h_obs, grid, noise, {}, mode(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_GammaGridSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BlockUnaries(benchmark::State& state) {
  SynthSpec a, b;
  a.width = a.height = b.width = b.height = 256;
  a.curve = CurveSpec::parse("gamma:0.6");
  b.curve = CurveSpec::parse("gamma:1.4");
  a.seed = b.seed = 12;
  const CompositeResult comp = synth_composite(a, b, Rect{64, 64, 128, 128});
  const BlockGrid grid = extract_blocks(comp.image, 50, 8);
  const NoiseMatrix noise(0.01, 255);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_unaries(grid, comp.curve0, comp.curve1, noise, {}, mode(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_BlockUnaries)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
