// Detector and transform microbenchmarks. Detector time is per call with
// the configured T, so per-iteration cost is the slope across BM_PqndIterations.

#include <benchmark/benchmark.h>

#include "onebit/onebit.hpp"

namespace {

using namespace onebit;

struct Fixture {
  Scenario scenario;
  FrameDraw draw;

  Fixture(int n, int k, int v)
      : scenario(prepare(config(n, k, v))), draw(draw_frame(scenario, 0, 0)) {}

  static SystemConfig config(int n, int k, int v) {
    SystemConfig c;
    c.antennas = n;
    c.users = k;
    c.subcarriers = v;
    c.order = 16;
    c.snr_db = {10.0};
    c.frames = 1;
    c.workers = 1;
    return c;
  }

  DetectionProblem problem() const {
    return {draw.channel, draw.frame, scenario.constellation, draw.noise_variance};
  }
};

void run_detector(benchmark::State& state, DetectorKind kind, int n, int k, int v,
                  int iterations) {
  const Fixture f(n, k, v);
  DetectorParams params = default_params(kind, k, n);
  params.iterations = iterations;
  params.record_trace = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect(kind, f.problem(), params).xhat.data());
  }
}

// Args: N, K, V.
void BM_Pqnd(benchmark::State& state) {
  run_detector(state, DetectorKind::pqnd, state.range(0), state.range(1), state.range(2), 6);
  state.SetComplexityN(state.range(1) * state.range(2));
}
BENCHMARK(BM_Pqnd)
    ->Args({128, 10, 256})
    ->Args({128, 20, 256})
    ->Args({128, 10, 512})
    ->Args({128, 40, 256})
    ->Unit(benchmark::kMillisecond);

void BM_PqndIterations(benchmark::State& state) {
  run_detector(state, DetectorKind::pqnd, 128, 10, 256, state.range(0));
}
BENCHMARK(BM_PqndIterations)->Arg(1)->Arg(6)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_Obox(benchmark::State& state) {
  run_detector(state, DetectorKind::obox, 128, 10, 256, 6);
}
BENCHMARK(BM_Obox)->Unit(benchmark::kMillisecond);

// Exact Newton at (N, K, V) = (64, 2, 32); the lifted system is 128-dimensional.
void BM_NewtonExact(benchmark::State& state) {
  run_detector(state, DetectorKind::nm, 64, 2, 32, 6);
}
BENCHMARK(BM_NewtonExact)->Unit(benchmark::kMillisecond);

void BM_PqndSmall(benchmark::State& state) {
  run_detector(state, DetectorKind::pqnd, 64, 2, 32, 6);
}
BENCHMARK(BM_PqndSmall)->Unit(benchmark::kMicrosecond);

void BM_DftRows(benchmark::State& state) {
  RngStream rng(1, 0);
  Grid g(128, state.range(0));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.complex_normal(1.0);
  for (auto _ : state) {
    unitary_dft_rows(g, Direction::forward);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_DftRows)->Arg(256)->Arg(512)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
