// Copyright 2026 The hqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP versions. Arg 0 = serial,
// 1 = parallel; both produce identical results (checked in the unit tests),
// so the ratio of the two timings is the parallel speedup.

#include <benchmark/benchmark.h>

#include "hqsim/experiments.hpp"
#include "hqsim/fci.hpp"
#include "hqsim/parallel.hpp"
#include "hqsim/readout.hpp"

namespace {

using namespace hqsim;

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) ? "parallel" : "serial");
  state.counters["threads"] = state.range(0) ? parallel::effective_threads() : 1;
}

const fci::PotentialGrid& quench_grid() {
  static const auto g = fci::gaussian_well(64, 64, 200.0, 90.0, 1.0, 77.0, 20.0);
  return g;
}

const fci::SingleParticleBasis& quench_basis() {
  static const auto b = fci::solve_basis(quench_grid(), 20);
  return b;
}

void BM_TwoElectronIntegrals(benchmark::State& state) {
  const auto& g = quench_grid();
  const auto& b = quench_basis();
  for (auto _ : state) benchmark::DoNotOptimize(fci::two_electron_integrals(g, b, {}, mode(state)));
  label(state);
}
BENCHMARK(BM_TwoElectronIntegrals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FciAssembly(benchmark::State& state) {
  static const auto ints = fci::build_integrals(quench_grid(), quench_basis());
  static const auto dets = fci::build_determinant_basis(20).spin_block(0);
  for (auto _ : state) benchmark::DoNotOptimize(fci::assemble_fci(ints, dets, 1.0, mode(state)));
  label(state);
}
BENCHMARK(BM_FciAssembly)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TraceBatch(benchmark::State& state) {
  readout::TraceConfig c;
  c.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(readout::generate_batch(c, 8000, 0.5, mode(state)));
  state.SetItemsProcessed(state.iterations() * 8000);
  label(state);
}
BENCHMARK(BM_TraceBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RamseyNoiseAverage(benchmark::State& state) {
  const auto p = ModelParams::reference();
  const auto op = sweet_spot(p);
  RamseySpec spec;
  spec.drive = {op.eps, op.f_qubit, 4.0, default_edge_sigma()};
  spec.pi_half_duration = calibrate_rotation(spec.drive, 0.5, p);
  NoiseModel n;
  n.sigma_eps = 2.5;
  n.n_realizations = 16;
  IntegratorOptions o;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(ramsey_trace(spec, -80.0, p, n, o));
  label(state);
}
BENCHMARK(BM_RamseyNoiseAverage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  parallel::apply_env_thread_limit();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
