// Copyright (c) 2026 GPKMD contributors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "gpkmd/model.hpp"
#include "../tests/helpers.hpp"

using namespace gpkmd;
using testing::Instance;
using testing::random_cmatrix;
using testing::random_instance;
using testing::random_matrix;

namespace {

Instance scaled_instance(Index d, Index t, Index k) {
  std::mt19937_64 rng(2025);
  Instance inst;
  inst.y = random_cmatrix(rng, d, t);
  inst.params.latents = random_matrix(rng, 2, t + 1);
  inst.params.modes = random_cmatrix(rng, d, k, 0.5);
  inst.params.eigenvalues.dt = 0.05;
  inst.params.eigenvalues.discrete = CVector::Constant(k, Complex(0.95, 0.1));
  inst.params.noise_var = 0.1;
  inst.params.coef_var = 1.0;
  inst.kernel = kernels::KernelSpec::rbf_plus_linear(1.0, 1.0, 0.3);
  return inst;
}

void bm_naive(benchmark::State& state) {
  const Instance inst = scaled_instance(state.range(0), state.range(1), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        model::log_likelihood_naive(inst.y, inst.params, inst.kernel));
}

void bm_fast_exact(benchmark::State& state) {
  const Instance inst = scaled_instance(state.range(0), state.range(1), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(model::log_likelihood_fast(
        inst.y, inst.params, inst.kernel, inst.y.cols()));
}

void bm_fast_lowrank(benchmark::State& state) {
  const Instance inst = scaled_instance(35, 751, 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(model::log_likelihood_fast(
        inst.y, inst.params, inst.kernel, state.range(0)));
}

void bm_evaluate_lowrank(benchmark::State& state) {
  const Instance inst = scaled_instance(35, 751, 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(model::evaluate(inst.y, inst.params, inst.kernel,
                                             inst.prior, state.range(0)));
}

} // namespace

BENCHMARK(bm_naive)->Args({6, 30})->Args({8, 60})->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fast_exact)
    ->Args({6, 30})
    ->Args({8, 60})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fast_lowrank)->Arg(25)->Arg(50)->Arg(100)->Unit(
    benchmark::kMillisecond);
BENCHMARK(bm_evaluate_lowrank)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
