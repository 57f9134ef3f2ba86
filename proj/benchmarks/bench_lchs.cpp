// Copyright 2026 The LCHS Emulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "lchs/kernel_quadrature.hpp"
#include "lchs/lchs_solver.hpp"
#include "lchs/parallel.hpp"
#include "lchs/problem_io.hpp"
#include "lchs/propagators.hpp"

namespace {

lchs::ProblemInstance instance(lchs::Index dim, bool time_dependent) {
  lchs::RandomInstanceOptions opt;
  opt.seed = 7;
  opt.dim = dim;
  opt.time_dependent = time_dependent;
  return lchs::random_problem(opt).instance();
}

void BM_KernelGrid(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lchs::build_kernel_grid(50.0, m));
  state.SetItemsProcessed(state.iterations() * (m + 1));
}
BENCHMARK(BM_KernelGrid)->RangeMultiplier(8)->Range(64, 32768);

// One node, exact stepping, time-dependent generator.
void BM_NodePropagation(benchmark::State& state) {
  const lchs::ProblemInstance p = instance(state.range(0), true);
  const lchs::ComplexMatrix u0 = p.initial_state;
  for (auto _ : state) {
    const lchs::NodePropagator node(p.generator, 3.0, lchs::ExactStepping{1e-8});
    benchmark::DoNotOptimize(node.apply(0.0, 1.0, u0));
  }
}
BENCHMARK(BM_NodePropagation)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrotterApply(benchmark::State& state) {
  const lchs::ProblemInstance p = instance(16, true);
  const lchs::ComplexMatrix u0 = p.initial_state;
  const int order = static_cast<int>(state.range(0));
  const lchs::Trotter backend{lchs::suzuki_recursion(order), 64};
  for (auto _ : state)
    benchmark::DoNotOptimize(lchs::propagate(p.generator, 3.0, 0.0, 1.0, backend, u0));
}
BENCHMARK(BM_TrotterApply)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveHomogeneous(benchmark::State& state) {
  lchs::set_thread_count(static_cast<std::size_t>(state.range(1)));
  const lchs::ProblemInstance p = instance(state.range(0), false);
  for (auto _ : state) benchmark::DoNotOptimize(lchs::solve_homogeneous(p, 1.0, 1e-2));
  lchs::set_thread_count(0);
}
BENCHMARK(BM_SolveHomogeneous)
    ->Args({4, 1})
    ->Args({16, 1})
    ->Args({16, 4})
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
