// Serial reference kernels against their OpenMP counterparts on the
// well-prepared state. Run with OMP_NUM_THREADS set to compare scaling.
#include <benchmark/benchmark.h>

#include "chevron/energy.hpp"
#include "chevron/flow.hpp"
#include "chevron/initial_data.hpp"
#include "chevron/variation.hpp"

using namespace chevron;

namespace {

struct Fixture {
  PhysicalParams params;
  State state;
  Discretization disc;

  explicit Fixture(std::size_t n)
      : state(build_initial_state(validate(params), make_grid(params.L, n))), disc(state.grid) {
    // Move off the minimizer's symmetric data so every term is active.
    for (std::size_t i = 1; i + 1 < n; ++i) state.psi.values[i] *= Complex(1.0, 0.05 * std::sin(0.1 * double(i)));
  }
};

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void BM_Energy(benchmark::State& s) {
  const Fixture f(static_cast<std::size_t>(s.range(0)));
  const Exec exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(evaluate_energy(f.state, f.disc, f.params, nullptr, exec));
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_Gradient(benchmark::State& s) {
  const Fixture f(static_cast<std::size_t>(s.range(0)));
  const Exec exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(gradient(f.state, f.disc, f.params, exec));
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_RotheStep(benchmark::State& s) {
  const Fixture f(static_cast<std::size_t>(s.range(0)));
  const Exec exec = exec_of(s);
  FlowConfig cfg;
  cfg.n_nodes = static_cast<std::size_t>(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(rothe_step(f.state, cfg.tau, f.params, cfg, f.disc, exec));
}

void kernel_args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"N", "parallel"});
  for (long n : {257L, 1025L, 4097L, 16385L}) {
    b->Args({n, 0});
    b->Args({n, 1});
  }
}

}  // namespace

BENCHMARK(BM_Energy)->Apply(kernel_args);
BENCHMARK(BM_Gradient)->Apply(kernel_args);
BENCHMARK(BM_RotheStep)->ArgNames({"N", "parallel"})->Args({257, 0})->Args({257, 1})->Args({1025, 0})->Args({1025, 1})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
