#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "cubicqn/oracle.hpp"
#include "cubicqn/rng.hpp"

namespace {

void BM_LogisticValueGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  cubicqn::LogisticProblem problem(benchsupport::dataset(n, d), 1e-4);
  cubicqn::rng::Engine engine(1);
  const cubicqn::linalg::Vector x = cubicqn::rng::gaussian_vector(engine, d);
  cubicqn::linalg::Vector grad(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(problem.value_grad(x, grad));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LogisticValueGrad)->Args({500, 50})->Args({2000, 200});

void BM_LogisticHvp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  cubicqn::LogisticProblem problem(benchsupport::dataset(n, d), 1e-4);
  cubicqn::rng::Engine engine(2);
  const cubicqn::linalg::Vector x = cubicqn::rng::gaussian_vector(engine, d);
  const cubicqn::linalg::Vector v = cubicqn::rng::gaussian_vector(engine, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(problem.hessian_vec(x, v));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LogisticHvp)->Args({500, 50})->Args({2000, 200});

}  // namespace
