#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "cubicqn/hessian_model.hpp"
#include "cubicqn/rng.hpp"

namespace {

using cubicqn::linalg::Vector;

void BM_LbfgsFold(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int memory = static_cast<int>(state.range(1));
  cubicqn::rng::Engine engine(3);
  cubicqn::PairBuffer buffer(memory, cubicqn::PairBuffer::Policy::History, true);
  for (int i = 0; i < memory; ++i) {
    Vector s = cubicqn::rng::unit_sphere_vector(engine, d);
    Vector y = s;
    for (int j = 0; j < d; ++j) y[j] *= 0.5 + static_cast<double>(j) / d;
    buffer.push(std::move(s), std::move(y));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cubicqn::build_history_model(buffer, cubicqn::QnUpdateKind::Lbfgs, 0.0, d));
  }
}
BENCHMARK(BM_LbfgsFold)->Args({50, 10})->Args({200, 10})->Args({200, 32});

void BM_SampledBroydenFold(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int memory = static_cast<int>(state.range(1));
  cubicqn::LogisticProblem problem(benchsupport::dataset(500, d), 1e-4);
  cubicqn::rng::Engine engine(4);
  const Vector x = cubicqn::rng::gaussian_vector(engine, d);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cubicqn::build_sampling_model(problem, x, memory, ++seed, 1.0));
  }
}
BENCHMARK(BM_SampledBroydenFold)->Args({50, 10})->Args({200, 10});

}  // namespace
