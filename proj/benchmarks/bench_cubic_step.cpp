#include <benchmark/benchmark.h>

#include "cubicqn/cubic_step.hpp"
#include "cubicqn/rng.hpp"

namespace {

using cubicqn::linalg::Vector;

cubicqn::LowRankHessianModel make_model(int d, int pairs) {
  cubicqn::rng::Engine engine(5);
  cubicqn::LowRankHessianModel model(d, 0.1, pairs);
  for (int i = 0; i < pairs; ++i) {
    const Vector s = cubicqn::rng::unit_sphere_vector(engine, d);
    Vector y = s;
    for (int j = 0; j < d; ++j) y[j] *= 0.5 + static_cast<double>(j) / d;
    model = cubicqn::lbfgs_apply_pair(model, s, y, false).model;
  }
  return model;
}

// The spectral factorization is cached per model value, so the low-rank path
// amortizes to the scalar ray-search; the dense path pays one d x d
// eigendecomposition per call.
void BM_SolveLowRank(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto model = make_model(d, static_cast<int>(state.range(1)));
  cubicqn::rng::Engine engine(6);
  const Vector g = cubicqn::rng::gaussian_vector(engine, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cubicqn::solve_low_rank(g, model, 1.0, 1e-6));
  }
}
BENCHMARK(BM_SolveLowRank)->Args({50, 10})->Args({500, 10})->Args({500, 32});

void BM_SolveDense(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto dense = cubicqn::materialize_dense(make_model(d, 10));
  cubicqn::rng::Engine engine(7);
  const Vector g = cubicqn::rng::gaussian_vector(engine, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cubicqn::solve_dense(g, dense, 1.0, 1e-6));
  }
}
BENCHMARK(BM_SolveDense)->Args({50});

}  // namespace
