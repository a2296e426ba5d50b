#pragma once

#include <cmath>
#include <cstdint>

#include "cubicqn/linalg.hpp"

namespace cubicqn::rng {

/// splitmix64 step; used to derive per-iteration streams from a global seed.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Minimal xorshift-star engine. Hand-rolled so that every sampled stream is
/// bit-identical across standard libraries.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : state_(mix(seed, 0)) {
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

inline linalg::Vector gaussian_vector(Engine& engine, int dim) {
  linalg::Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = engine.gaussian();
  return v;
}

inline linalg::Vector unit_sphere_vector(Engine& engine, int dim) {
  linalg::Vector v = gaussian_vector(engine, dim);
  double n = linalg::norm(v);
  while (n == 0.0) {
    v = gaussian_vector(engine, dim);
    n = linalg::norm(v);
  }
  linalg::scale(1.0 / n, v);
  return v;
}

}  // namespace cubicqn::rng
