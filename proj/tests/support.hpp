#pragma once

// Shared helpers for the test suites: seeded random problem generators and
// dense spectral oracles kept independent of the solver paths they check.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "cubicqn/dataio.hpp"
#include "cubicqn/hessian_model.hpp"
#include "cubicqn/linalg.hpp"
#include "cubicqn/oracle.hpp"
#include "cubicqn/rng.hpp"

namespace testsupport {

using cubicqn::linalg::Matrix;
using cubicqn::linalg::Vector;

inline Matrix random_matrix(cubicqn::rng::Engine& engine, int rows, int cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = engine.gaussian();
  return m;
}

inline Matrix random_symmetric(cubicqn::rng::Engine& engine, int n, double scale = 1.0) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = scale * engine.gaussian();
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

// A^T A / n + shift I: symmetric PSD with smallest eigenvalue >= shift.
inline Matrix random_psd(cubicqn::rng::Engine& engine, int n, double shift = 0.0) {
  const Matrix a = random_matrix(engine, n, n);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += a(k, i) * a(k, j);
      acc /= n;
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  for (int i = 0; i < n; ++i) out(i, i) += shift;
  return out;
}

inline double min_eigenvalue(const Matrix& s) {
  return cubicqn::linalg::sym_eig(s).values.front();
}

inline double max_eigenvalue(const Matrix& s) {
  return cubicqn::linalg::sym_eig(s).values.back();
}

// Spectral norm of a symmetric matrix.
inline double sym_norm(const Matrix& s) {
  const auto eig = cubicqn::linalg::sym_eig(s);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

inline Matrix matrix_difference(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    out.data()[i] = a.data()[i] - b.data()[i];
  }
  return out;
}

inline std::shared_ptr<const cubicqn::Dataset> random_logistic_data(int n, int d,
                                                                    std::uint64_t seed,
                                                                    double separation = 2.0) {
  auto data = cubicqn::normalize_rows(cubicqn::synth_logistic(n, d, seed, separation)).dataset;
  return std::make_shared<const cubicqn::Dataset>(std::move(data));
}

// Least-squares slope of log10(y) against log10(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsupport
