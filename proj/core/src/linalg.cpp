#include "cubicqn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cubicqn::linalg {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm(const Vector& x) {
  // Two-pass scaled norm so that entries near DBL_MAX/DBL_MIN do not
  // overflow/underflow the intermediate sum.
  double amax = 0.0;
  for (double v : x) amax = std::max(amax, std::abs(v));
  if (amax == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : x) {
    const double r = v / amax;
    acc += r * r;
  }
  return amax * std::sqrt(acc);
}

void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, Vector& x) {
  for (double& v : x) v *= alpha;
}

Vector scaled(const Vector& x, double alpha) {
  Vector out(x);
  scale(alpha, out);
  return out;
}

Vector subtract(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("subtract: length mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

Vector add(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("add: length mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

bool all_finite(const Vector& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double v) { return std::isfinite(v); });
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (static_cast<int>(x.size()) != a.cols()) throw std::invalid_argument("matvec: shape mismatch");
  Vector out(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  if (static_cast<int>(x.size()) != a.rows()) {
    throw std::invalid_argument("matvec_transposed: shape mismatch");
  }
  Vector out(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out[j] += a(i, j) * x[i];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs_asymmetry(const Matrix& a) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
    }
  }
  return worst;
}

bool is_symmetric(const Matrix& a, double tol) {
  return a.rows() == a.cols() && max_abs_asymmetry(a) <= tol;
}

QrFactors thin_qr(const Matrix& m) {
  const int d = m.rows();
  const int k = m.cols();
  if (k > d) throw std::invalid_argument("thin_qr: more columns than rows");
  if (!all_finite(m)) throw std::invalid_argument("thin_qr: non-finite entries");

  Matrix work = m;
  std::vector<Vector> reflectors;
  reflectors.reserve(k);

  for (int j = 0; j < k; ++j) {
    // Householder vector annihilating work(j+1.., j).
    Vector v(d - j, 0.0);
    double colnorm = 0.0;
    for (int i = j; i < d; ++i) {
      v[i - j] = work(i, j);
      colnorm += work(i, j) * work(i, j);
    }
    colnorm = std::sqrt(colnorm);
    Vector reflector(d - j, 0.0);
    if (colnorm > 0.0) {
      const double alpha = (v[0] >= 0.0) ? -colnorm : colnorm;
      v[0] -= alpha;
      const double vnorm = norm(v);
      if (vnorm > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) reflector[i] = v[i] / vnorm;
      }
      // Apply H = I - 2 u u^T to the trailing columns.
      for (int c = j; c < k; ++c) {
        double proj = 0.0;
        for (int i = j; i < d; ++i) proj += reflector[i - j] * work(i, c);
        proj *= 2.0;
        for (int i = j; i < d; ++i) work(i, c) -= proj * reflector[i - j];
      }
    }
    reflectors.push_back(std::move(reflector));
  }

  QrFactors out;
  out.r = Matrix(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) out.r(i, j) = work(i, j);
  }

  // Q = H_0 ... H_{k-1} [I_k; 0].
  out.q = Matrix(d, k);
  for (int j = 0; j < k; ++j) out.q(j, j) = 1.0;
  for (int j = k - 1; j >= 0; --j) {
    const Vector& u = reflectors[j];
    for (int c = 0; c < k; ++c) {
      double proj = 0.0;
      for (int i = j; i < d; ++i) proj += u[i - j] * out.q(i, c);
      proj *= 2.0;
      for (int i = j; i < d; ++i) out.q(i, c) -= proj * u[i - j];
    }
  }

  // Fix signs so the R diagonal is nonnegative.
  for (int j = 0; j < k; ++j) {
    if (out.r(j, j) < 0.0) {
      for (int c = j; c < k; ++c) out.r(j, c) = -out.r(j, c);
      for (int i = 0; i < d; ++i) out.q(i, j) = -out.q(i, j);
    }
  }
  return out;
}

EigenDecomposition sym_eig(const Matrix& s) {
  const int n = s.rows();
  if (n != s.cols()) throw std::invalid_argument("sym_eig: matrix not square");
  if (!all_finite(s)) throw std::invalid_argument("sym_eig: non-finite entries");
  const double sym_tol = 1e-10 * std::max(1.0, frobenius_norm(s));
  if (max_abs_asymmetry(s) > sym_tol) {
    throw std::invalid_argument("sym_eig: matrix asymmetric beyond tolerance");
  }

  // Work on the symmetrized copy; Jacobi rotations preserve symmetry exactly.
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  }
  Matrix v = Matrix::identity(n);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) <= 1e-15 * std::max(1.0, frobenius_norm(a))) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        // Smaller-magnitude root gives the stable rotation angle.
        double t;
        if (tau >= 0.0) {
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        } else {
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - sn * aqi;
          a(q, i) = sn * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
  }

  EigenDecomposition out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a(i, i);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return out.values[i] < out.values[j]; });

  EigenDecomposition sorted;
  sorted.values.resize(n);
  sorted.vectors = Matrix(n, n);
  for (int c = 0; c < n; ++c) {
    sorted.values[c] = out.values[order[c]];
    for (int i = 0; i < n; ++i) sorted.vectors(i, c) = v(i, order[c]);
  }
  return sorted;
}

}  // namespace cubicqn::linalg
