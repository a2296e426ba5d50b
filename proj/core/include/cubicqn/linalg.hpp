#pragma once

#include <cstddef>
#include <vector>

namespace cubicqn::linalg {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small sizes only: this library never factorizes
/// anything larger than the memory window of a quasi-Newton model or the
/// dimension of a desk-scale problem.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

double dot(const Vector& x, const Vector& y);
double norm(const Vector& x);
// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);
void scale(double alpha, Vector& x);
Vector scaled(const Vector& x, double alpha);
// x - y
Vector subtract(const Vector& x, const Vector& y);
Vector add(const Vector& x, const Vector& y);
bool all_finite(const Vector& x);
bool all_finite(const Matrix& m);

Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transposed(const Matrix& a, const Vector& x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_asymmetry(const Matrix& a);
bool is_symmetric(const Matrix& a, double tol);

struct QrFactors {
  Matrix q;  // d x k, orthonormal columns
  Matrix r;  // k x k, upper triangular, nonnegative diagonal
};

/// Householder thin QR of a d x k matrix, k <= d. Rank-deficient columns are
/// allowed; R then carries (near-)zero diagonal entries.
QrFactors thin_qr(const Matrix& m);

struct EigenDecomposition {
  Matrix vectors;  // columns are orthonormal eigenvectors
  Vector values;   // ascending
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Throws if the
/// input is asymmetric beyond 1e-10 * max(1, ||A||_F).
EigenDecomposition sym_eig(const Matrix& s);

}  // namespace cubicqn::linalg
