#include "cubicqn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cubicqn/rng.hpp"

namespace cubicqn {

namespace {

constexpr int kFullHessianDimGuard = 10000;
constexpr double kSigmoidClamp = 700.0;

// Pairwise summation over fixed chunks; bit-stable run to run and more
// accurate than a sequential sum for large n.
double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

}  // namespace

double log1pexp(double t) {
  if (t > 36.0) return t + std::exp(-t);
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  if (t > -37.0) return std::log1p(std::exp(t));
  return std::exp(t);
}

double sigmoid(double t) {
  const double c = std::min(std::max(t, -kSigmoidClamp), kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-c));
}

void Oracle::check_dim(const linalg::Vector& x, const char* where) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

double Oracle::value(const linalg::Vector& x) const {
  check_dim(x, "Oracle::value");
  ++counters_.values;
  return value_impl(x);
}

double Oracle::value_grad(const linalg::Vector& x, linalg::Vector& grad) const {
  check_dim(x, "Oracle::value_grad");
  ++counters_.values;
  ++counters_.gradients;
  return value_grad_impl(x, grad);
}

linalg::Vector Oracle::hessian_vec(const linalg::Vector& x, const linalg::Vector& v) const {
  check_dim(x, "Oracle::hessian_vec");
  check_dim(v, "Oracle::hessian_vec");
  ++counters_.hvps;
  linalg::Vector out(x.size(), 0.0);
  hvp_impl(x, v, out);
  return out;
}

linalg::Matrix Oracle::full_hessian(const linalg::Vector& x) const {
  check_dim(x, "Oracle::full_hessian");
  if (dim() > kFullHessianDimGuard) {
    throw std::invalid_argument("Oracle::full_hessian: dimension guard exceeded");
  }
  ++counters_.full_hessians;
  return full_hessian_impl(x);
}

linalg::Matrix Oracle::full_hessian_impl(const linalg::Vector& x) const {
  const int d = dim();
  linalg::Matrix h(d, d);
  linalg::Vector basis(d, 0.0);
  linalg::Vector column(d, 0.0);
  for (int j = 0; j < d; ++j) {
    basis[j] = 1.0;
    std::fill(column.begin(), column.end(), 0.0);
    hvp_impl(x, basis, column);
    for (int i = 0; i < d; ++i) h(i, j) = column[i];
    basis[j] = 0.0;
  }
  return h;
}

LogisticProblem::LogisticProblem(std::shared_ptr<const Dataset> data, double regularizer)
    : data_(std::move(data)), mu_(regularizer) {
  if (!data_) throw std::invalid_argument("LogisticProblem: null dataset");
  if (mu_ < 0.0) throw std::invalid_argument("LogisticProblem: negative regularizer");
  const auto& rows = data_->rows;
  if (static_cast<int>(data_->labels.size()) != rows.rows()) {
    throw std::invalid_argument("LogisticProblem: label/row count mismatch");
  }
  for (int label : data_->labels) {
    if (label != 1 && label != -1) {
      throw std::invalid_argument("LogisticProblem: labels must be +-1");
    }
  }
  max_row_norm_ = 0.0;
  for (int i = 0; i < rows.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < rows.cols(); ++j) acc += rows(i, j) * rows(i, j);
    max_row_norm_ = std::max(max_row_norm_, std::sqrt(acc));
  }
}

double LogisticProblem::lipschitz_grad() const {
  if (num_rows() == 0) throw std::invalid_argument("lipschitz_grad: empty dataset");
  return 0.25 * max_row_norm_ * max_row_norm_ + mu_;
}

double LogisticProblem::lipschitz_hessian() const {
  if (num_rows() == 0) throw std::invalid_argument("lipschitz_hessian: empty dataset");
  // 1/(6 sqrt 3) is the maximum of |sigma''| over the real line.
  return max_row_norm_ * max_row_norm_ * max_row_norm_ / (6.0 * std::sqrt(3.0));
}

double LogisticProblem::value_impl(const linalg::Vector& x) const {
  const auto& rows = data_->rows;
  const int n = rows.rows();
  double loss = 0.0;
  if (n > 0) {
    std::vector<double> per_row(n);
    for (int i = 0; i < n; ++i) {
      double margin = 0.0;
      for (int j = 0; j < rows.cols(); ++j) margin += rows(i, j) * x[j];
      per_row[i] = log1pexp(-data_->labels[i] * margin);
    }
    loss = pairwise_sum(per_row.data(), per_row.size()) / n;
  }
  return loss + 0.5 * mu_ * linalg::dot(x, x);
}

double LogisticProblem::value_grad_impl(const linalg::Vector& x, linalg::Vector& grad) const {
  const auto& rows = data_->rows;
  const int n = rows.rows();
  const int d = rows.cols();
  grad.assign(d, 0.0);
  double loss = 0.0;
  if (n > 0) {
    std::vector<double> per_row(n);
    for (int i = 0; i < n; ++i) {
      const double b = data_->labels[i];
      double margin = 0.0;
      for (int j = 0; j < d; ++j) margin += rows(i, j) * x[j];
      margin *= b;
      per_row[i] = log1pexp(-margin);
      const double coeff = -b * sigmoid(-margin) / n;
      for (int j = 0; j < d; ++j) grad[j] += coeff * rows(i, j);
    }
    loss = pairwise_sum(per_row.data(), per_row.size()) / n;
  }
  for (int j = 0; j < d; ++j) grad[j] += mu_ * x[j];
  return loss + 0.5 * mu_ * linalg::dot(x, x);
}

void LogisticProblem::hvp_impl(const linalg::Vector& x, const linalg::Vector& v,
                               linalg::Vector& out) const {
  const auto& rows = data_->rows;
  const int n = rows.rows();
  const int d = rows.cols();
  out.assign(d, 0.0);
  for (int i = 0; i < n; ++i) {
    const double b = data_->labels[i];
    double margin = 0.0;
    double av = 0.0;
    for (int j = 0; j < d; ++j) {
      margin += rows(i, j) * x[j];
      av += rows(i, j) * v[j];
    }
    const double s = sigmoid(b * margin);
    const double coeff = s * (1.0 - s) * av / n;
    for (int j = 0; j < d; ++j) out[j] += coeff * rows(i, j);
  }
  for (int j = 0; j < d; ++j) out[j] += mu_ * v[j];
}

linalg::Matrix LogisticProblem::full_hessian_impl(const linalg::Vector& x) const {
  const auto& rows = data_->rows;
  const int n = rows.rows();
  const int d = rows.cols();
  linalg::Matrix h(d, d);
  for (int i = 0; i < n; ++i) {
    const double b = data_->labels[i];
    double margin = 0.0;
    for (int j = 0; j < d; ++j) margin += rows(i, j) * x[j];
    const double s = sigmoid(b * margin);
    const double w = s * (1.0 - s) / n;
    for (int j = 0; j < d; ++j) {
      const double wj = w * rows(i, j);
      if (wj == 0.0) continue;
      for (int k = 0; k < d; ++k) h(j, k) += wj * rows(i, k);
    }
  }
  for (int j = 0; j < d; ++j) h(j, j) += mu_;
  return h;
}

QuadraticProblem::QuadraticProblem(linalg::Matrix a, linalg::Vector b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != static_cast<int>(b_.size())) {
    throw std::invalid_argument("QuadraticProblem: shape mismatch");
  }
  const auto eig = linalg::sym_eig(a_);
  if (!eig.values.empty() && eig.values.front() < -1e-10) {
    throw std::invalid_argument("QuadraticProblem: matrix not positive semidefinite");
  }
  max_eigenvalue_ = eig.values.empty() ? 0.0 : eig.values.back();
}

double QuadraticProblem::value_impl(const linalg::Vector& x) const {
  const linalg::Vector ax = linalg::matvec(a_, x);
  return 0.5 * linalg::dot(ax, x) - linalg::dot(b_, x);
}

double QuadraticProblem::value_grad_impl(const linalg::Vector& x, linalg::Vector& grad) const {
  const linalg::Vector ax = linalg::matvec(a_, x);
  grad = ax;
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= b_[i];
  return 0.5 * linalg::dot(ax, x) - linalg::dot(b_, x);
}

void QuadraticProblem::hvp_impl(const linalg::Vector&, const linalg::Vector& v,
                                linalg::Vector& out) const {
  out = linalg::matvec(a_, v);
}

linalg::Matrix QuadraticProblem::full_hessian_impl(const linalg::Vector&) const { return a_; }

DerivativeCheckReport check_derivatives(const Oracle& oracle, const linalg::Vector& x,
                                        int trials, std::uint64_t seed) {
  if (!linalg::all_finite(x)) throw std::invalid_argument("check_derivatives: non-finite x");
  const int d = oracle.dim();
  const double eps = 1e-5 * (1.0 + linalg::norm(x));
  rng::Engine engine(seed);

  DerivativeCheckReport report;
  report.trials = trials;

  linalg::Vector grad(d);
  oracle.value_grad(x, grad);

  for (int trial = 0; trial < trials; ++trial) {
    const linalg::Vector u = rng::unit_sphere_vector(engine, d);

    linalg::Vector xp = x, xm = x;
    linalg::axpy(eps, u, xp);
    linalg::axpy(-eps, u, xm);

    const double fd = (oracle.value(xp) - oracle.value(xm)) / (2.0 * eps);
    const double du = linalg::dot(grad, u);
    report.max_grad_rel_err =
        std::max(report.max_grad_rel_err, std::abs(fd - du) / std::max(1.0, std::abs(du)));

    linalg::Vector gp(d), gm(d);
    oracle.value_grad(xp, gp);
    oracle.value_grad(xm, gm);
    const linalg::Vector hv = oracle.hessian_vec(x, u);
    double diff = 0.0;
    for (int i = 0; i < d; ++i) {
      const double fd_i = (gp[i] - gm[i]) / (2.0 * eps);
      diff += (fd_i - hv[i]) * (fd_i - hv[i]);
    }
    report.max_hvp_rel_err = std::max(
        report.max_hvp_rel_err, std::sqrt(diff) / std::max(1.0, linalg::norm(hv)));
  }
  return report;
}

}  // namespace cubicqn
