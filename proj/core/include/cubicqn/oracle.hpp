#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cubicqn/linalg.hpp"

namespace cubicqn {

/// Evaluation counters. One full Hessian is additionally charged as dim
/// Hessian-vector products in hvp_equivalent, the unified cost unit used by
/// all reporting.
struct EvalCounters {
  std::int64_t values = 0;
  std::int64_t gradients = 0;
  std::int64_t hvps = 0;
  std::int64_t full_hessians = 0;

  std::int64_t hvp_equivalent(int dim) const {
    return hvps + static_cast<std::int64_t>(dim) * full_hessians;
  }
};

/// Objective-function oracle: f, grad f, Hessian-vector products, and
/// (optionally) the materialized Hessian. Configuration is immutable after
/// construction; every evaluation bumps the counters.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual int dim() const = 0;

  double value(const linalg::Vector& x) const;
  double value_grad(const linalg::Vector& x, linalg::Vector& grad) const;
  linalg::Vector hessian_vec(const linalg::Vector& x, const linalg::Vector& v) const;
  // Guarded at dim <= 10^4; charged as one full_hessians count.
  linalg::Matrix full_hessian(const linalg::Vector& x) const;

  virtual double lipschitz_grad() const = 0;     // conservative L1 bound
  virtual double lipschitz_hessian() const = 0;  // conservative L2 bound

  EvalCounters& counters() const { return counters_; }
  void reset_counters() const { counters_ = EvalCounters{}; }

 protected:
  virtual double value_impl(const linalg::Vector& x) const = 0;
  virtual double value_grad_impl(const linalg::Vector& x, linalg::Vector& grad) const = 0;
  virtual void hvp_impl(const linalg::Vector& x, const linalg::Vector& v,
                        linalg::Vector& out) const = 0;
  // Default: stack hvp_impl against basis vectors (not charged per column).
  virtual linalg::Matrix full_hessian_impl(const linalg::Vector& x) const;

 private:
  void check_dim(const linalg::Vector& x, const char* where) const;
  mutable EvalCounters counters_;
};

/// Rows, +-1 labels, and provenance of a classification dataset. Rows are
/// stored dense; the paper-scale sparse sets are out of scope here.
struct Dataset {
  linalg::Matrix rows;      // n x d
  std::vector<int> labels;  // entries in {-1, +1}
  std::string source;
};

/// l2-regularized logistic regression:
///   f(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) + (mu/2) ||x||^2.
class LogisticProblem final : public Oracle {
 public:
  LogisticProblem(std::shared_ptr<const Dataset> data, double regularizer);

  int dim() const override { return data_->rows.cols(); }
  int num_rows() const { return data_->rows.rows(); }
  double regularizer() const { return mu_; }
  const Dataset& dataset() const { return *data_; }

  // L1 = max_i ||a_i||^2 / 4 + mu; L2 = max_i ||a_i||^3 / (6 sqrt 3).
  // Throws on an empty dataset.
  double lipschitz_grad() const override;
  double lipschitz_hessian() const override;

 protected:
  double value_impl(const linalg::Vector& x) const override;
  double value_grad_impl(const linalg::Vector& x, linalg::Vector& grad) const override;
  void hvp_impl(const linalg::Vector& x, const linalg::Vector& v,
                linalg::Vector& out) const override;
  linalg::Matrix full_hessian_impl(const linalg::Vector& x) const override;

 private:
  std::shared_ptr<const Dataset> data_;
  double mu_;
  double max_row_norm_;
};

/// f(x) = 0.5 x^T A x - b^T x with symmetric PSD A.
class QuadraticProblem final : public Oracle {
 public:
  QuadraticProblem(linalg::Matrix a, linalg::Vector b);

  int dim() const override { return static_cast<int>(b_.size()); }
  const linalg::Matrix& matrix() const { return a_; }

  double lipschitz_grad() const override { return max_eigenvalue_; }
  double lipschitz_hessian() const override { return 0.0; }

 protected:
  double value_impl(const linalg::Vector& x) const override;
  double value_grad_impl(const linalg::Vector& x, linalg::Vector& grad) const override;
  void hvp_impl(const linalg::Vector& x, const linalg::Vector& v,
                linalg::Vector& out) const override;
  linalg::Matrix full_hessian_impl(const linalg::Vector& x) const override;

 private:
  linalg::Matrix a_;
  linalg::Vector b_;
  double max_eigenvalue_;
};

struct DerivativeCheckReport {
  double max_grad_rel_err = 0.0;
  double max_hvp_rel_err = 0.0;
  int trials = 0;
};

/// Central-difference verification of the gradient and the Hessian-vector
/// product over `trials` random unit directions, step 1e-5 * (1 + ||x||).
DerivativeCheckReport check_derivatives(const Oracle& oracle, const linalg::Vector& x,
                                        int trials, std::uint64_t seed);

// Numerically stable scalar pieces of the logistic loss.
double log1pexp(double t);
double sigmoid(double t);

}  // namespace cubicqn
