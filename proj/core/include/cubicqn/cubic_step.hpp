#pragma once

#include "cubicqn/hessian_model.hpp"
#include "cubicqn/linalg.hpp"

namespace cubicqn {

/// Minimizer of <g, h> + 0.5 <B h, h> + (M/6)||h||^3 + (delta/2)||h||^2.
struct CubicStepResult {
  linalg::Vector step;
  double step_norm = 0.0;
  double model_decrease = 0.0;  // model(0) - model(step), >= 0
  int rootfind_iterations = 0;
};

/// Spectral path for low-rank models: one thin-QR + small eigendecomposition,
/// then a scalar ray-search where each trial shift costs O(k). Stationarity:
/// ||g + (B + delta I + (M/2)||h|| I) h|| <= 1e-8 max(1, ||g||).
CubicStepResult solve_low_rank(const linalg::Vector& grad, const LowRankHessianModel& model,
                               double cubic_weight, double quad_slack, double tol = 1e-10);

/// Dense path: one full symmetric eigendecomposition, then the same scalar
/// ray-search.
CubicStepResult solve_dense(const linalg::Vector& grad, const linalg::Matrix& hessian,
                            double cubic_weight, double quad_slack, double tol = 1e-10);

/// <g, h> + 0.5 <B h, h> + (M/6)||h||^3 + (delta/2)||h||^2 (the constant f(x)
/// term omitted).
double cubic_model_value(const linalg::Vector& grad, const LowRankHessianModel& model,
                         double cubic_weight, double quad_slack, const linalg::Vector& h);
double cubic_model_value(const linalg::Vector& grad, const linalg::Matrix& hessian,
                         double cubic_weight, double quad_slack, const linalg::Vector& h);

/// Aggregated lower model psi(x) = (k2/2)||x - x0||^2 + (k3/3)||x - x0||^3
///   + <g_sum, x - x0> + const, with g_sum the weighted sum of step
/// gradients. Coefficients never decrease over a run.
struct EstimatingSequenceState {
  linalg::Vector anchor;             // x0
  linalg::Vector weighted_grad_sum;  // sum_j (alpha_j / A_j) grad f(x_{j+1})
  double quad_coeff = 0.0;           // k2
  double cubic_coeff = 0.0;          // k3
  double linear_const = 0.0;         // sum_j (alpha_j / A_j) l(x0, x_{j+1})
};

/// Closed-form argmin of psi: x0 - g_sum / (k2 + k3 r) where r >= 0 solves
/// k2 r + k3 r^2 = ||g_sum||. Throws when both coefficients vanish while
/// g_sum does not.
linalg::Vector estseq_minimize(const EstimatingSequenceState& state);

double estseq_value(const EstimatingSequenceState& state, const linalg::Vector& x);

}  // namespace cubicqn
