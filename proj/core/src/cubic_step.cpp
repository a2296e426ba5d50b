#include "cubicqn/cubic_step.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cubicqn {

namespace {

// Scalar form of the subproblem after diagonalization: the step for shift
// sigma = delta + (M/2) r has squared norm sum_i mass_i / (eig_i + sigma)^2,
// and the optimal r is the unique fixed point of n(r) = r.
struct ScalarSpectrum {
  std::vector<double> eigs;  // eigenvalues of B seen by the gradient
  std::vector<double> mass;  // squared gradient loadings, same length
  double min_eig = 0.0;      // global minimum eigenvalue of B
  double grad_norm = 0.0;
};

double step_norm_at(const ScalarSpectrum& sp, double cubic_weight, double quad_slack, double r) {
  const double sigma = quad_slack + 0.5 * cubic_weight * r;
  double acc = 0.0;
  for (std::size_t i = 0; i < sp.eigs.size(); ++i) {
    const double den = sp.eigs[i] + sigma;
    acc += sp.mass[i] / (den * den);
  }
  return std::sqrt(acc);
}

double step_norm_slope(const ScalarSpectrum& sp, double cubic_weight, double quad_slack,
                       double r, double n_of_r) {
  if (n_of_r == 0.0) return 0.0;
  const double sigma = quad_slack + 0.5 * cubic_weight * r;
  double acc = 0.0;
  for (std::size_t i = 0; i < sp.eigs.size(); ++i) {
    const double den = sp.eigs[i] + sigma;
    acc += sp.mass[i] / (den * den * den);
  }
  return -0.5 * cubic_weight * acc / n_of_r;
}

struct RayRoot {
  double r = 0.0;
  int iterations = 0;
};

// Safeguarded Newton/bisection on phi(r) = n(r) - r. phi is convex and
// strictly decreasing on (r_pole, inf), so the bracket never lies.
RayRoot solve_ray(const ScalarSpectrum& sp, double cubic_weight, double quad_slack, double tol) {
  RayRoot out;
  if (sp.grad_norm == 0.0) return out;

  double lo = 0.0;
  if (sp.min_eig + quad_slack < 0.0) {
    // Shift must clear the most negative eigenvalue or the model is unbounded
    // along that direction.
    lo = 2.0 * (-(sp.min_eig + quad_slack)) / cubic_weight;
  }
  double hi = std::sqrt(2.0 * sp.grad_norm / cubic_weight);
  if (hi <= lo) hi = 2.0 * lo + 1.0;
  int expand = 0;
  while (step_norm_at(sp, cubic_weight, quad_slack, hi) > hi) {
    hi *= 2.0;
    if (++expand > 240) {
      throw std::runtime_error("cubic ray-search: failed to bracket (hard case)");
    }
  }

  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    ++out.iterations;
    const double n = step_norm_at(sp, cubic_weight, quad_slack, r);
    const double phi = n - r;
    if (phi > 0.0) {
      lo = r;
    } else {
      hi = r;
    }
    const double residual = 0.5 * cubic_weight * std::abs(phi) * n;
    if ((residual <= 1e-10 * std::max(1.0, sp.grad_norm) &&
         std::abs(phi) <= tol * std::max(1.0, r)) ||
        hi - lo <= 1e-15 * std::max(1.0, hi)) {
      out.r = r;
      return out;
    }
    double next;
    const double slope = step_norm_slope(sp, cubic_weight, quad_slack, r, n) - 1.0;
    if (std::isfinite(phi) && slope < 0.0) {
      next = r - phi / slope;
    } else {
      next = 0.5 * (lo + hi);
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }
  out.r = 0.5 * (lo + hi);
  return out;
}

void check_inputs(const linalg::Vector& grad, double cubic_weight, double quad_slack) {
  if (!linalg::all_finite(grad)) throw std::invalid_argument("cubic step: non-finite gradient");
  if (!(cubic_weight > 0.0)) throw std::invalid_argument("cubic step: cubic weight must be > 0");
  if (!(quad_slack >= 0.0)) throw std::invalid_argument("cubic step: negative slack");
}

double value_from_bh(const linalg::Vector& grad, const linalg::Vector& bh, double cubic_weight,
                     double quad_slack, const linalg::Vector& h) {
  const double hnorm = linalg::norm(h);
  return linalg::dot(grad, h) + 0.5 * linalg::dot(bh, h) +
         cubic_weight / 6.0 * hnorm * hnorm * hnorm + 0.5 * quad_slack * hnorm * hnorm;
}

}  // namespace

CubicStepResult solve_low_rank(const linalg::Vector& grad, const LowRankHessianModel& model,
                               double cubic_weight, double quad_slack, double tol) {
  check_inputs(grad, cubic_weight, quad_slack);
  if (static_cast<int>(grad.size()) != model.dim()) {
    throw std::invalid_argument("solve_low_rank: dimension mismatch");
  }
  if (quad_slack + model.base_scale() < 0.0) {
    throw std::invalid_argument("solve_low_rank: delta + base scale negative");
  }

  CubicStepResult out;
  out.step.assign(grad.size(), 0.0);
  const double gnorm = linalg::norm(grad);
  if (gnorm == 0.0) return out;

  const SpectralFactor& sf = model.spectral();
  const int k = static_cast<int>(sf.eigenvalues.size());
  const double base = model.base_scale();

  linalg::Vector loadings =
      k > 0 ? linalg::matvec_transposed(sf.basis, grad) : linalg::Vector{};
  double in_span_sq = 0.0;
  for (double v : loadings) in_span_sq += v * v;
  const double perp_sq = std::max(0.0, gnorm * gnorm - in_span_sq);

  ScalarSpectrum sp;
  sp.grad_norm = gnorm;
  sp.min_eig = base + (k > 0 ? std::min(0.0, sf.eigenvalues.front()) : 0.0);
  sp.eigs.reserve(k + 1);
  sp.mass.reserve(k + 1);
  for (int i = 0; i < k; ++i) {
    sp.eigs.push_back(base + sf.eigenvalues[i]);
    sp.mass.push_back(loadings[i] * loadings[i]);
  }
  sp.eigs.push_back(base);
  sp.mass.push_back(perp_sq);

  const RayRoot root = solve_ray(sp, cubic_weight, quad_slack, tol);
  out.rootfind_iterations = root.iterations;

  const double sigma = quad_slack + 0.5 * cubic_weight * root.r;
  // h = -[ P diag(1/(base+lambda+sigma)) P^T g + (g - P P^T g)/(base+sigma) ]
  linalg::Vector h(grad.size(), 0.0);
  if (k > 0) {
    linalg::Vector coeffs(k);
    for (int i = 0; i < k; ++i) coeffs[i] = loadings[i] / (base + sf.eigenvalues[i] + sigma);
    const linalg::Vector in_span = linalg::matvec(sf.basis, coeffs);
    const linalg::Vector reproject = linalg::matvec(sf.basis, loadings);
    const double inv_perp = 1.0 / (base + sigma);
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] = -(in_span[i] + (grad[i] - reproject[i]) * inv_perp);
    }
  } else {
    const double inv = 1.0 / (base + sigma);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = -grad[i] * inv;
  }

  out.step = std::move(h);
  out.step_norm = linalg::norm(out.step);
  out.model_decrease =
      -value_from_bh(grad, model.apply(out.step), cubic_weight, quad_slack, out.step);
  return out;
}

CubicStepResult solve_dense(const linalg::Vector& grad, const linalg::Matrix& hessian,
                            double cubic_weight, double quad_slack, double tol) {
  check_inputs(grad, cubic_weight, quad_slack);
  if (hessian.rows() != static_cast<int>(grad.size())) {
    throw std::invalid_argument("solve_dense: dimension mismatch");
  }

  CubicStepResult out;
  out.step.assign(grad.size(), 0.0);
  const double gnorm = linalg::norm(grad);
  if (gnorm == 0.0) return out;

  const auto eig = linalg::sym_eig(hessian);
  const linalg::Vector loadings = linalg::matvec_transposed(eig.vectors, grad);

  ScalarSpectrum sp;
  sp.grad_norm = gnorm;
  sp.min_eig = eig.values.front();
  sp.eigs = eig.values;
  sp.mass.resize(loadings.size());
  for (std::size_t i = 0; i < loadings.size(); ++i) sp.mass[i] = loadings[i] * loadings[i];

  const RayRoot root = solve_ray(sp, cubic_weight, quad_slack, tol);
  out.rootfind_iterations = root.iterations;

  const double sigma = quad_slack + 0.5 * cubic_weight * root.r;
  linalg::Vector coeffs(loadings.size());
  for (std::size_t i = 0; i < loadings.size(); ++i) {
    coeffs[i] = -loadings[i] / (eig.values[i] + sigma);
  }
  out.step = linalg::matvec(eig.vectors, coeffs);
  out.step_norm = linalg::norm(out.step);
  out.model_decrease = -value_from_bh(grad, linalg::matvec(hessian, out.step), cubic_weight,
                                      quad_slack, out.step);
  return out;
}

double cubic_model_value(const linalg::Vector& grad, const LowRankHessianModel& model,
                         double cubic_weight, double quad_slack, const linalg::Vector& h) {
  return value_from_bh(grad, model.apply(h), cubic_weight, quad_slack, h);
}

double cubic_model_value(const linalg::Vector& grad, const linalg::Matrix& hessian,
                         double cubic_weight, double quad_slack, const linalg::Vector& h) {
  return value_from_bh(grad, linalg::matvec(hessian, h), cubic_weight, quad_slack, h);
}

linalg::Vector estseq_minimize(const EstimatingSequenceState& state) {
  const double gnorm = linalg::norm(state.weighted_grad_sum);
  if (gnorm == 0.0) return state.anchor;
  const double k2 = state.quad_coeff;
  const double k3 = state.cubic_coeff;
  if (k2 < 0.0 || k3 < 0.0) throw std::invalid_argument("estseq_minimize: negative coefficient");
  if (k2 + k3 == 0.0) {
    throw std::invalid_argument("estseq_minimize: zero coefficients with nonzero gradient sum");
  }
  // r >= 0 solving k2 r + k3 r^2 = ||g||, written without cancellation.
  double r;
  if (k3 == 0.0) {
    r = gnorm / k2;
  } else {
    r = 2.0 * gnorm / (k2 + std::sqrt(k2 * k2 + 4.0 * k3 * gnorm));
  }
  linalg::Vector y = state.anchor;
  linalg::axpy(-1.0 / (k2 + k3 * r), state.weighted_grad_sum, y);
  return y;
}

double estseq_value(const EstimatingSequenceState& state, const linalg::Vector& x) {
  const linalg::Vector shift = linalg::subtract(x, state.anchor);
  const double r = linalg::norm(shift);
  return 0.5 * state.quad_coeff * r * r + state.cubic_coeff / 3.0 * r * r * r +
         linalg::dot(state.weighted_grad_sum, shift) + state.linear_const;
}

}  // namespace cubicqn
