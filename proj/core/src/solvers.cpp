#include "cubicqn/solvers.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "cubicqn/rng.hpp"

namespace cubicqn {

namespace {

using Clock = std::chrono::steady_clock;

double resolve_cubic_weight(const Oracle& oracle, const SolverConfig& config) {
  if (config.cubic_weight > 0.0) return config.cubic_weight;
  // L2 = 0 (quadratics) still needs a positive weight for the solver.
  return std::max(2.0 * oracle.lipschitz_hessian(), 1e-8);
}

void validate_common(const Oracle& oracle, const SolverConfig& config,
                     const linalg::Vector& x0) {
  if (static_cast<int>(x0.size()) != oracle.dim()) {
    throw std::invalid_argument("solver: x0 dimension mismatch");
  }
  if (!linalg::all_finite(x0)) throw std::invalid_argument("solver: non-finite x0");
  if (!(config.slack_increase > 1.0)) throw std::invalid_argument("solver: gamma_inc must be > 1");
  if (!(config.initial_slack >= 0.0)) throw std::invalid_argument("solver: negative delta_0");
  if (config.memory < 1) throw std::invalid_argument("solver: memory must be >= 1");
  if (config.max_iterations < 0) throw std::invalid_argument("solver: negative max_iterations");
}

class RecordKeeper {
 public:
  explicit RecordKeeper(const Oracle& oracle) : oracle_(&oracle), start_(Clock::now()) {}

  void append(int iteration, double f, double grad_norm, double slack, int repeats,
              double step_norm) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.f = f;
    rec.grad_norm = grad_norm;
    rec.slack = slack;
    rec.inner_repeats = repeats;
    rec.step_norm = step_norm;
    rec.grad_evals = oracle_->counters().gradients;
    rec.hvp_equiv = oracle_->counters().hvp_equivalent(oracle_->dim());
    rec.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start_).count();
    trace.push_back(rec);
  }

  SolverTrace trace;

 private:
  const Oracle* oracle_;
  Clock::time_point start_;
};

bool uses_history(HessianPolicy policy) {
  return policy == HessianPolicy::LbfgsHistory || policy == HessianPolicy::LbfgsHistoryDamped ||
         policy == HessianPolicy::Lsr1History || policy == HessianPolicy::Combined;
}

struct HessianPlan {
  std::optional<linalg::Matrix> dense;
  std::optional<LowRankHessianModel> low_rank;
};

HessianPlan build_hessian(const Oracle& oracle, const SolverConfig& config,
                          const PairBuffer& buffer, const linalg::Vector& x, int iteration) {
  HessianPlan plan;
  const int d = oracle.dim();
  switch (config.policy) {
    case HessianPolicy::Exact:
      plan.dense = oracle.full_hessian(x);
      break;
    case HessianPolicy::LbfgsHistory:
      plan.low_rank = build_history_model(buffer, QnUpdateKind::Lbfgs, 0.0, d);
      break;
    case HessianPolicy::LbfgsHistoryDamped:
      plan.low_rank = build_history_model(buffer, QnUpdateKind::LbfgsDamped, 0.0, d);
      break;
    case HessianPolicy::Lsr1History:
      plan.low_rank = build_history_model(buffer, QnUpdateKind::Lsr1, 0.0, d);
      break;
    case HessianPolicy::BroydenSampling:
      plan.low_rank = build_sampling_model(oracle, x, config.memory,
                                           rng::mix(config.seed, iteration),
                                           config.broyden_upsilon);
      break;
    case HessianPolicy::Combined:
      plan.low_rank = refine_with_sampled_broyden(
          build_history_model(buffer, QnUpdateKind::Lbfgs, 0.0, d), oracle, x, config.memory,
          rng::mix(config.seed, iteration), config.broyden_upsilon);
      break;
  }
  return plan;
}

CubicStepResult plan_solve(const HessianPlan& plan, const linalg::Vector& grad, double M,
                           double delta, double tol) {
  if (plan.dense) return solve_dense(grad, *plan.dense, M, delta, tol);
  return solve_low_rank(grad, *plan.low_rank, M, delta, tol);
}

// min{ ||g||^2/(4 delta), ||g||^(3/2)/sqrt(3M) }; the delta term drops out at
// delta = 0.
double certificate_threshold(double grad_norm, double M, double delta) {
  double rhs = grad_norm * std::sqrt(grad_norm) / std::sqrt(3.0 * M);
  if (delta > 0.0) rhs = std::min(rhs, grad_norm * grad_norm / (4.0 * delta));
  return rhs;
}

// x + h rounded back to x: no representable progress remains, so the
// certificate can never fire and the iterate is terminal.
bool no_movement(const linalg::Vector& x, const linalg::Vector& x_next) {
  return x == x_next;
}

[[noreturn]] void throw_inner_cap(const char* method, int iteration, double delta,
                                  double grad_norm, SolverTrace trace) {
  std::ostringstream msg;
  msg << method << ": inner repeat cap exceeded at iteration " << iteration
      << " (delta=" << delta << ", |grad|=" << grad_norm
      << "); the slack cannot certify progress, cubic weight may be below 2*L2";
  throw SolverError(msg.str(), std::move(trace));
}

}  // namespace

double accel_alpha(int t) { return 3.0 / (t + 3.0); }

double accel_a(int t) { return 6.0 / ((t + 1.0) * (t + 2.0) * (t + 3.0)); }

SolverResult adaptive_inexact_crn(const Oracle& oracle, const SolverConfig& config,
                                  const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  const double M = resolve_cubic_weight(oracle, config);
  double delta = config.initial_slack;

  SolverResult result;
  RecordKeeper rec(oracle);
  PairBuffer buffer(config.memory, PairBuffer::Policy::History,
                    config.policy != HessianPolicy::Lsr1History);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, delta, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    const HessianPlan plan = build_hessian(oracle, config, buffer, x, t);

    int repeats = 0;
    linalg::Vector x_next;
    linalg::Vector g_next(oracle.dim());
    double f_next = 0.0;
    double gn_next = 0.0;
    double step_norm = 0.0;
    bool at_tolerance = false;
    for (;;) {
      const CubicStepResult step = plan_solve(plan, g, M, delta, config.subproblem_tol);
      x_next = linalg::add(x, step.step);
      f_next = oracle.value_grad(x_next, g_next);
      gn_next = linalg::norm(g_next);
      step_norm = step.step_norm;
      if (gn_next <= config.grad_tolerance || no_movement(x, x_next)) {
        // Stop is imminent; the certificate is vacuous at a stationary point.
        at_tolerance = true;
        break;
      }
      const double lhs = linalg::dot(g_next, linalg::subtract(x, x_next));
      if (lhs >= certificate_threshold(gn_next, M, delta)) break;
      delta *= config.slack_increase;
      ++result.slack_increase_events;
      if (++repeats > config.max_inner_repeats) {
        throw_inner_cap("adaptive_inexact_crn", t, delta, gn_next, std::move(rec.trace));
      }
    }

    if (config.capture_steps && !at_tolerance) {
      result.certificates.push_back({x, x_next, delta});
    }
    if (uses_history(config.policy)) {
      buffer.push(linalg::subtract(x_next, x), linalg::subtract(g_next, g));
    }
    x = std::move(x_next);
    f = f_next;
    g = std::move(g_next);
    gnorm = gn_next;
    rec.append(t + 1, f, gnorm, delta, repeats, step_norm);
    if (at_tolerance) {
      result.status = "converged";
      break;
    }
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult adaptive_accelerated_crn(const Oracle& oracle, const SolverConfig& config,
                                      const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  const double M = resolve_cubic_weight(oracle, config);
  double delta = config.initial_slack;
  const int d = oracle.dim();

  SolverResult result;
  RecordKeeper rec(oracle);
  PairBuffer buffer(config.memory, PairBuffer::Policy::History,
                    config.policy != HessianPolicy::Lsr1History);

  linalg::Vector x = x0;
  linalg::Vector y = x0;
  linalg::Vector g(d);
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, delta, 0, 0.0);

  EstimatingSequenceState state;
  state.anchor = x0;
  state.weighted_grad_sum.assign(d, 0.0);
  state.quad_coeff = 0.0;
  state.cubic_coeff = 8.0 * M / 3.0;  // (8M/3) alpha_0^3 / A_0
  double committed_quad_coeff = 0.0;  // kappa_2^t, set by the previous step

  struct Snapshot {
    linalg::Vector x, y;
    EstimatingSequenceState state;
    double committed_quad_coeff;
    double delta;
    EvalCounters counters;
  };

  result.status = "max_iterations";
  int t = 0;
  int rollbacks_this_step = 0;
  while (t < config.max_iterations) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    const Snapshot snap{x, y, state, committed_quad_coeff, delta, oracle.counters()};
    const double alpha = accel_alpha(t);
    const double a_t = accel_a(t);

    linalg::Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = (1.0 - alpha) * x[i] + alpha * y[i];

    const HessianPlan plan = build_hessian(oracle, config, buffer, v, t);
    linalg::Vector gv(d);
    oracle.value_grad(v, gv);

    int repeats = 0;
    linalg::Vector x_next;
    linalg::Vector g_next(d);
    double f_next = 0.0;
    double gn_next = 0.0;
    double step_norm = 0.0;
    bool at_tolerance = false;
    for (;;) {
      const CubicStepResult step = plan_solve(plan, gv, M, delta, config.subproblem_tol);
      x_next = linalg::add(v, step.step);
      f_next = oracle.value_grad(x_next, g_next);
      gn_next = linalg::norm(g_next);
      step_norm = step.step_norm;
      if (gn_next <= config.grad_tolerance || no_movement(v, x_next)) {
        at_tolerance = true;
        break;
      }
      const double lhs = linalg::dot(g_next, linalg::subtract(v, x_next));
      if (lhs >= certificate_threshold(gn_next, M, delta)) break;
      delta *= config.slack_increase;
      ++result.slack_increase_events;
      if (++repeats > config.max_inner_repeats) {
        throw_inner_cap("adaptive_accelerated_crn", t, delta, gn_next, std::move(rec.trace));
      }
    }

    const double quad_commit = 4.0 * delta * alpha * alpha / a_t;
    state.quad_coeff = quad_commit;
    const double alpha_next = accel_alpha(t + 1);
    state.cubic_coeff =
        8.0 * M / 3.0 * alpha_next * alpha_next * alpha_next / accel_a(t + 1);
    linalg::axpy(alpha / a_t, g_next, state.weighted_grad_sum);
    state.linear_const +=
        alpha / a_t * (f_next + linalg::dot(g_next, linalg::subtract(state.anchor, x_next)));
    const linalg::Vector y_next = estseq_minimize(state);

    // Safety check: the step is proof-valid when the new minimizer stays
    // closer to the previous one than to the anchor, or when the previously
    // committed quadratic coefficient already dominates 2 delta alpha^2 / A.
    const bool distance_bad =
        linalg::norm(linalg::subtract(y_next, y)) > linalg::norm(linalg::subtract(y_next, x0));
    const bool committed_small = committed_quad_coeff < 0.5 * quad_commit;
    if (!at_tolerance && distance_bad && committed_small) {
      x = snap.x;
      y = snap.y;
      state = snap.state;
      committed_quad_coeff = snap.committed_quad_coeff;
      oracle.counters() = snap.counters;
      delta = std::max(delta, snap.delta) * config.slack_increase;
      ++result.slack_increase_events;
      ++result.rollback_events;
      if (++rollbacks_this_step > config.rollback_cap) {
        std::ostringstream msg;
        msg << "adaptive_accelerated_crn: rollback cap exceeded at iteration " << t
            << " (delta=" << delta << ")";
        throw SolverError(msg.str(), std::move(rec.trace));
      }
      continue;
    }
    rollbacks_this_step = 0;

    if (config.capture_steps && !at_tolerance) {
      result.certificates.push_back({v, x_next, delta});
    }
    if (uses_history(config.policy)) {
      buffer.push(linalg::subtract(x_next, x), linalg::subtract(g_next, g));
    }
    committed_quad_coeff = quad_commit;
    x = std::move(x_next);
    y = y_next;
    f = f_next;
    g = std::move(g_next);
    gnorm = gn_next;
    rec.append(t + 1, f, gnorm, delta, repeats, step_norm);
    ++t;
    if (at_tolerance) {
      result.status = "converged";
      break;
    }
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult alt_adaptive_cubic(const Oracle& oracle, const SolverConfig& config,
                                const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  if (!(config.slack_decrease > 0.0 && config.slack_decrease <= 1.0)) {
    throw std::invalid_argument("alt_adaptive_cubic: gamma_dec must be in (0, 1]");
  }
  const double M = resolve_cubic_weight(oracle, config);
  double slack_up = config.initial_slack;

  SolverResult result;
  RecordKeeper rec(oracle);
  PairBuffer buffer(config.memory, PairBuffer::Policy::History,
                    config.policy != HessianPolicy::Lsr1History);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, slack_up, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    const HessianPlan plan = build_hessian(oracle, config, buffer, x, t);

    int repeats = 0;
    linalg::Vector x_next;
    double f_next = 0.0;
    double step_norm = 0.0;
    for (;;) {
      const CubicStepResult step = plan_solve(plan, g, M, slack_up, config.subproblem_tol);
      x_next = linalg::add(x, step.step);
      f_next = oracle.value(x_next);
      step_norm = step.step_norm;
      if (no_movement(x, x_next)) break;
      const double bound = f + 0.5 * linalg::dot(g, step.step) -
                           M / 12.0 * step_norm * step_norm * step_norm;
      // The eps-scale slack keeps the test meaningful once the decrease falls
      // below the floating-point resolution of f.
      if (f_next <= bound + 8.0 * 2.2e-16 * std::max(1.0, std::abs(f))) break;
      slack_up *= config.slack_increase;
      ++result.slack_increase_events;
      if (++repeats > config.max_inner_repeats) {
        throw_inner_cap("alt_adaptive_cubic", t, slack_up, gnorm, std::move(rec.trace));
      }
    }
    const double slack_used = slack_up;
    slack_up *= config.slack_decrease;

    linalg::Vector g_next(oracle.dim());
    f_next = oracle.value_grad(x_next, g_next);
    if (uses_history(config.policy)) {
      buffer.push(linalg::subtract(x_next, x), linalg::subtract(g_next, g));
    }
    x = std::move(x_next);
    f = f_next;
    g = std::move(g_next);
    gnorm = linalg::norm(g);
    rec.append(t + 1, f, gnorm, slack_used, repeats, step_norm);
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult gradient_descent(const Oracle& oracle, const SolverConfig& config,
                              double learning_rate, const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  const double lr = learning_rate > 0.0 ? learning_rate : 1.0 / oracle.lipschitz_grad();

  SolverResult result;
  RecordKeeper rec(oracle);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, 0.0, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    const double step_norm = lr * gnorm;
    linalg::axpy(-lr, g, x);
    f = oracle.value_grad(x, g);
    gnorm = linalg::norm(g);
    rec.append(t + 1, f, gnorm, 0.0, 0, step_norm);
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult damped_newton(const Oracle& oracle, const SolverConfig& config, double damping,
                           const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  constexpr double kJitter = 1e-12;

  SolverResult result;
  RecordKeeper rec(oracle);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, 0.0, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    const linalg::Matrix hessian = oracle.full_hessian(x);
    const auto eig = linalg::sym_eig(hessian);
    if (eig.values.front() + kJitter <= 0.0) {
      throw SolverError("damped_newton: system singular beyond jitter", std::move(rec.trace));
    }
    linalg::Vector coeffs = linalg::matvec_transposed(eig.vectors, g);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] /= eig.values[i] + kJitter;
    const linalg::Vector direction = linalg::matvec(eig.vectors, coeffs);
    const double step_norm = damping * linalg::norm(direction);
    linalg::axpy(-damping, direction, x);
    f = oracle.value_grad(x, g);
    gnorm = linalg::norm(g);
    rec.append(t + 1, f, gnorm, 0.0, 0, step_norm);
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult classical_lbfgs(const Oracle& oracle, const SolverConfig& config,
                             double learning_rate, const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  if (!(learning_rate > 0.0)) throw std::invalid_argument("classical_lbfgs: lr must be > 0");

  SolverResult result;
  RecordKeeper rec(oracle);
  PairBuffer buffer(config.memory, PairBuffer::Policy::History, true);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, 0.0, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    // Two-loop recursion for H g with H0 = I.
    const auto& pairs = buffer.pairs();
    linalg::Vector q = g;
    std::vector<double> alphas(pairs.size(), 0.0);
    std::vector<double> rhos(pairs.size(), 0.0);
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      rhos[i] = 1.0 / linalg::dot(pairs[i].y, pairs[i].s);
      alphas[i] = rhos[i] * linalg::dot(pairs[i].s, q);
      linalg::axpy(-alphas[i], pairs[i].y, q);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = rhos[i] * linalg::dot(pairs[i].y, q);
      linalg::axpy(alphas[i] - beta, pairs[i].s, q);
    }

    const linalg::Vector x_prev = x;
    const linalg::Vector g_prev = g;
    const double step_norm = learning_rate * linalg::norm(q);
    linalg::axpy(-learning_rate, q, x);
    f = oracle.value_grad(x, g);
    gnorm = linalg::norm(g);
    buffer.push(linalg::subtract(x, x_prev), linalg::subtract(g, g_prev));
    rec.append(t + 1, f, gnorm, 0.0, 0, step_norm);
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

SolverResult classical_lsr1(const Oracle& oracle, const SolverConfig& config,
                            double learning_rate, const linalg::Vector& x0) {
  validate_common(oracle, config, x0);
  if (!(learning_rate > 0.0)) throw std::invalid_argument("classical_lsr1: lr must be > 0");

  SolverResult result;
  RecordKeeper rec(oracle);
  PairBuffer buffer(config.memory, PairBuffer::Policy::History, false);

  linalg::Vector x = x0;
  linalg::Vector g(oracle.dim());
  double f = oracle.value_grad(x, g);
  double gnorm = linalg::norm(g);
  rec.append(0, f, gnorm, 0.0, 0, 0.0);

  result.status = "max_iterations";
  for (int t = 0; t < config.max_iterations; ++t) {
    if (gnorm <= config.grad_tolerance) {
      result.status = "converged";
      break;
    }
    // Inverse SR1 built from the buffered pairs, H0 = I; SR1 is self-dual so
    // the inverse update swaps the roles of s and y.
    std::vector<ModelTerm> terms;
    for (const auto& pair : buffer.pairs()) {
      linalg::Vector u = pair.y;  // u = s - H y
      for (const ModelTerm& term : terms) {
        linalg::axpy(term.coeff * linalg::dot(term.vec, pair.y), term.vec, u);
      }
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = pair.s[i] - u[i];
      const double uy = linalg::dot(u, pair.y);
      if (std::abs(uy) <= 1e-8 * linalg::norm(u) * linalg::norm(pair.y)) continue;
      terms.push_back({1.0 / uy, std::move(u)});
    }
    linalg::Vector direction = g;
    for (const ModelTerm& term : terms) {
      linalg::axpy(term.coeff * linalg::dot(term.vec, g), term.vec, direction);
    }

    const linalg::Vector x_prev = x;
    const linalg::Vector g_prev = g;
    const double step_norm = learning_rate * linalg::norm(direction);
    linalg::axpy(-learning_rate, direction, x);
    f = oracle.value_grad(x, g);
    gnorm = linalg::norm(g);
    buffer.push(linalg::subtract(x, x_prev), linalg::subtract(g, g_prev));
    rec.append(t + 1, f, gnorm, 0.0, 0, step_norm);
  }
  if (gnorm <= config.grad_tolerance) result.status = "converged";

  result.x = std::move(x);
  result.trace = std::move(rec.trace);
  return result;
}

}  // namespace cubicqn
