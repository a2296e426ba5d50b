#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubicqn/cubic_step.hpp"
#include "cubicqn/hessian_model.hpp"
#include "cubicqn/linalg.hpp"
#include "cubicqn/oracle.hpp"

namespace cubicqn {

enum class HessianPolicy {
  Exact,
  LbfgsHistory,
  LbfgsHistoryDamped,
  Lsr1History,
  BroydenSampling,
  Combined,  // history fold refined by sampled Broyden corrections
};

struct SolverConfig {
  // Cubic weight M; values <= 0 derive max(2 * L2, 1e-8) from the oracle.
  double cubic_weight = 0.0;
  double initial_slack = 1e-8;  // delta_0
  double slack_increase = 2.0;  // gamma_inc, > 1
  double slack_decrease = 0.5;  // gamma_dec in (0, 1]; alt_adaptive_cubic only
  int memory = 10;
  HessianPolicy policy = HessianPolicy::LbfgsHistory;
  double broyden_upsilon = 0.0;
  int max_iterations = 200;
  double grad_tolerance = 1e-9;
  int max_inner_repeats = 60;   // per outer iteration
  int rollback_cap = 30;        // per accelerated step
  std::uint64_t seed = 0;
  bool capture_steps = false;   // record certificate vectors for replay
  double subproblem_tol = 1e-10;
};

struct IterationRecord {
  int iteration = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double slack = 0.0;  // delta in effect for the step producing this iterate
  int inner_repeats = 0;
  double step_norm = 0.0;
  std::int64_t grad_evals = 0;
  std::int64_t hvp_equiv = 0;
  std::int64_t wall_ns = 0;
};

using SolverTrace = std::vector<IterationRecord>;

/// Accepted-step snapshot for post-hoc verification of the adaptive
/// certificate; filled only when SolverConfig::capture_steps is set.
struct StepCertificate {
  linalg::Vector reference;  // x_t for the basic method, v_t for the accelerated one
  linalg::Vector next;       // x_{t+1}
  double slack = 0.0;
};

struct SolverResult {
  linalg::Vector x;
  SolverTrace trace;
  std::string status;  // "converged" or "max_iterations"
  std::vector<StepCertificate> certificates;
  int slack_increase_events = 0;
  int rollback_events = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, SolverTrace partial)
      : std::runtime_error(message), trace(std::move(partial)) {}
  SolverTrace trace;
};

/// Adaptive inexact cubic-regularized Newton. Accepted iterates are monotone
/// in f; delta never decreases within a run.
SolverResult adaptive_inexact_crn(const Oracle& oracle, const SolverConfig& config,
                                  const linalg::Vector& x0);

/// Accelerated variant driven by the estimating sequence, with the
/// distance/coefficient safety check and bounded per-step rollback. Not
/// monotone in f.
SolverResult adaptive_accelerated_crn(const Oracle& oracle, const SolverConfig& config,
                                      const linalg::Vector& x0);

/// Alternative adaptive method testing the model upper bound on f directly;
/// the slack decreases by gamma_dec after every accepted step.
SolverResult alt_adaptive_cubic(const Oracle& oracle, const SolverConfig& config,
                                const linalg::Vector& x0);

/// learning_rate <= 0 picks 1 / L1.
SolverResult gradient_descent(const Oracle& oracle, const SolverConfig& config,
                              double learning_rate, const linalg::Vector& x0);

/// x <- x - damping * (Hess f(x) + 1e-12 I)^{-1} grad f(x).
SolverResult damped_newton(const Oracle& oracle, const SolverConfig& config, double damping,
                           const linalg::Vector& x0);

/// Classical limited-memory baselines: x <- x - lr * H_t grad f(x).
SolverResult classical_lbfgs(const Oracle& oracle, const SolverConfig& config,
                             double learning_rate, const linalg::Vector& x0);
SolverResult classical_lsr1(const Oracle& oracle, const SolverConfig& config,
                            double learning_rate, const linalg::Vector& x0);

// Acceleration coefficients: alpha_t = 3/(t+3), A_t = 6/((t+1)(t+2)(t+3)).
double accel_alpha(int t);
double accel_a(int t);

}  // namespace cubicqn
