// Acceptance suite: every release-gating property at its pinned tolerance,
// one pass/fail line per criterion. Exit status is the number of failures.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cubicqn/bench.hpp"
#include "cubicqn/cubic_step.hpp"
#include "cubicqn/dataio.hpp"
#include "cubicqn/hessian_model.hpp"
#include "cubicqn/oracle.hpp"
#include "cubicqn/rng.hpp"
#include "cubicqn/solvers.hpp"
#include "support.hpp"

using namespace cubicqn;
using linalg::Matrix;
using linalg::Vector;

namespace {

std::shared_ptr<const Dataset> fixture_dataset() {
  static std::shared_ptr<const Dataset> data =
      std::make_shared<const Dataset>(normalize_rows(synth_logistic(500, 50, 7, 3.0)).dataset);
  return data;
}

Vector far_start(int d) { return Vector(d, 3.0); }

int iters_to_gap(const SolverTrace& trace, double fstar, double gap) {
  for (const IterationRecord& rec : trace) {
    if (rec.f - fstar <= gap) return rec.iteration;
  }
  return -1;
}

double certificate_rhs(double gnorm, double M, double delta) {
  double rhs = gnorm * std::sqrt(gnorm) / std::sqrt(3.0 * M);
  if (delta > 0.0) rhs = std::min(rhs, gnorm * gnorm / (4.0 * delta));
  return rhs;
}

double window_slope(const SolverTrace& trace, double fstar, int lo, int hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const IterationRecord& rec : trace) {
    if (rec.iteration < lo || rec.iteration > hi) continue;
    xs.push_back(rec.iteration);
    ys.push_back(std::max(rec.f - fstar, 1e-16));
  }
  return testsupport::loglog_slope(xs, ys);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------

bool criterion1_derivatives() {
  LogisticProblem problem(fixture_dataset(), 0.0);
  const auto at_zero = check_derivatives(problem, Vector(50, 0.0), 25, 901);
  const auto at_far = check_derivatives(problem, far_start(50), 25, 902);
  const double grad_err = std::max(at_zero.max_grad_rel_err, at_far.max_grad_rel_err);
  const double hvp_err = std::max(at_zero.max_hvp_rel_err, at_far.max_hvp_rel_err);
  std::printf("  grad rel err %.2e, hvp rel err %.2e (bound 1e-6, 50 probes)\n", grad_err,
              hvp_err);
  return grad_err <= 1e-6 && hvp_err <= 1e-6;
}

bool criterion2_subproblem() {
  rng::Engine engine(910);
  double worst_agree = 0.0;
  double worst_resid = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 5 + static_cast<int>(engine.uniform() * 45);
    const int pairs = 1 + static_cast<int>(engine.uniform() * 8);  // k <= 16 terms
    const double base = engine.uniform() < 0.3 ? 0.0 : 0.4 * engine.uniform();
    const Matrix a = testsupport::random_psd(engine, d, 0.05);
    LowRankHessianModel model(d, base, 8);
    for (int i = 0; i < pairs; ++i) {
      const Vector s = rng::unit_sphere_vector(engine, d);
      model = lbfgs_apply_pair(model, s, linalg::matvec(a, s), false).model;
    }
    const Vector g = rng::gaussian_vector(engine, d);
    const double M = 0.2 + 2.0 * engine.uniform();
    const double delta = engine.uniform() < 0.25 ? 0.0 : 0.3 * engine.uniform();

    const auto lr = solve_low_rank(g, model, M, delta);
    const Matrix dense = materialize_dense(model);
    const auto dn = solve_dense(g, dense, M, delta);

    worst_agree = std::max(worst_agree, linalg::norm(linalg::subtract(lr.step, dn.step)) /
                                            std::max(1.0, linalg::norm(dn.step)));
    for (const Vector* h : {&lr.step, &dn.step}) {
      const double r = linalg::norm(*h);
      Vector resid = linalg::matvec(dense, *h);
      for (std::size_t i = 0; i < resid.size(); ++i) {
        resid[i] += g[i] + (delta + 0.5 * M * r) * (*h)[i];
      }
      worst_resid = std::max(
          worst_resid, linalg::norm(resid) / std::max(1.0, linalg::norm(g)));
    }
  }
  std::printf("  step agreement %.2e (bound 1e-8), stationarity %.2e (bound 1e-8)\n",
              worst_agree, worst_resid);
  return worst_agree <= 1e-8 && worst_resid <= 1e-8;
}

bool criterion3_spectral_bounds() {
  rng::Engine engine(920);
  bool ok = true;
  double worst_low = 0.0;
  double worst_hist = 0.0;
  double worst_damped = 0.0;
  double worst_sampled = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 6 + static_cast<int>(engine.uniform() * 24);
    const int memory = 5;
    const bool logistic = trial % 2 == 0;

    std::shared_ptr<Oracle> oracle;
    if (logistic) {
      oracle = std::make_shared<LogisticProblem>(
          testsupport::random_logistic_data(60, d, 7000 + trial), 1e-3);
    } else {
      oracle = std::make_shared<QuadraticProblem>(testsupport::random_psd(engine, d, 0.05),
                                                  Vector(d, 0.0));
    }
    const double l1 = oracle->lipschitz_grad();

    // History pairs along a random walk; gradient differences are the y's.
    PairBuffer buffer(memory, PairBuffer::Policy::History, true);
    Vector z = rng::gaussian_vector(engine, d);
    Vector gz(d);
    oracle->value_grad(z, gz);
    for (int i = 0; i < memory; ++i) {
      const Vector z_next = linalg::add(z, rng::unit_sphere_vector(engine, d));
      Vector gz_next(d);
      oracle->value_grad(z_next, gz_next);
      buffer.push(linalg::subtract(z_next, z), linalg::subtract(gz_next, gz));
      z = z_next;
      gz = gz_next;
    }
    const Matrix hessian = oracle->full_hessian(z);

    const auto eig_range = [&](const LowRankHessianModel& model) {
      const auto eig = linalg::sym_eig(
          testsupport::matrix_difference(materialize_dense(model), hessian));
      return std::pair<double, double>(eig.values.front(), eig.values.back());
    };

    const auto hist = eig_range(build_history_model(buffer, QnUpdateKind::Lbfgs, 0.0, d));
    const auto damp = eig_range(build_history_model(buffer, QnUpdateKind::LbfgsDamped, 0.0, d));
    const auto samp = eig_range(build_sampling_model(*oracle, z, memory, 7100 + trial, 1.0));

    worst_low = std::min({worst_low, hist.first + l1, damp.first + l1, samp.first + l1});
    worst_hist = std::max(worst_hist, hist.second - memory * l1);
    worst_damped = std::max(worst_damped, damp.second - l1);
    worst_sampled = std::max(worst_sampled, samp.second);

    ok = ok && hist.first >= -l1 - 1e-9 && hist.second <= memory * l1 + 1e-9;
    ok = ok && damp.first >= -l1 - 1e-9 && damp.second <= l1 + 1e-9;
    ok = ok && samp.first >= -l1 - 1e-9 && samp.second <= 1e-9;
  }
  std::printf(
      "  lower margin %.2e; upper slack: history %.2e, damped %.2e, sampled %.2e (<= 1e-9)\n",
      worst_low, worst_hist, worst_damped, worst_sampled);
  return ok;
}

bool criterion4_secant_psd() {
  rng::Engine engine(930);
  double worst_secant = 0.0;
  double worst_psd = 0.0;
  for (int seq = 0; seq < 500; ++seq) {
    const int d = 4 + static_cast<int>(engine.uniform() * 16);
    const Matrix a = testsupport::random_psd(engine, d, 0.05);
    const HvpFn hvp = [&a](const Vector& v) { return linalg::matvec(a, v); };
    const int updates = 2 + static_cast<int>(engine.uniform() * 6);
    LowRankHessianModel model(d, engine.uniform() < 0.5 ? 0.0 : 0.3, 8);
    for (int i = 0; i < updates; ++i) {
      const Vector s = rng::unit_sphere_vector(engine, d);
      const Vector y = linalg::matvec(a, s);
      UpdateResult res = engine.uniform() < 0.5
                             ? lbfgs_apply_pair(model, s, y, false)
                             : broyden_apply_pair(model, hvp, s, engine.uniform());
      if (!res.accepted) continue;
      model = res.model;
      worst_secant = std::max(worst_secant,
                              linalg::norm(linalg::subtract(model.apply(s), y)) /
                                  std::max(1.0, linalg::norm(y)));
    }
    const Matrix dense = materialize_dense(model);
    const double scale = testsupport::sym_norm(dense);
    if (scale > 0.0) {
      worst_psd = std::max(worst_psd, -testsupport::min_eigenvalue(dense) / scale);
    }
  }
  std::printf("  secant err %.2e (bound 1e-9), psd drift %.2e (bound 1e-9)\n", worst_secant,
              worst_psd);
  return worst_secant <= 1e-9 && worst_psd <= 1e-9;
}

bool criterion5_monotonicity() {
  LogisticProblem probe(fixture_dataset(), 0.0);
  const double big_m = 10.0 * 2.0 * probe.lipschitz_hessian();
  const Vector x0 = far_start(50);
  bool ok = true;
  const auto check_monotone = [&](const char* name, const SolverResult& result) {
    if (result.trace.size() < 201) {
      std::printf("  %s: only %zu iterations recorded\n", name, result.trace.size() - 1);
      ok = false;
      return;
    }
    double worst = 0.0;
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      worst = std::max(worst, result.trace[i].f - result.trace[i - 1].f);
    }
    std::printf("  %s: %zu iterations, worst increase %.2e (bound 1e-12)\n", name,
                result.trace.size() - 1, worst);
    ok = ok && worst <= 1e-12;
  };

  SolverConfig config;
  config.cubic_weight = big_m;
  config.max_iterations = 220;
  config.grad_tolerance = 0.0;

  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = config;
    c.policy = HessianPolicy::LbfgsHistory;
    check_monotone("adaptive inexact CRN (lbfgs)", adaptive_inexact_crn(oracle, c, x0));
  }
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = config;
    c.policy = HessianPolicy::Exact;
    c.initial_slack = 1e-16;
    check_monotone("exact CRN", adaptive_inexact_crn(oracle, c, x0));
  }
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = config;
    c.policy = HessianPolicy::Exact;
    c.initial_slack = 0.0;
    check_monotone("alternative adaptive cubic", alt_adaptive_cubic(oracle, c, x0));
  }
  return ok;
}

bool criterion6_certificate_replay() {
  const Vector x0 = far_start(50);
  bool ok = true;
  int steps = 0;
  double worst_margin = 1e300;
  for (const bool accelerated : {false, true}) {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig config;
    config.policy = HessianPolicy::LbfgsHistory;
    config.max_iterations = 150;
    config.grad_tolerance = 0.0;
    config.capture_steps = true;
    const double M = 2.0 * oracle.lipschitz_hessian();

    const SolverResult result = accelerated ? adaptive_accelerated_crn(oracle, config, x0)
                                            : adaptive_inexact_crn(oracle, config, x0);
    LogisticProblem replay(fixture_dataset(), 0.0);
    for (const StepCertificate& cert : result.certificates) {
      Vector grad(50);
      replay.value_grad(cert.next, grad);
      const double lhs = linalg::dot(grad, linalg::subtract(cert.reference, cert.next));
      const double rhs = certificate_rhs(linalg::norm(grad), M, cert.slack);
      worst_margin = std::min(worst_margin, lhs - rhs);
      ok = ok && lhs >= rhs;
      ++steps;
    }
  }
  std::printf("  %d accepted steps replayed, smallest margin %.2e\n", steps, worst_margin);
  return ok && steps > 0;
}

bool criterion7_rates() {
  const Vector x0 = far_start(50);
  LogisticProblem probe(fixture_dataset(), 0.0);
  const double theoretical_m = 2.0 * probe.lipschitz_hessian();

  // High-accuracy reference for the gap proxy.
  double fstar;
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c;
    c.policy = HessianPolicy::Exact;
    c.initial_slack = 1e-16;
    c.max_iterations = 600;
    c.grad_tolerance = 0.0;
    fstar = adaptive_inexact_crn(oracle, c, x0).trace.back().f;
  }

  SolverConfig base;
  base.max_iterations = 240;
  base.grad_tolerance = 0.0;
  base.memory = 10;

  SolverTrace exact_trace, lbfgs_trace, sampled_trace;
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = base;
    c.policy = HessianPolicy::Exact;
    c.initial_slack = 1e-16;
    exact_trace = adaptive_inexact_crn(oracle, c, x0).trace;
  }
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = base;
    c.policy = HessianPolicy::LbfgsHistory;
    lbfgs_trace = adaptive_inexact_crn(oracle, c, x0).trace;
  }
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c = base;
    c.policy = HessianPolicy::BroydenSampling;
    c.broyden_upsilon = 1.0;
    sampled_trace = adaptive_inexact_crn(oracle, c, x0).trace;
  }
  for (const SolverTrace* trace : {&exact_trace, &lbfgs_trace, &sampled_trace}) {
    for (const IterationRecord& rec : *trace) fstar = std::min(fstar, rec.f);
  }
  const double slope_exact = window_slope(exact_trace, fstar, 10, 200);
  const double slope_lbfgs = window_slope(lbfgs_trace, fstar, 10, 200);
  const double slope_sampled = window_slope(sampled_trace, fstar, 10, 200);

  // Acceleration comparison in the slack-limited regime: same fixture, same
  // (valid) inflated cubic weight for both methods.
  SolverConfig pair = base;
  pair.policy = HessianPolicy::LbfgsHistory;
  pair.cubic_weight = 30.0 * theoretical_m;
  pair.max_iterations = 3000;
  LogisticProblem plain_oracle(fixture_dataset(), 0.0);
  const auto plain = adaptive_inexact_crn(plain_oracle, pair, x0);
  LogisticProblem accel_oracle(fixture_dataset(), 0.0);
  const auto accel = adaptive_accelerated_crn(accel_oracle, pair, x0);
  LogisticProblem gd_oracle(fixture_dataset(), 0.0);
  const auto gd = gradient_descent(gd_oracle, pair, 0.0, x0);
  double pair_fstar = fstar;
  for (const IterationRecord& rec : plain.trace) pair_fstar = std::min(pair_fstar, rec.f);
  for (const IterationRecord& rec : accel.trace) pair_fstar = std::min(pair_fstar, rec.f);
  const int plain_iters = iters_to_gap(plain.trace, pair_fstar, 1e-6);
  const int accel_iters = iters_to_gap(accel.trace, pair_fstar, 1e-6);
  int gd_iters = iters_to_gap(gd.trace, pair_fstar, 1e-6);
  if (gd_iters < 0) gd_iters = pair.max_iterations + 1;

  std::printf("  slopes[10,200]: exact %.2f (<= -1.8), lbfgs %.2f (<= -0.9), sampled %.2f"
              " (<= -1.8)\n",
              slope_exact, slope_lbfgs, slope_sampled);
  std::printf("  iterations to gap 1e-6: accelerated %d < non-accelerated %d <= gd %d\n",
              accel_iters, plain_iters, gd_iters);
  return slope_exact <= -1.8 && slope_lbfgs <= -0.9 && slope_sampled <= -1.8 &&
         accel_iters > 0 && (plain_iters < 0 || accel_iters < plain_iters) &&
         (plain_iters < 0 || plain_iters <= gd_iters);
}

bool criterion8_repeat_budget() {
  LogisticProblem oracle(fixture_dataset(), 0.0);
  SolverConfig config;
  config.policy = HessianPolicy::LbfgsHistory;
  config.memory = 10;
  config.initial_slack = 1e-8;
  config.slack_increase = 2.0;
  config.max_iterations = 300;
  config.grad_tolerance = 1e-12;

  const SolverResult result = adaptive_inexact_crn(oracle, config, far_start(50));
  const double l1 = oracle.lipschitz_grad();
  const int budget = static_cast<int>(
                         std::ceil(std::log2(config.memory * l1 / config.initial_slack))) +
                     5;
  std::printf("  %d slack increases over the run (budget %d)\n",
              result.slack_increase_events, budget);
  return result.slack_increase_events <= budget;
}

bool criterion9_cost_accounting() {
  const Vector x0 = far_start(50);
  bool ok = true;
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c;
    c.policy = HessianPolicy::Exact;
    c.initial_slack = 1e-16;
    c.max_iterations = 60;
    c.grad_tolerance = 0.0;
    const SolverResult result = adaptive_inexact_crn(oracle, c, x0);
    const std::int64_t steps = result.trace.back().iteration;
    const std::int64_t cost = result.trace.back().hvp_equiv;
    std::printf("  exact CRN: hvp-equiv %lld vs d*T = %lld (slack d = 50)\n",
                static_cast<long long>(cost), static_cast<long long>(50 * steps));
    ok = ok && std::llabs(cost - 50 * steps) <= 50;
  }
  {
    LogisticProblem oracle(fixture_dataset(), 0.0);
    SolverConfig c;
    c.policy = HessianPolicy::BroydenSampling;
    c.broyden_upsilon = 1.0;
    c.memory = 10;
    c.initial_slack = oracle.lipschitz_grad();  // dominates every directional error
    c.max_iterations = 60;
    c.grad_tolerance = 0.0;
    const SolverResult result = adaptive_inexact_crn(oracle, c, x0);
    const std::int64_t steps = result.trace.back().iteration;
    const auto& counters = oracle.counters();
    std::printf("  sampled: %lld hvps vs m*T = %lld, %lld gradients vs T+1 = %lld\n",
                static_cast<long long>(counters.hvps), static_cast<long long>(10 * steps),
                static_cast<long long>(counters.gradients), static_cast<long long>(steps + 1));
    ok = ok && counters.hvps == 10 * steps && counters.gradients == steps + 1 &&
         result.slack_increase_events == 0;
  }
  return ok;
}

bool criterion10_estimating_sequence() {
  rng::Engine engine(940);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(engine.uniform() * 10);
    EstimatingSequenceState state;
    state.anchor = rng::gaussian_vector(engine, d);
    state.weighted_grad_sum = rng::gaussian_vector(engine, d);
    const int shape = static_cast<int>(engine.uniform() * 3.0);
    state.quad_coeff = shape == 1 ? 0.0 : 2.0 * engine.uniform() + 1e-3;
    state.cubic_coeff = shape == 2 ? 0.0 : 2.0 * engine.uniform() + 1e-3;
    state.linear_const = engine.gaussian();

    const double gnorm = linalg::norm(state.weighted_grad_sum);
    // Independent oracle: golden-section on the 1-D reduction
    // phi(r) = k2/2 r^2 + k3/3 r^3 - |g| r.
    const auto phi = [&](double r) {
      return 0.5 * state.quad_coeff * r * r + state.cubic_coeff / 3.0 * r * r * r - gnorm * r;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (phi(hi * 2.0) < phi(hi)) hi *= 2.0;  // grow until past the minimum
    hi *= 2.0;
    const double golden = 0.6180339887498949;
    double a = lo, b = hi;
    double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
    for (int it = 0; it < 200; ++it) {
      if (phi(c1) < phi(c2)) {
        b = c2;
      } else {
        a = c1;
      }
      c1 = b - golden * (b - a);
      c2 = a + golden * (b - a);
    }
    const double numeric = phi(0.5 * (a + b)) + state.linear_const;

    const double closed = estseq_value(state, estseq_minimize(state));
    worst = std::max(worst, std::abs(closed - numeric));
  }

  double worst_identity = 0.0;
  for (int t = 1; t <= 10000; ++t) {
    worst_identity = std::max(
        worst_identity, std::abs(accel_a(t) * (t + 1.0) * (t + 2.0) * (t + 3.0) - 6.0));
    worst_identity = std::max(
        worst_identity, std::abs((1.0 - accel_alpha(t)) * accel_a(t - 1) - accel_a(t)));
  }
  std::printf("  psi value diff %.2e (bound 1e-10), coefficient identity %.2e (bound 1e-12)\n",
              worst, worst_identity);
  return worst <= 1e-10 && worst_identity <= 1e-12;
}

bool criterion11_parser() {
  rng::Engine engine(950);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    RawDataset original;
    const int n = 1 + static_cast<int>(engine.uniform() * 10);
    for (int i = 0; i < n; ++i) {
      std::vector<SparseEntry> row;
      int index = 0;
      for (int k = 0; k < 6; ++k) {
        index += 1 + static_cast<int>(engine.uniform() * 5);
        row.push_back({index, engine.gaussian()});
      }
      original.dim = std::max(original.dim, index);
      original.rows.push_back(std::move(row));
      original.labels.push_back(engine.uniform() < 0.5 ? -1.0 : 1.0);
    }
    std::ostringstream out;
    write_libsvm(original, out);
    std::istringstream in(out.str());
    const RawDataset reparsed = parse_libsvm(in);
    ok = ok && reparsed.labels == original.labels && reparsed.rows.size() == original.rows.size();
    for (std::size_t i = 0; ok && i < original.rows.size(); ++i) {
      ok = original.rows[i].size() == reparsed.rows[i].size();
      for (std::size_t j = 0; ok && j < original.rows[i].size(); ++j) {
        ok = original.rows[i][j].index == reparsed.rows[i][j].index &&
             original.rows[i][j].value == reparsed.rows[i][j].value;
      }
    }
  }

  const Dataset& fixture = *fixture_dataset();
  double worst_norm = 0.0;
  for (int i = 0; i < fixture.rows.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < fixture.rows.cols(); ++j) acc += fixture.rows(i, j) * fixture.rows(i, j);
    worst_norm = std::max(worst_norm, std::abs(std::sqrt(acc) - 1.0));
  }

  int bad_line = 0;
  try {
    std::istringstream in("+1 1:1\n+1 junk\n");
    parse_libsvm(in);
  } catch (const ParseError& e) {
    bad_line = e.line;
  }
  std::printf("  100 round trips, norm err %.2e (bound 1e-12), malformed line -> %d\n",
              worst_norm, bad_line);
  return ok && worst_norm <= 1e-12 && bad_line == 2;
}

bool criterion12_determinism() {
  const char* config_text =
      "[problem]\nn = 500\nd = 50\nseed = 7\nseparation = 3.0\nmu = 0.0\n\n"
      "[start]\nkind = \"ones\"\nscale = 3.0\n\n"
      "[run]\nmax_iters = 80\nseed = 17\n\n"
      "[[method]]\nkind = \"gd\"\n\n"
      "[[method]]\nkind = \"cubic\"\nname = \"cubic-lbfgs\"\npolicy = \"lbfgs-history\"\n\n"
      "[[method]]\nkind = \"cubic\"\nname = \"cubic-sampled\"\npolicy = \"broyden-sampling\"\n"
      "upsilon = 1.0\n\n"
      "[[method]]\nkind = \"accelerated\"\nname = \"accel-lbfgs\"\npolicy = \"lbfgs-history\"\n";
  ExperimentConfig config = experiment_config_from_toml(toml::Value::parse(config_text));

  const std::string dir_a = "acceptance-det-a";
  const std::string dir_b = "acceptance-det-b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  config.out_dir = dir_a;
  run_experiment(config);
  config.out_dir = dir_b;
  run_experiment(config);

  bool ok = true;
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const std::string name = entry.path().filename().string();
    ok = ok && slurp(dir_a + "/" + name) == slurp(dir_b + "/" + name);
    ++files;
  }
  std::printf("  %d emitted files byte-compared\n", files);
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  return ok && files == 6;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<bool()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1. derivative correctness vs central differences", criterion1_derivatives},
      {"2. low-rank vs dense subproblem equivalence", criterion2_subproblem},
      {"3. quasi-Newton spectral error bounds", criterion3_spectral_bounds},
      {"4. secant + PSD property suite", criterion4_secant_psd},
      {"5. monotonicity of the descent methods", criterion5_monotonicity},
      {"6. adaptive certificate replay", criterion6_certificate_replay},
      {"7. convergence-rate slopes and acceleration", criterion7_rates},
      {"8. inner-repeat budget", criterion8_repeat_budget},
      {"9. oracle cost accounting", criterion9_cost_accounting},
      {"10. estimating-sequence minimizer", criterion10_estimating_sequence},
      {"11. LIBSVM parser and normalization", criterion11_parser},
      {"12. bytewise deterministic outputs", criterion12_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    std::printf("criterion %s\n", criterion.name);
    bool ok = false;
    try {
      ok = criterion.run();
    } catch (const std::exception& e) {
      std::printf("  exception: %s\n", e.what());
    }
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", criterion.name);
    if (!ok) ++failures;
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
