#include "cubicqn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "cubicqn/cubic_step.hpp"
#include "cubicqn/rng.hpp"

namespace cubicqn {

namespace {

constexpr double kGapFloor = 1e-16;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// RFC-4180: quote a field when it contains a comma, quote, or newline.
std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

HessianPolicy parse_policy(const std::string& name) {
  if (name == "exact") return HessianPolicy::Exact;
  if (name == "lbfgs-history") return HessianPolicy::LbfgsHistory;
  if (name == "lbfgs-history-damped") return HessianPolicy::LbfgsHistoryDamped;
  if (name == "lsr1-history") return HessianPolicy::Lsr1History;
  if (name == "broyden-sampling") return HessianPolicy::BroydenSampling;
  if (name == "combined") return HessianPolicy::Combined;
  throw ConfigError("unknown hessian policy '" + name + "'");
}

MethodKind parse_method_kind(const std::string& name) {
  if (name == "gd") return MethodKind::GradientDescent;
  if (name == "cubic") return MethodKind::Cubic;
  if (name == "accelerated") return MethodKind::Accelerated;
  if (name == "cubic-alt") return MethodKind::CubicAlt;
  if (name == "crn-exact") return MethodKind::ExactCrn;
  if (name == "damped-newton") return MethodKind::DampedNewton;
  if (name == "lbfgs") return MethodKind::ClassicalLbfgs;
  if (name == "lsr1") return MethodKind::ClassicalLsr1;
  throw ConfigError("unknown method kind '" + name + "'");
}

double get_number(const toml::Value& table, const std::string& key, double fallback) {
  const toml::Value* v = table.find(key);
  if (v == nullptr) return fallback;
  try {
    return v->as_number();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' must be a number");
  }
}

std::int64_t get_integer(const toml::Value& table, const std::string& key,
                         std::int64_t fallback) {
  const toml::Value* v = table.find(key);
  if (v == nullptr) return fallback;
  try {
    return v->as_integer();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' must be an integer");
  }
}

std::string get_string(const toml::Value& table, const std::string& key,
                       const std::string& fallback) {
  const toml::Value* v = table.find(key);
  if (v == nullptr) return fallback;
  try {
    return v->as_string();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' must be a string");
  }
}

bool get_boolean(const toml::Value& table, const std::string& key, bool fallback) {
  const toml::Value* v = table.find(key);
  if (v == nullptr) return fallback;
  try {
    return v->as_boolean();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' must be a boolean");
  }
}

MethodConfig method_from_toml(const toml::Value& table, int index) {
  MethodConfig method;
  const std::string kind = get_string(table, "kind", "");
  if (kind.empty()) throw ConfigError("method entry missing 'kind'");
  method.kind = parse_method_kind(kind);
  method.name = get_string(table, "name", kind);

  SolverConfig& solver = method.solver;
  solver.cubic_weight = get_number(table, "M", 0.0);
  solver.initial_slack = get_number(table, "delta0", 1e-8);
  solver.slack_increase = get_number(table, "gamma_inc", 2.0);
  solver.slack_decrease = get_number(table, "gamma_dec", 0.5);
  solver.memory = static_cast<int>(get_integer(table, "memory", 10));
  solver.broyden_upsilon = get_number(table, "upsilon", 0.0);
  solver.max_inner_repeats = static_cast<int>(get_integer(table, "max_inner_repeats", 60));
  solver.rollback_cap = static_cast<int>(get_integer(table, "rollback_cap", 30));

  const std::string policy = get_string(table, "policy", "");
  if (!policy.empty()) solver.policy = parse_policy(policy);
  if (method.kind == MethodKind::ExactCrn) {
    solver.policy = HessianPolicy::Exact;
    solver.initial_slack = get_number(table, "delta0", 1e-16);
  }

  method.learning_rate = get_number(table, "lr", 0.0);
  method.damping = get_number(table, "damping", 1.0);

  if (method.name.empty()) {
    throw ConfigError("method " + std::to_string(index) + " has an empty name");
  }
  return method;
}

std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
  }
  return out.empty() ? "method" : out;
}

SolverResult dispatch_method(const MethodConfig& method, const Oracle& oracle,
                             const linalg::Vector& x0) {
  switch (method.kind) {
    case MethodKind::GradientDescent:
      return gradient_descent(oracle, method.solver, method.learning_rate, x0);
    case MethodKind::Cubic:
      return adaptive_inexact_crn(oracle, method.solver, x0);
    case MethodKind::Accelerated:
      return adaptive_accelerated_crn(oracle, method.solver, x0);
    case MethodKind::CubicAlt:
      return alt_adaptive_cubic(oracle, method.solver, x0);
    case MethodKind::ExactCrn:
      return adaptive_inexact_crn(oracle, method.solver, x0);
    case MethodKind::DampedNewton:
      return damped_newton(oracle, method.solver, method.damping, x0);
    case MethodKind::ClassicalLbfgs:
      return classical_lbfgs(oracle, method.solver, method.learning_rate, x0);
    case MethodKind::ClassicalLsr1:
      return classical_lsr1(oracle, method.solver, method.learning_rate, x0);
  }
  throw ConfigError("unhandled method kind");
}

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // gap, clamped to the log floor
};

}  // namespace

ExperimentConfig experiment_config_from_toml(const toml::Value& root) {
  ExperimentConfig config;

  if (const toml::Value* problem = root.find("problem")) {
    config.problem.path = get_string(*problem, "path", "");
    config.problem.remap01 = get_boolean(*problem, "remap01", false);
    config.problem.synth_n = static_cast<int>(get_integer(*problem, "n", 500));
    config.problem.synth_d = static_cast<int>(get_integer(*problem, "d", 50));
    config.problem.synth_seed =
        static_cast<std::uint64_t>(get_integer(*problem, "seed", 7));
    config.problem.synth_separation = get_number(*problem, "separation", 2.0);
    config.problem.mu = get_number(*problem, "mu", 0.0);
    config.problem.normalize = get_boolean(*problem, "normalize", true);
  }

  if (const toml::Value* start = root.find("start")) {
    const std::string kind = get_string(*start, "kind", "zeros");
    if (kind == "zeros") {
      config.start.kind = StartSpec::Kind::Zeros;
    } else if (kind == "ones") {
      config.start.kind = StartSpec::Kind::Ones;
    } else {
      throw ConfigError("start kind must be 'zeros' or 'ones'");
    }
    config.start.scale = get_number(*start, "scale", 1.0);
  }

  if (const toml::Value* run = root.find("run")) {
    config.max_iterations = static_cast<int>(get_integer(*run, "max_iters", 200));
    config.grad_tolerance = get_number(*run, "tol", 0.0);
    config.out_dir = get_string(*run, "out_dir", "results");
    config.seed = static_cast<std::uint64_t>(get_integer(*run, "seed", 0));
    config.gap_slack = get_number(*run, "gap_slack", 0.0);
    config.record_walltime = get_boolean(*run, "record_walltime", false);
  }

  const toml::Value* methods = root.find("method");
  if (methods == nullptr || !methods->is_array() || methods->items().empty()) {
    throw ConfigError("config requires at least one [[method]] entry");
  }
  int index = 0;
  for (const toml::Value& entry : methods->items()) {
    config.methods.push_back(method_from_toml(entry, index++));
  }
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < config.methods.size(); ++j) {
      if (config.methods[i].name == config.methods[j].name) {
        throw ConfigError("duplicate method name '" + config.methods[i].name + "'");
      }
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
  try {
    return experiment_config_from_toml(toml::Value::parse_file(path));
  } catch (const toml::ParseError& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

RunSummary run_experiment(const ExperimentConfig& config, bool write_outputs) {
  if (config.methods.empty()) throw ConfigError("experiment has no methods");

  Dataset data;
  if (config.problem.path.empty()) {
    data = synth_logistic(config.problem.synth_n, config.problem.synth_d,
                          config.problem.synth_seed, config.problem.synth_separation);
  } else {
    if (!std::filesystem::exists(config.problem.path)) {
      throw ConfigError("dataset file not found: " + config.problem.path);
    }
    try {
      data = to_dense(load_libsvm_file(config.problem.path, config.problem.remap01),
                      config.problem.path);
    } catch (const ParseError& e) {
      throw ConfigError(config.problem.path + ": " + e.what());
    }
  }
  if (config.problem.normalize) {
    NormalizeOutcome normalized = normalize_rows(data);
    if (normalized.dropped_rows > 0) {
      std::cerr << "warning: dropped " << normalized.dropped_rows
                << " all-zero rows during normalization\n";
    }
    data = std::move(normalized.dataset);
  }
  const auto shared = std::make_shared<const Dataset>(std::move(data));

  linalg::Vector x0(shared->rows.cols(),
                    config.start.kind == StartSpec::Kind::Ones ? config.start.scale : 0.0);

  RunSummary summary;
  summary.best_f = std::numeric_limits<double>::infinity();
  std::uint64_t method_index = 0;
  for (const MethodConfig& method : config.methods) {
    LogisticProblem oracle(shared, config.problem.mu);
    MethodConfig local = method;
    local.solver.max_iterations = config.max_iterations;
    local.solver.grad_tolerance = config.grad_tolerance;
    local.solver.seed = rng::mix(config.seed, method_index++);

    MethodOutcome outcome;
    outcome.name = method.name;
    try {
      SolverResult result = dispatch_method(local, oracle, x0);
      outcome.status = result.status;
      outcome.trace = std::move(result.trace);
    } catch (const SolverError& e) {
      outcome.status = std::string("error: ") + e.what();
      outcome.trace = e.trace;
    }
    if (!outcome.trace.empty()) {
      outcome.final_f = outcome.trace.back().f;
      outcome.iterations = outcome.trace.back().iteration;
      outcome.hvp_equiv = outcome.trace.back().hvp_equiv;
      outcome.wall_ns = outcome.trace.back().wall_ns;
      for (const IterationRecord& rec : outcome.trace) {
        summary.best_f = std::min(summary.best_f, rec.f);
      }
    }
    summary.methods.push_back(std::move(outcome));
  }
  for (MethodOutcome& outcome : summary.methods) {
    outcome.final_gap =
        std::max(outcome.final_f - (summary.best_f - config.gap_slack), 0.0);
  }

  if (write_outputs) {
    std::filesystem::create_directories(config.out_dir);
    for (const MethodOutcome& outcome : summary.methods) {
      const std::string path =
          config.out_dir + "/" + sanitize_filename(outcome.name) + ".csv";
      emit_trace_csv(outcome.trace, path, config.record_walltime);
    }
    emit_plot_svg(summary, config.gap_slack, PlotAxis::Iterations,
                  config.out_dir + "/gap_vs_iterations.svg");
    emit_plot_svg(summary, config.gap_slack, PlotAxis::HvpEquivalent,
                  config.out_dir + "/gap_vs_hvp.svg");
  }
  return summary;
}

void emit_trace_csv(const SolverTrace& trace, const std::string& path, bool include_walltime) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,f,gnorm,delta,inner_repeats,step_norm,grad_evals,hvp_equiv,wall_ns\n";
  for (const IterationRecord& rec : trace) {
    out << rec.iteration << ',' << csv_field(format_double(rec.f)) << ','
        << csv_field(format_double(rec.grad_norm)) << ','
        << csv_field(format_double(rec.slack)) << ',' << rec.inner_repeats << ','
        << csv_field(format_double(rec.step_norm)) << ',' << rec.grad_evals << ','
        << rec.hvp_equiv << ',' << (include_walltime ? rec.wall_ns : 0) << '\n';
  }
}

void emit_plot_svg(const RunSummary& summary, double gap_slack, PlotAxis axis,
                   const std::string& path) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr int kWidth = 800;
  constexpr int kHeight = 600;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 620.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 550.0;

  std::vector<PlotSeries> series;
  double x_max = 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const MethodOutcome& outcome : summary.methods) {
    PlotSeries s;
    s.label = outcome.name;
    for (const IterationRecord& rec : outcome.trace) {
      const double x = axis == PlotAxis::Iterations ? static_cast<double>(rec.iteration)
                                                    : static_cast<double>(rec.hvp_equiv);
      const double gap =
          std::max(rec.f - (summary.best_f - gap_slack), kGapFloor);
      s.x.push_back(x);
      s.y.push_back(gap);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, gap);
      y_max = std::max(y_max, gap);
    }
    series.push_back(std::move(s));
  }
  if (!std::isfinite(y_min) || y_min <= 0.0) y_min = kGapFloor;
  if (!std::isfinite(y_max) || y_max <= y_min) y_max = y_min * 10.0;

  const double log_lo = std::floor(std::log10(y_min));
  const double log_hi = std::ceil(std::log10(y_max));
  const double log_span = std::max(1.0, log_hi - log_lo);

  const auto to_px_x = [&](double x) { return kLeft + (kRight - kLeft) * (x / x_max); };
  const auto to_px_y = [&](double y) {
    const double t = (std::log10(std::max(y, kGapFloor)) - log_lo) / log_span;
    return kBottom - (kBottom - kTop) * t;
  };
  const auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Decade gridlines and tick labels on the log axis.
  for (double decade = log_lo; decade <= log_hi + 0.5; decade += 1.0) {
    const double y = to_px_y(std::pow(10.0, decade));
    if (y < kTop - 1.0 || y > kBottom + 1.0) continue;
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kRight)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 8.0) << "\" y=\"" << fmt(y + 4.0)
        << "\" text-anchor=\"end\" font-size=\"12\">1e" << static_cast<int>(decade)
        << "</text>\n";
  }
  for (int tick = 0; tick <= 5; ++tick) {
    const double x_val = x_max * tick / 5.0;
    const double x = to_px_x(x_val);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(kBottom + 5.0) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kBottom + 20.0)
        << "\" text-anchor=\"middle\" font-size=\"12\">"
        << static_cast<long long>(std::llround(x_val)) << "</text>\n";
  }
  out << "<text x=\"" << fmt(0.5 * (kLeft + kRight)) << "\" y=\"" << fmt(kBottom + 40.0)
      << "\" text-anchor=\"middle\" font-size=\"14\">"
      << (axis == PlotAxis::Iterations ? "iteration" : "HVP-equivalent oracle calls")
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << fmt(0.5 * (kTop + kBottom))
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << fmt(0.5 * (kTop + kBottom)) << ")\">gap proxy</text>\n";

  int color = 0;
  for (const PlotSeries& s : series) {
    const char* stroke = kPalette[color % 8];
    if (!s.x.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i > 0) out << ' ';
        out << fmt(to_px_x(s.x[i])) << ',' << fmt(to_px_y(s.y[i]));
      }
      out << "\"/>\n";
    }
    const double ly = kTop + 20.0 + 20.0 * color;
    out << "<line x1=\"" << fmt(kRight + 15.0) << "\" y1=\"" << fmt(ly - 4.0) << "\" x2=\""
        << fmt(kRight + 45.0) << "\" y2=\"" << fmt(ly - 4.0) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(kRight + 50.0) << "\" y=\"" << fmt(ly)
        << "\" font-size=\"12\">" << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

void print_summary_table(const RunSummary& summary, std::ostream& out) {
  out << std::left << std::setw(24) << "method" << std::right << std::setw(12) << "iters"
      << std::setw(16) << "final f" << std::setw(14) << "gap proxy" << std::setw(12)
      << "hvp-equiv" << std::setw(12) << "wall (ms)"
      << "  status\n";
  out << std::string(100, '-') << '\n';
  for (const MethodOutcome& outcome : summary.methods) {
    out << std::left << std::setw(24) << outcome.name << std::right << std::setw(12)
        << outcome.iterations << std::setw(16) << std::scientific << std::setprecision(6)
        << outcome.final_f << std::setw(14) << std::setprecision(3) << outcome.final_gap
        << std::defaultfloat << std::setw(12) << outcome.hvp_equiv << std::setw(12)
        << std::fixed << std::setprecision(2) << outcome.wall_ns / 1e6 << std::defaultfloat
        << "  " << outcome.status << '\n';
  }
}

int run_self_check(std::ostream& out) {
  int failures = 0;
  const auto report = [&](const char* name, bool ok, double value, double bound) {
    out << (ok ? "ok:   " : "FAIL: ") << name << " (" << value << " vs bound " << bound
        << ")\n";
    if (!ok) ++failures;
  };

  // Derivatives on a small synthetic instance from both benign and far starts.
  const auto data = std::make_shared<const Dataset>(
      normalize_rows(synth_logistic(200, 20, 11, 2.0)).dataset);
  LogisticProblem problem(data, 1e-3);
  {
    const auto rep = check_derivatives(problem, linalg::Vector(20, 0.0), 16, 5);
    report("gradient vs finite differences at x=0",
           rep.max_grad_rel_err <= 1e-6, rep.max_grad_rel_err, 1e-6);
    report("hvp vs finite differences at x=0", rep.max_hvp_rel_err <= 1e-6,
           rep.max_hvp_rel_err, 1e-6);
  }
  {
    const auto rep = check_derivatives(problem, linalg::Vector(20, 3.0), 16, 6);
    report("gradient vs finite differences at x=3e",
           rep.max_grad_rel_err <= 1e-6, rep.max_grad_rel_err, 1e-6);
    report("hvp vs finite differences at x=3e", rep.max_hvp_rel_err <= 1e-6,
           rep.max_hvp_rel_err, 1e-6);
  }

  // QR reconstruction.
  {
    rng::Engine engine(21);
    linalg::Matrix m(30, 8);
    for (double& v : m.data()) v = engine.gaussian();
    const auto qr = linalg::thin_qr(m);
    const linalg::Matrix recon = linalg::matmul(qr.q, qr.r);
    double err = 0.0;
    for (std::size_t i = 0; i < recon.data().size(); ++i) {
      err += (recon.data()[i] - m.data()[i]) * (recon.data()[i] - m.data()[i]);
    }
    err = std::sqrt(err) / linalg::frobenius_norm(m);
    report("thin QR reconstruction", err <= 1e-10, err, 1e-10);
  }

  // Low-rank vs dense cubic subproblem on a quasi-Newton model.
  {
    rng::Engine engine(22);
    const int d = 24;
    LowRankHessianModel model(d, 0.5, 8);
    for (int i = 0; i < 6; ++i) {
      const linalg::Vector s = rng::unit_sphere_vector(engine, d);
      linalg::Vector y = s;
      for (int j = 0; j < d; ++j) y[j] *= 1.0 + 0.1 * j;
      model = lbfgs_apply_pair(model, s, y, false).model;
    }
    const linalg::Vector g = rng::gaussian_vector(engine, d);
    const auto lr = solve_low_rank(g, model, 1.5, 0.25);
    const auto dn = solve_dense(g, materialize_dense(model), 1.5, 0.25);
    double diff = linalg::norm(linalg::subtract(lr.step, dn.step)) /
                  std::max(1.0, linalg::norm(dn.step));
    report("cubic subproblem low-rank vs dense", diff <= 1e-8, diff, 1e-8);
  }

  // Estimating-sequence minimizer against random probes.
  {
    rng::Engine engine(23);
    EstimatingSequenceState state;
    state.anchor = rng::gaussian_vector(engine, 10);
    state.weighted_grad_sum = rng::gaussian_vector(engine, 10);
    state.quad_coeff = 0.7;
    state.cubic_coeff = 1.3;
    const linalg::Vector y = estseq_minimize(state);
    const double fy = estseq_value(state, y);
    double worst = 0.0;
    for (int probe = 0; probe < 200; ++probe) {
      linalg::Vector z = y;
      linalg::axpy(1e-4, rng::unit_sphere_vector(engine, 10), z);
      worst = std::max(worst, fy - estseq_value(state, z));
    }
    report("estimating-sequence minimizer local optimality", worst <= 1e-12, worst, 1e-12);
  }

  return failures;
}

}  // namespace cubicqn
