#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubicqn/dataio.hpp"
#include "cubicqn/solvers.hpp"
#include "cubicqn/toml.hpp"

namespace cubicqn {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

enum class MethodKind {
  GradientDescent,
  Cubic,         // adaptive inexact CRN
  Accelerated,   // estimating-sequence variant
  CubicAlt,      // f-decrease test variant with gamma_dec
  ExactCrn,      // cubic with the exact Hessian, delta_0 ~ 0
  DampedNewton,
  ClassicalLbfgs,
  ClassicalLsr1,
};

struct MethodConfig {
  std::string name;
  MethodKind kind = MethodKind::Cubic;
  SolverConfig solver;
  double learning_rate = 0.0;  // gd / classical QN; <= 0 picks 1/L1 for gd
  double damping = 1.0;        // damped newton
};

struct StartSpec {
  enum class Kind { Zeros, Ones } kind = Kind::Zeros;
  double scale = 1.0;  // x0 = scale * e for Kind::Ones
};

struct ProblemSpec {
  std::string path;  // empty -> synthetic
  bool remap01 = false;
  int synth_n = 500;
  int synth_d = 50;
  std::uint64_t synth_seed = 7;
  double synth_separation = 2.0;
  double mu = 0.0;
  bool normalize = true;
};

struct ExperimentConfig {
  ProblemSpec problem;
  StartSpec start;
  std::vector<MethodConfig> methods;
  int max_iterations = 200;
  double grad_tolerance = 0.0;
  std::string out_dir = "results";
  std::uint64_t seed = 0;
  double gap_slack = 0.0;
  // Off by default so that emitted bytes depend only on (config, seed); when
  // set, the wall_ns column carries measured times instead of zeros.
  bool record_walltime = false;
};

ExperimentConfig experiment_config_from_toml(const toml::Value& root);
ExperimentConfig load_experiment_config(const std::string& path);

struct MethodOutcome {
  std::string name;
  std::string status;  // converged | max_iterations | error: ...
  SolverTrace trace;
  double final_f = 0.0;
  double final_gap = 0.0;
  int iterations = 0;
  std::int64_t hvp_equiv = 0;
  std::int64_t wall_ns = 0;
};

struct RunSummary {
  std::vector<MethodOutcome> methods;
  double best_f = 0.0;  // f* proxy: best value any method reached
};

/// Runs every configured method on the shared problem from the shared start.
/// Per-method solver errors are captured in the outcome without aborting the
/// siblings. With write_outputs set, emits one CSV per method plus
/// gap-vs-iteration and gap-vs-cost SVG plots under out_dir.
RunSummary run_experiment(const ExperimentConfig& config, bool write_outputs = true);

void emit_trace_csv(const SolverTrace& trace, const std::string& path,
                    bool include_walltime = false);

enum class PlotAxis { Iterations, HvpEquivalent };

/// Standalone SVG, 800x600, log-scale gap proxy, one polyline per method.
void emit_plot_svg(const RunSummary& summary, double gap_slack, PlotAxis axis,
                   const std::string& path);

void print_summary_table(const RunSummary& summary, std::ostream& out);

/// Derivative and invariant self-test backing the `check` CLI subcommand.
/// Prints one line per check; returns the number of failures.
int run_self_check(std::ostream& out);

}  // namespace cubicqn
