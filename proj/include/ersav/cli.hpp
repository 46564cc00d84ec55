#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ersav/core.hpp"
#include "ersav/diagnostics.hpp"
#include "ersav/objectives.hpp"
#include "ersav/optimizers.hpp"
#include "ersav/relaxation.hpp"

namespace ersav::cli {

enum class LambdaSource { Zero, HessianDiagonal, Explicit };

// One experiment: a method, a benchmark, and the numerical knobs. Defaults
// reproduce the standard setup (relaxed element-wise scheme, psi = 0.95,
// beta = 0.1, dt0 = 0.01, 1000 iterations).
struct ExperimentConfig {
  optimizers::Method method = optimizers::Method::ERSAV;
  std::string benchmark = "quadratic100";
  double dt0 = 0.01;
  double psi = 0.95;
  double beta = 0.1;
  std::size_t max_iters = 1000;
  std::optional<std::vector<double>> x0;
  LambdaSource lambda_source = LambdaSource::Zero;
  std::vector<double> lambda_values;
  bool clamp_lambda = false;
  // Seeds the randomized invariant sweeps in `check` only; every table and
  // trace command is deterministic.
  std::uint64_t seed = 12345;
  std::string out;  // empty writes to stdout
};

// Throws ConfigError when a field is out of range (dt0 <= 0, psi outside
// (0,1), beta < 0, max_iters < 1, explicit lambda without values).
void validate(const ExperimentConfig& config);

// Plain-text `key = value` pairs, one per line, `#` starts a comment.
// Recognized keys: method, benchmark, dt0 (alias dt), psi, beta, max_iters
// (alias iters), x0, lambda, clamp_lambda, seed, out. Unknown keys, malformed
// lines, and out-of-range values raise ConfigError with the line number.
ExperimentConfig parse_config_file(const std::string& path);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Fixed header and column order; optional fields render as empty cells.
extern const char* const kTraceHeader;
std::string render_csv(const std::vector<diagnostics::TraceRecord>& trace);
std::vector<diagnostics::TraceRecord> parse_csv(const std::string& text);

// Loss rendering used by the step-size table: "NAN" for failed runs, a
// "<2.23e-308" marker for positive results below the smallest positive
// normal double, and 4 significant digits otherwise.
std::string render_table_loss(double loss, optimizers::RunStatus status);

// Builds the splitting operator an experiment asks for. HessianDiagonal
// resolves to the per-coordinate diagonal at x0, except for ersavl whose
// uniform curvature bound is sourced inside the run loop.
core::SplittingOperator build_splitting(const ExperimentConfig& config,
                                        const core::Objective& obj,
                                        const core::DenseVector& x0);

// Runs the configured experiment and returns the full result.
optimizers::RunResult run_experiment(const ExperimentConfig& config);

struct TableCell {
  optimizers::Method method;
  double dt = 0.0;
  double final_loss = 0.0;
  optimizers::RunStatus status = optimizers::RunStatus::MaxIters;
  std::string rendered;
};

// {gd, rsav, esav, ersav, ersavl} x dt {0.1, 1, 10, 20, 30} on the
// ill-conditioned quadratic from all ones, 1000 iterations, psi = 0.95.
std::vector<TableCell> table1_cells();

// One valley-benchmark run from (-2, -4): 20000 iterations, beta = 1e-4.
optimizers::RunResult rosenbrock_run(optimizers::Method method, double dt,
                                     std::size_t iters = 20000, double beta = 1e-4);

struct RateRow {
  std::string benchmark;
  double start = 0.0;
  std::vector<double> epsilons;
  diagnostics::RateEstimate estimate;
};

// Runs the accelerated univariate scheme from each start, measures
// eps_n = |x_n - x*|, truncates at the first eps <= 1e-12, and estimates
// convergence rates. Throws InsufficientData when a start converges in
// fewer than 3 usable iterations.
RateRow superlinear_sweep_one(const core::Objective& obj, double start,
                              std::size_t max_iters = 12);

int cmd_run(const ExperimentConfig& config);
int cmd_table1(const std::string& out_path);
int cmd_rosenbrock(const std::string& out_dir);
int cmd_superlinear(const std::optional<std::vector<double>>& starts,
                    const std::string& out_path);
int cmd_check(std::uint64_t seed);

// Full argv-level entry point (also used by tests): parses subcommands and
// flags, maps ConfigError to exit 2 and numerical failures to exit 1.
int dispatch(int argc, const char* const* argv);

}  // namespace ersav::cli
