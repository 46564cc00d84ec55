#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ersav/core.hpp"

namespace ersav::diagnostics {

// One row of per-iteration telemetry. Row k describes the state at iteration
// k (f_raw, loss, grad_norm, the r statistics, alpha, modified_energy) plus
// the step that produced it (dt_used, eta statistics, dissipation_margin,
// proposal_event). Row 0 carries dt_used = 0 and no eta statistics. Fields
// that do not apply to a method (r statistics for plain gradient descent,
// eta for non-relaxed schemes) are absent rather than faked.
struct TraceRecord {
  std::size_t iter = 0;
  double f_raw = 0.0;
  double loss = 0.0;  // |f_raw - f*| when the optimum is known, f_raw otherwise
  double grad_norm = 0.0;
  double dt_used = 0.0;
  std::optional<double> alpha;             // mean_i r_i / sqrt(shifted f)
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  std::optional<double> r_min;
  std::optional<double> r_max;
  std::optional<double> modified_energy;   // ||r||^2 (scalar schemes: r^2)
  std::optional<double> dissipation_margin;  // certified slack, <= 0 in exact arithmetic
  std::string proposal_event;              // step-size proposal outcome, empty if none
};

struct RateEstimate {
  std::vector<double> epsilons;
  // q_values[k] = ln(eps[k+2]/eps[k+1]) / ln(eps[k+1]/eps[k]); absent where a
  // ratio degenerates (equal neighbors, underflowed logs). Size is always
  // epsilons.size() - 2.
  std::vector<std::optional<double>> q_values;
};

// Empirical per-step convergence order from an error sequence. Requires at
// least 3 finite positive entries; otherwise throws InsufficientData.
RateEstimate estimate_rate(const std::vector<double>& epsilons);

struct CheckResult {
  bool ok = true;
  std::optional<std::size_t> first_violation;  // iter of the first offending record
  double worst = 0.0;                          // most positive violation found
};

// True iff dissipation_margin <= tol at every record that carries one, and
// the modified energy never increases by more than tol between consecutive
// records. psi must lie in (0, 1) (it parameterizes the budget already baked
// into the margin column).
CheckResult check_modified_dissipation(const std::vector<TraceRecord>& trace,
                                       double psi, double tol);

// True iff f_raw is nonincreasing within tol across the trace.
CheckResult check_original_dissipation(const std::vector<TraceRecord>& trace, double tol);

// Per-iteration |mean_i r_i - sqrt(shifted f)|, reconstructed from the alpha
// column as |alpha - 1| * sqrt(f_raw + shift). Records without alpha (plain
// gradient descent) contribute 0.
std::vector<double> energy_gap(const std::vector<TraceRecord>& trace, double shift = 0.0);

}  // namespace ersav::diagnostics
