#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ersav/core.hpp"
#include "ersav/diagnostics.hpp"
#include "ersav/relaxation.hpp"

namespace ersav::optimizers {

enum class Method { GD, SAV, RSAV, ESAV, ERSAV, ERSAVL, Superlinear, AERSAV };

Method method_from_string(const std::string& name);  // ConfigError on unknown names
std::string method_name(Method method);

struct StepController {
  double dt0 = 0.01;
  // Indicator threshold for the adaptive scheme: the Steffensen proposal is
  // consulted only when |1 - alpha| exceeds beta.
  double beta = 0.1;
  double secant_denominator_tol = 1e-12;
  double steffensen_denominator_tol = 1e-12;
  enum class DtFallback { KeepPrevious };
  DtFallback dt_fallback_policy = DtFallback::KeepPrevious;
};

struct StepSizeProposal {
  enum class Reason { Proposed, DenominatorTooSmall, NonPositive, NonFinite };
  double dt = 0.0;
  double phi = 0.0;  // Steffensen curvature prefactor; 0 for secant proposals
  bool accepted = false;
  Reason reason = Reason::Proposed;
};

std::string proposal_reason_name(StepSizeProposal::Reason reason);

// Result of one optimizer step. Scalar schemes report their single auxiliary
// value as dimension-1 r vectors. eta stays empty for non-relaxed schemes.
struct StepOutcome {
  core::DenseVector x_next;
  core::DenseVector r_tilde;
  core::DenseVector r_next;
  std::vector<double> eta;
  double dt_used = 0.0;
  std::optional<StepSizeProposal> proposal;  // set when a step-size proposal was evaluated
};

// Plain explicit gradient descent: x - dt * grad.
core::DenseVector gd_step(const core::DenseVector& x, const core::DenseVector& grad,
                          double dt);

// Element-wise auxiliary-variable step without relaxation. With F the shifted
// objective value at x and g its gradient:
//
//   r_tilde_i = r_i / (1 + dt g_i^2 / (2 (1 + dt lambda_i) F))
//   x_next_i  = x_i - dt / (1 + dt lambda_i) * (r_tilde_i / sqrt(F)) * g_i
//
// and r_next = r_tilde. The committed energy satisfies, coordinate-wise,
// r_tilde^2 - r^2 + (r_tilde - r)^2 + lambda dx^2 + dx^2 / dt = 0.
StepOutcome esav_step(const core::ElementAuxState& state, const core::Objective& obj,
                      const core::SplittingOperator& L, double dt);

// esav_step followed by the per-coordinate relaxation: each r_tilde_i is
// re-tethered toward sqrt(shifted f(x_next)) as far as the coordinate's
// dissipation budget (psi / dt) dx_i^2 allows.
StepOutcome ersav_step(const core::ElementAuxState& state, const core::Objective& obj,
                       const core::SplittingOperator& L, double dt,
                       const relaxation::RelaxationParams& params);

// Scalar auxiliary-variable step: one r for the whole iterate,
// r_tilde = r / (1 + sum_i dt g_i^2 / (2 (1 + dt lambda_i) F)), same x update
// as esav_step with the scalar r_tilde. In one dimension this coincides with
// esav_step bit for bit.
StepOutcome sav_step(const core::ScalarAuxState& state, const core::Objective& obj,
                     const core::SplittingOperator& L, double dt);

// sav_step followed by the scalar relaxation, whose budget uses the full
// squared step length ||x_next - x||^2.
StepOutcome rsav_step(const core::ScalarAuxState& state, const core::Objective& obj,
                      const core::SplittingOperator& L, double dt,
                      const relaxation::RelaxationParams& params);

// Univariate secant step size dt = (sqrt(F)/r) (x - x_prev)/(f'(x) - f'(x_prev)).
// Rejected (accepted = false) when the slope difference is degenerate, the
// result is nonpositive, or it overflows; the caller then keeps its current dt.
StepSizeProposal secant_dt(const core::ElementAuxState& state, const core::Objective& obj,
                           const StepController& controller);

// Univariate scheme with secant-accelerated step size: from iteration 1 on,
// sets dt via secant_dt (keeping state.dt_current on rejection) and performs
// a relaxed auxiliary step with trivial splitting at that dt. The first step
// of a run (iter == 0) must instead use a plain relaxed step at dt0; run()
// handles that, and this kernel requires iter >= 1.
StepOutcome superlinear_step(const core::ElementAuxState& state, const core::Objective& obj,
                             const StepController& controller,
                             const relaxation::RelaxationParams& params);

// Indicator alpha = mean_i r_i / sqrt(f_now), where f_now is the shifted
// objective value at the current iterate. Equals 1 exactly at iteration 0.
double indicator_alpha(const core::ElementAuxState& state, double f_now);

// Derivative-free curvature-based step size: with dxv = x - x_prev,
// phi = (sqrt(F)/mean(r)) ||dxv||^2 / ((g - g_prev) . dxv), probe gradient at
// x + g, and dt = phi ||g||^2 / ((g_probe - g) . g). Costs exactly one extra
// gradient evaluation. Same rejection contract as secant_dt.
StepSizeProposal steffensen_dt(const core::ElementAuxState& state,
                               const core::Objective& obj,
                               const StepController& controller);

// Adaptive relaxed step: consult steffensen_dt only when |1 - alpha| exceeds
// controller.beta, adopt the proposal if accepted, then perform ersav_step at
// the (possibly updated) dt. The adopted dt persists in the state until the
// gate fires again.
StepOutcome aersav_step(const core::ElementAuxState& state, const core::Objective& obj,
                        const core::SplittingOperator& L, const StepController& controller,
                        const relaxation::RelaxationParams& params);

struct StopRule {
  std::size_t max_iters = 1000;
  double grad_tol = 0.0;
  // Raw loss threshold; negative disables the check (the loss is nonnegative
  // and may legitimately reach exactly 0).
  double loss_tol = -1.0;
  // Raw objective values above this (or any non-finite value) terminate the
  // run with NumericalFailure status.
  double divergence_cap = 1e12;
};

enum class RunStatus { Converged, MaxIters, NumericalFailure };

std::string run_status_name(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::MaxIters;
  std::string failure_detail;  // populated when status == NumericalFailure
  core::DenseVector x_final;
  core::DenseVector r_final;  // dimension-1 for scalar schemes, empty for GD
  std::vector<diagnostics::TraceRecord> trace;
  std::vector<core::DenseVector> iterates;  // x at every recorded iteration
};

// Drives one optimizer to completion. Records one TraceRecord per iteration
// (including the initial state, so max_iters steps yield max_iters + 1 rows).
// Stops on ||grad|| <= grad_tol or loss <= loss_tol (status Converged), on
// the iteration budget (MaxIters), or on divergence / non-finite values
// (NumericalFailure; the offending record is flagged in proposal_event).
//
// The ERSAVL method is ersav_step under a stabilized diagonal splitting
// sourced from the objective's Hessian diagonal: lambda is the largest
// clamped-diagonal entry, applied uniformly. It is evaluated once at x0 for
// constant-diagonal objectives and refreshed every step otherwise. Passing a
// non-zero L overrides that sourcing for any method.
RunResult run(Method method, const core::Objective& obj, const core::SplittingOperator& L,
              const core::DenseVector& x0, const StepController& controller,
              const relaxation::RelaxationParams& params, const StopRule& stop);

}  // namespace ersav::optimizers
