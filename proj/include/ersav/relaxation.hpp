#pragma once

#include "ersav/core.hpp"

namespace ersav::relaxation {

struct RelaxationParams {
  // Fraction of the per-step dissipation budget the relaxed auxiliary value
  // may consume; must lie strictly inside (0, 1).
  double psi = 0.95;
  // Relative threshold (against max(f_next, r_tilde^2)) under which the
  // constraint quadratic is treated as degenerate. See solve_eta.
  double a_tolerance = 1e-14;
  // Relative guard on the discriminant sign contract: a discriminant below
  // -discriminant_clamp * max(1, b^2) indicates corrupted inputs.
  double discriminant_clamp = 1e-10;
};

struct RelaxationOutcome {
  double eta = 0.0;        // minimal feasible weight in [0, 1]
  double r_relaxed = 0.0;  // eta * r_tilde + (1 - eta) * sqrt_f_next
  bool feasible = true;    // constraint satisfied at eta (small relative slack)
};

// Finds the smallest eta in [0, 1] such that the relaxed auxiliary value
// r = eta * r_tilde + (1 - eta) * sqrt_f_next satisfies
//
//   r^2 - r_tilde^2 <= (psi / dt) * dx^2,
//
// i.e. re-tethering r toward sqrt(f) spends at most a psi-fraction of the
// step's dissipation budget. Expanding gives the quadratic
// q(eta) = a eta^2 + b eta + c <= 0 with
//
//   a = (s - r_tilde)^2,  b = 2 s (r_tilde - s),  c = s^2 - r_tilde^2 - B,
//
// where s = sqrt_f_next and B = (psi / dt) * dx^2. Since q(1) = -B <= 0, a
// feasible eta always exists and the answer is the smaller root clamped to
// [0, 1]. The discriminant satisfies b^2 - 4ac = 4a(r_tilde^2 + B) >= 0
// exactly, so the smaller root reduces to
//
//   eta = (s - sqrt(r_tilde^2 + B)) / (s - r_tilde)   for s > r_tilde,
//
// which stays accurate at any scale; the textbook (-b - sqrt(disc)) / (2a)
// form cancels catastrophically once the iterate converges and a, b, c all
// shrink toward roundoff. For s <= r_tilde, q(0) = c <= -B <= 0, so eta = 0.
//
// Errors: non-finite inputs, r_tilde < 0, sqrt_f_next <= 0, or dt <= 0 throw
// NumericalFailure; a discriminant below the clamp throws NumericalFailure;
// psi outside (0, 1) throws ConfigError.
RelaxationOutcome solve_eta(double r_tilde, double sqrt_f_next, double dx, double dt,
                            const RelaxationParams& params = {});

}  // namespace ersav::relaxation
