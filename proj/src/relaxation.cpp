#include "ersav/relaxation.hpp"

#include <algorithm>
#include <cmath>

namespace ersav::relaxation {

RelaxationOutcome solve_eta(double r_tilde, double sqrt_f_next, double dx, double dt,
                            const RelaxationParams& params) {
  const double s = sqrt_f_next;
  if (!std::isfinite(r_tilde) || !std::isfinite(s) || !std::isfinite(dx) ||
      !std::isfinite(dt)) {
    throw core::NumericalFailure("solve_eta: non-finite input");
  }
  if (r_tilde < 0.0 || s <= 0.0 || dt <= 0.0) {
    throw core::NumericalFailure(
        "solve_eta: domain violation (need r_tilde >= 0, sqrt_f_next > 0, dt > 0)");
  }
  if (!(params.psi > 0.0 && params.psi < 1.0)) {
    throw core::ConfigError("solve_eta: psi must lie in (0, 1)");
  }

  const double budget = (params.psi / dt) * dx * dx;
  const double a = (s - r_tilde) * (s - r_tilde);
  const double b = 2.0 * s * (r_tilde - s);
  const double c = s * s - r_tilde * r_tilde - budget;
  const double disc = b * b - 4.0 * a * c;
  // Algebraically disc = 4 a (r_tilde^2 + budget) >= 0; with finite inputs a
  // materially negative value cannot arise from roundoff alone.
  if (disc < -params.discriminant_clamp * std::max(1.0, b * b)) {
    throw core::NumericalFailure("solve_eta: negative discriminant");
  }

  double eta = 0.0;
  if (s <= r_tilde) {
    // Moving r toward sqrt(f) lowers it: q(0) = c <= -budget <= 0, feasible.
    eta = 0.0;
  } else if (a <= params.a_tolerance * std::max(s * s, r_tilde * r_tilde) && c <= 0.0) {
    // Degenerate quadratic: s is within sqrt(a_tolerance) relative of r_tilde
    // and eta = 0 is already feasible, so skip the noise-over-noise division.
    eta = 0.0;
  } else {
    eta = (s - std::sqrt(r_tilde * r_tilde + budget)) / (s - r_tilde);
    eta = std::clamp(eta, 0.0, 1.0);
  }

  RelaxationOutcome out;
  out.eta = eta;
  out.r_relaxed = eta * r_tilde + (1.0 - eta) * s;
  const double q_at_eta = (a * eta + b) * eta + c;
  out.feasible = q_at_eta <= 1e-9 * std::max(1.0, s * s);
  return out;
}

}  // namespace ersav::relaxation
