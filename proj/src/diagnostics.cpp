#include "ersav/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace ersav::diagnostics {

RateEstimate estimate_rate(const std::vector<double>& epsilons) {
  std::size_t usable = 0;
  for (double e : epsilons) {
    if (std::isfinite(e) && e > 0.0) ++usable;
  }
  if (usable < 3) {
    throw core::InsufficientData("estimate_rate: need at least 3 positive error values, got " +
                                 std::to_string(usable));
  }
  RateEstimate est;
  est.epsilons = epsilons;
  const std::size_t n = epsilons.size();
  est.q_values.assign(n - 2, std::nullopt);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const double e0 = epsilons[k];
    const double e1 = epsilons[k + 1];
    const double e2 = epsilons[k + 2];
    const bool well_posed = std::isfinite(e0) && e0 > 0.0 && std::isfinite(e1) &&
                            e1 > 0.0 && std::isfinite(e2) && e2 > 0.0 && e1 != e0 &&
                            e2 != e1;
    if (!well_posed) continue;
    const double num = std::log(e2 / e1);
    const double den = std::log(e1 / e0);
    if (den == 0.0 || !std::isfinite(num) || !std::isfinite(den)) continue;
    const double q = num / den;
    if (std::isfinite(q)) est.q_values[k] = q;
  }
  return est;
}

CheckResult check_modified_dissipation(const std::vector<TraceRecord>& trace,
                                       double psi, double tol) {
  if (!(psi > 0.0 && psi < 1.0)) {
    throw core::ConfigError("check_modified_dissipation: psi must lie in (0, 1)");
  }
  CheckResult res;
  auto flag = [&res](std::size_t iter, double violation) {
    if (!res.first_violation) res.first_violation = iter;
    res.ok = false;
    res.worst = std::max(res.worst, violation);
  };
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& rec = trace[k];
    if (rec.dissipation_margin && *rec.dissipation_margin > tol) {
      flag(rec.iter, *rec.dissipation_margin);
    }
    if (k > 0 && rec.modified_energy && trace[k - 1].modified_energy) {
      const double uptick = *rec.modified_energy - *trace[k - 1].modified_energy;
      if (uptick > tol) flag(rec.iter, uptick);
    }
  }
  return res;
}

CheckResult check_original_dissipation(const std::vector<TraceRecord>& trace, double tol) {
  CheckResult res;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double uptick = trace[k].f_raw - trace[k - 1].f_raw;
    if (!(uptick <= tol)) {  // catches NaN as a violation too
      if (!res.first_violation) res.first_violation = trace[k].iter;
      res.ok = false;
      if (std::isfinite(uptick)) res.worst = std::max(res.worst, uptick);
    }
  }
  return res;
}

std::vector<double> energy_gap(const std::vector<TraceRecord>& trace, double shift) {
  std::vector<double> gaps;
  gaps.reserve(trace.size());
  for (const auto& rec : trace) {
    if (rec.alpha) {
      gaps.push_back(std::abs(*rec.alpha - 1.0) * std::sqrt(rec.f_raw + shift));
    } else {
      gaps.push_back(0.0);
    }
  }
  return gaps;
}

}  // namespace ersav::diagnostics
