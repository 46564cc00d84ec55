#include <cmath>

#include "doctest.h"
#include "ersav/cli.hpp"
#include "ersav/diagnostics.hpp"

using namespace ersav;
using diagnostics::TraceRecord;

TEST_CASE("rate estimation on a geometric sequence") {
  // Halving errors: every ratio is 1/2, so every q is exactly 1.
  std::vector<double> eps;
  for (int n = 0; n < 8; ++n) eps.push_back(std::pow(2.0, -n));
  const auto est = diagnostics::estimate_rate(eps);
  REQUIRE(est.q_values.size() == 6);
  for (const auto& q : est.q_values) {
    REQUIRE(q.has_value());
    CHECK(*q == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rate estimation reproduces reference error columns") {
  const std::vector<double> col_a = {0.4931, 0.1604, 0.0098, 7.54e-5, 3.69e-8, 1.39e-13};
  const std::vector<double> ref_a = {2.4921, 1.7382, 1.5673, 1.6385};
  const std::vector<double> col_b = {0.1096, 0.0201, 0.0016, 2.70e-5, 3.72e-8, 8.68e-13};
  const std::vector<double> ref_b = {1.4949, 1.6101, 1.6140, 1.6192};
  for (const auto& [col, ref] : {std::pair{col_a, ref_a}, std::pair{col_b, ref_b}}) {
    const auto est = diagnostics::estimate_rate(col);
    REQUIRE(est.q_values.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      REQUIRE(est.q_values[i].has_value());
      CHECK(std::abs(*est.q_values[i] - ref[i]) <= 0.01);
    }
  }
}

TEST_CASE("rate estimation needs three usable points") {
  CHECK_THROWS_AS(diagnostics::estimate_rate({1.0, 0.5}), core::InsufficientData);
  CHECK_THROWS_AS(diagnostics::estimate_rate({1.0, 0.5, 0.0}), core::InsufficientData);
  CHECK_THROWS_AS(diagnostics::estimate_rate({}), core::InsufficientData);
}

TEST_CASE("rate estimation skips degenerate windows") {
  const auto est = diagnostics::estimate_rate({1.0, 1e-2, 1e-4, 0.0, 1e-8});
  REQUIRE(est.q_values.size() == 3);
  REQUIRE(est.q_values[0].has_value());
  CHECK(*est.q_values[0] == doctest::Approx(1.0));
  CHECK_FALSE(est.q_values[1].has_value());
  CHECK_FALSE(est.q_values[2].has_value());

  // Stalled errors give a zero denominator; the window is skipped, not NaN.
  const auto stalled = diagnostics::estimate_rate({0.5, 0.5, 0.25, 0.125});
  CHECK_FALSE(stalled.q_values[0].has_value());
  REQUIRE(stalled.q_values[1].has_value());
}

TEST_CASE("rate estimation is scale invariant") {
  const std::vector<double> base = {0.4931, 0.1604, 0.0098, 7.54e-5, 3.69e-8};
  std::vector<double> scaled;
  for (double e : base) scaled.push_back(1e-3 * e);
  const auto est_base = diagnostics::estimate_rate(base);
  const auto est_scaled = diagnostics::estimate_rate(scaled);
  for (std::size_t i = 0; i < est_base.q_values.size(); ++i) {
    // Not bitwise (the logs shift), but far tighter than the reporting tolerance.
    CHECK(*est_scaled.q_values[i] == doctest::Approx(*est_base.q_values[i]).epsilon(1e-9));
  }
}

namespace {

TraceRecord make_record(std::size_t iter, double f_raw, double energy, double margin) {
  TraceRecord rec;
  rec.iter = iter;
  rec.f_raw = f_raw;
  rec.loss = f_raw;
  rec.modified_energy = energy;
  rec.dissipation_margin = margin;
  return rec;
}

}  // namespace

TEST_CASE("modified dissipation checker") {
  std::vector<TraceRecord> trace = {make_record(0, 10.0, 20.0, 0.0),
                                    make_record(1, 8.0, 15.0, -1e-3),
                                    make_record(2, 7.0, 12.0, -2e-5)};
  CHECK(diagnostics::check_modified_dissipation(trace, 0.95, 1e-9).ok);

  trace[2].dissipation_margin = 3e-4;
  auto res = diagnostics::check_modified_dissipation(trace, 0.95, 1e-9);
  CHECK_FALSE(res.ok);
  REQUIRE(res.first_violation.has_value());
  CHECK(*res.first_violation == 2);
  CHECK(res.worst == doctest::Approx(3e-4));

  trace[2].dissipation_margin = -1e-5;
  trace[2].modified_energy = 15.5;  // energy uptick between rows 1 and 2
  CHECK_FALSE(diagnostics::check_modified_dissipation(trace, 0.95, 1e-9).ok);

  CHECK_THROWS_AS(diagnostics::check_modified_dissipation(trace, 1.5, 1e-9),
                  core::ConfigError);
}

TEST_CASE("original dissipation checker") {
  std::vector<TraceRecord> trace = {make_record(0, 10.0, 0.0, 0.0),
                                    make_record(1, 9.0, 0.0, 0.0),
                                    make_record(2, 9.0 + 5e-13, 0.0, 0.0)};
  CHECK(diagnostics::check_original_dissipation(trace, 1e-12).ok);

  trace[2].f_raw = 9.1;
  auto res = diagnostics::check_original_dissipation(trace, 1e-12);
  CHECK_FALSE(res.ok);
  CHECK(*res.first_violation == 2);

  trace[2].f_raw = std::nan("");
  CHECK_FALSE(diagnostics::check_original_dissipation(trace, 1e-12).ok);
}

TEST_CASE("energy gap reconstruction") {
  std::vector<TraceRecord> trace(2);
  trace[0].iter = 0;
  trace[0].f_raw = 3.0;
  trace[0].alpha = 1.0;
  trace[1].iter = 1;
  trace[1].f_raw = 3.0;
  trace[1].alpha = 1.5;
  const auto gaps = diagnostics::energy_gap(trace, 1.0);
  CHECK(gaps[0] == 0.0);
  CHECK(gaps[1] == doctest::Approx(0.5 * 2.0));

  TraceRecord plain;
  plain.f_raw = 7.0;
  CHECK(diagnostics::energy_gap({plain})[0] == 0.0);
}

TEST_CASE("adaptive scheme keeps the energies tied on the valley benchmark") {
  const auto adaptive = cli::rosenbrock_run(optimizers::Method::AERSAV, 1.5e-3, 200);
  const auto plain = cli::rosenbrock_run(optimizers::Method::ESAV, 1.5e-3, 200);
  REQUIRE(adaptive.trace.size() >= 100);
  REQUIRE(plain.trace.size() >= 100);
  double worst_adaptive = 0.0;
  double worst_plain = 0.0;
  for (std::size_t k = 5; k < 100; ++k) {
    REQUIRE(adaptive.trace[k].alpha.has_value());
    worst_adaptive = std::max(worst_adaptive, std::abs(*adaptive.trace[k].alpha - 1.0));
    worst_plain = std::max(worst_plain, std::abs(*plain.trace[k].alpha - 1.0));
  }
  CHECK(worst_adaptive <= 1e-3);
  CHECK(worst_adaptive < worst_plain);
}
