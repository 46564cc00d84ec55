#pragma once

#include <string>
#include <vector>

#include "ersav/core.hpp"

namespace ersav::objectives {

// Name, shape, and optimum of a benchmark, extracted from an Objective for
// reporting and start-point validation.
struct BenchmarkSpec {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::pair<double, double>> domain;  // empty when unbounded
  core::DenseVector default_x0;
  core::DenseVector optimum_x;
  double optimum_value = 0.0;  // raw value at the optimum
};

BenchmarkSpec benchmark_spec(const core::Objective& obj);

// Ill-conditioned diagonal quadratic: unit curvature on odd coordinates
// (1-based), curvature 2/n on even ones, so the Hessian condition number is
// n. The auxiliary-variable schemes consume the function shifted up by
// `shift` so it stays strictly positive; losses are always reported on the
// raw function. n must be even.
core::Objective make_illcond_quadratic(std::size_t n, double shift = 1.0);

// The classic banana valley f = (1 - x1)^2 + 100 (x2 - x1^2)^2, raw minimum 0
// at (1, 1); ships with shift = 1 so the shifted function stays positive.
core::Objective make_rosenbrock(double shift = 1.0);

// f(x) = x^3/3 - 100 x + 1000 on [0, 20], minimum (10, 1000/3). The minimum
// is already positive, so no shift is needed.
core::Objective make_cubic_univariate();

// g(x) = (sin x - 1/2)^2 + 5 on [-1, 2], minimum (pi/6, 5).
core::Objective make_sine_univariate();

// Benchmarks addressable by CLI name: quadratic100, rosenbrock, cubic1d,
// sine1d. Unknown names raise ConfigError.
core::Objective make_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

}  // namespace ersav::objectives
