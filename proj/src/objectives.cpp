#include "ersav/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ersav::objectives {

using core::ConfigError;
using core::DenseVector;
using core::Objective;

namespace {

// delta = min(1, shift + raw minimum), floored away from zero so the guard
// stays a positive real even for unshifted zero-minimum functions.
double positivity_floor_for(double shift, double raw_minimum) {
  return std::max(std::min(1.0, shift + raw_minimum), 1e-12);
}

}  // namespace

BenchmarkSpec benchmark_spec(const core::Objective& obj) {
  BenchmarkSpec spec;
  spec.name = obj.name;
  spec.dim = obj.dim;
  spec.domain = obj.domain;
  spec.default_x0 = obj.default_x0;
  if (obj.optimum_x) spec.optimum_x = *obj.optimum_x;
  if (obj.optimum_value) spec.optimum_value = *obj.optimum_value;
  return spec;
}

core::Objective make_illcond_quadratic(std::size_t n, double shift) {
  if (n == 0 || n % 2 != 0) {
    throw ConfigError("make_illcond_quadratic: n must be a positive even integer");
  }
  if (shift < 0.0) {
    throw ConfigError("make_illcond_quadratic: shift must be nonnegative");
  }
  const double soft = 1.0 / static_cast<double>(n);
  Objective obj;
  obj.name = "quadratic" + std::to_string(n);
  obj.dim = n;
  obj.value = [n, soft](const DenseVector& x) {
    double stiff_part = 0.0;
    double soft_part = 0.0;
    for (std::size_t i = 0; i < n; i += 2) stiff_part += x[i] * x[i];
    for (std::size_t i = 1; i < n; i += 2) soft_part += x[i] * x[i];
    return stiff_part + soft * soft_part;
  };
  obj.gradient = [n, soft](const DenseVector& x) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = (i % 2 == 0) ? 2.0 * x[i] : 2.0 * soft * x[i];
    }
    return DenseVector(std::move(g));
  };
  obj.hessian_diagonal = [n, soft](const DenseVector&) {
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = (i % 2 == 0) ? 2.0 : 2.0 * soft;
    return DenseVector(std::move(h));
  };
  obj.hessian_diagonal_constant = true;
  obj.shift = shift;
  obj.positivity_floor = positivity_floor_for(shift, 0.0);
  obj.optimum_x = DenseVector(n, 0.0);
  obj.optimum_value = 0.0;
  obj.default_x0 = DenseVector::ones(n);
  obj.domain.assign(n, {-3.0, 3.0});
  return obj;
}

core::Objective make_rosenbrock(double shift) {
  if (shift < 0.0) {
    throw ConfigError("make_rosenbrock: shift must be nonnegative");
  }
  Objective obj;
  obj.name = "rosenbrock";
  obj.dim = 2;
  obj.value = [](const DenseVector& x) {
    const double u = 1.0 - x[0];
    const double v = x[1] - x[0] * x[0];
    return u * u + 100.0 * v * v;
  };
  obj.gradient = [](const DenseVector& x) {
    const double v = x[1] - x[0] * x[0];
    std::vector<double> g(2);
    g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * v;
    g[1] = 200.0 * v;
    return DenseVector(std::move(g));
  };
  obj.hessian_diagonal = [](const DenseVector& x) {
    std::vector<double> h(2);
    h[0] = 2.0 - 400.0 * x[1] + 1200.0 * x[0] * x[0];
    h[1] = 200.0;
    return DenseVector(std::move(h));
  };
  obj.hessian_diagonal_constant = false;
  obj.shift = shift;
  obj.positivity_floor = positivity_floor_for(shift, 0.0);
  obj.optimum_x = DenseVector(std::vector<double>{1.0, 1.0});
  obj.optimum_value = 0.0;
  obj.default_x0 = DenseVector(std::vector<double>{-2.0, -4.0});
  obj.domain = {{-2.5, 2.5}, {-4.5, 2.5}};
  return obj;
}

core::Objective make_cubic_univariate() {
  Objective obj;
  obj.name = "cubic1d";
  obj.dim = 1;
  obj.value = [](const DenseVector& x) {
    return x[0] * x[0] * x[0] / 3.0 - 100.0 * x[0] + 1000.0;
  };
  obj.gradient = [](const DenseVector& x) {
    return DenseVector(std::vector<double>{x[0] * x[0] - 100.0});
  };
  obj.hessian_diagonal = [](const DenseVector& x) {
    return DenseVector(std::vector<double>{2.0 * x[0]});
  };
  obj.hessian_diagonal_constant = false;
  obj.shift = 0.0;
  obj.positivity_floor = positivity_floor_for(0.0, 1000.0 / 3.0);
  obj.optimum_x = DenseVector(std::vector<double>{10.0});
  obj.optimum_value = 1000.0 / 3.0;
  obj.default_x0 = DenseVector(std::vector<double>{11.0});
  obj.domain = {{0.0, 20.0}};
  return obj;
}

core::Objective make_sine_univariate() {
  Objective obj;
  obj.name = "sine1d";
  obj.dim = 1;
  obj.value = [](const DenseVector& x) {
    const double u = std::sin(x[0]) - 0.5;
    return u * u + 5.0;
  };
  obj.gradient = [](const DenseVector& x) {
    return DenseVector(
        std::vector<double>{2.0 * (std::sin(x[0]) - 0.5) * std::cos(x[0])});
  };
  obj.hessian_diagonal = [](const DenseVector& x) {
    return DenseVector(
        std::vector<double>{2.0 * std::cos(2.0 * x[0]) + std::sin(x[0])});
  };
  obj.hessian_diagonal_constant = false;
  obj.shift = 0.0;
  obj.positivity_floor = positivity_floor_for(0.0, 5.0);
  obj.optimum_x = DenseVector(std::vector<double>{std::numbers::pi / 6.0});
  obj.optimum_value = 5.0;
  obj.default_x0 = DenseVector(std::vector<double>{0.0});
  obj.domain = {{-1.0, 2.0}};
  return obj;
}

core::Objective make_benchmark(const std::string& name) {
  if (name == "quadratic100") return make_illcond_quadratic(100);
  if (name == "rosenbrock") return make_rosenbrock();
  if (name == "cubic1d") return make_cubic_univariate();
  if (name == "sine1d") return make_sine_univariate();
  throw ConfigError("unknown benchmark '" + name +
                    "' (expected one of: quadratic100, rosenbrock, cubic1d, sine1d)");
}

std::vector<std::string> benchmark_names() {
  return {"quadratic100", "rosenbrock", "cubic1d", "sine1d"};
}

}  // namespace ersav::objectives
