#include "ersav/core.hpp"

#include <algorithm>

namespace ersav::core {

void require_same_dim(const DenseVector& a, const DenseVector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw ConfigError(std::string(op) + ": dimension mismatch (" +
                      std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

DenseVector add(const DenseVector& a, const DenseVector& b) {
  require_same_dim(a, b, "add");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return DenseVector(std::move(out));
}

DenseVector sub(const DenseVector& a, const DenseVector& b) {
  require_same_dim(a, b, "sub");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return DenseVector(std::move(out));
}

DenseVector scale(double s, const DenseVector& a) {
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = s * a[i];
  return DenseVector(std::move(out));
}

DenseVector hadamard(const DenseVector& a, const DenseVector& b) {
  require_same_dim(a, b, "hadamard");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return DenseVector(std::move(out));
}

double dot(const DenseVector& a, const DenseVector& b) {
  require_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_sq(const DenseVector& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * a[i];
  return acc;
}

double norm(const DenseVector& a) { return std::sqrt(norm_sq(a)); }

double inf_norm(const DenseVector& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double mean(const DenseVector& a) {
  if (a.dim() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i];
  return acc / static_cast<double>(a.dim());
}

double shifted_value(const Objective& obj, const DenseVector& x) {
  const double raw = obj.value(x);
  const double shifted = raw + obj.shift;
  if (!std::isfinite(shifted)) {
    throw NumericalFailure("shifted_value(" + obj.name + "): value is not finite");
  }
  if (shifted < obj.positivity_floor) {
    throw PositivityViolation("shifted_value(" + obj.name + "): value " +
                              std::to_string(shifted) + " fell below the floor " +
                              std::to_string(obj.positivity_floor));
  }
  return shifted;
}

DenseVector finite_diff_gradient(const Objective& obj, const DenseVector& x, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("finite_diff_gradient: h must be a positive real");
  }
  std::vector<double> out(x.dim());
  std::vector<double> probe = x.entries();
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = obj.value(DenseVector(probe));
    probe[i] = xi - h;
    const double fm = obj.value(DenseVector(probe));
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalFailure("finite_diff_gradient(" + obj.name +
                             "): non-finite value at probe for coordinate " +
                             std::to_string(i));
    }
    out[i] = (fp - fm) / (2.0 * h);
  }
  return DenseVector(std::move(out));
}

SplittingOperator SplittingOperator::diagonal(DenseVector lambdas, bool clamp_negative) {
  for (std::size_t i = 0; i < lambdas.dim(); ++i) {
    if (lambdas[i] < 0.0) {
      if (!clamp_negative) {
        throw ConfigError("SplittingOperator: negative lambda at coordinate " +
                          std::to_string(i) +
                          " (pass clamp_negative to clamp to zero)");
      }
      lambdas[i] = 0.0;
    }
  }
  return SplittingOperator(std::move(lambdas));
}

ElementAuxState make_element_state(const Objective& obj, DenseVector x0) {
  if (x0.dim() != obj.dim) {
    throw ConfigError("make_element_state: x0 dimension " + std::to_string(x0.dim()) +
                      " does not match objective dimension " + std::to_string(obj.dim));
  }
  ElementAuxState st;
  const double r0 = std::sqrt(shifted_value(obj, x0));
  st.r = DenseVector(x0.dim(), r0);
  st.x = std::move(x0);
  return st;
}

ScalarAuxState make_scalar_state(const Objective& obj, DenseVector x0) {
  if (x0.dim() != obj.dim) {
    throw ConfigError("make_scalar_state: x0 dimension " + std::to_string(x0.dim()) +
                      " does not match objective dimension " + std::to_string(obj.dim));
  }
  ScalarAuxState st;
  st.r = std::sqrt(shifted_value(obj, x0));
  st.x = std::move(x0);
  return st;
}

}  // namespace ersav::core
