#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ersav::core {

// An iterate, gradient, or other intermediate quantity stopped being a finite
// real number, or a numeric contract (discriminant sign, divergence cap) was
// violated at runtime.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The shifted objective value dropped below its declared positive floor,
// which means the shift / floor configuration is wrong for this function.
class PositivityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration: dimensions, ranges, unknown keys, etc.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough usable data points for an estimate (rate estimation needs >= 3).
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-size real vector that validates finiteness on construction and after
// every arithmetic operation that returns a DenseVector. Mutation through
// operator[] is allowed for cheap in-place assembly; anything that crosses an
// API boundary gets re-wrapped (and therefore re-validated).
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0)
      : entries_(dim, fill) {
    validate("DenseVector(dim, fill)");
  }
  explicit DenseVector(std::vector<double> entries) : entries_(std::move(entries)) {
    validate("DenseVector(entries)");
  }

  static DenseVector ones(std::size_t dim) { return DenseVector(dim, 1.0); }

  std::size_t dim() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  double& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<double>& entries() const { return entries_; }

  bool all_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void validate(const char* context) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!std::isfinite(entries_[i])) {
        throw NumericalFailure(std::string(context) + ": entry " +
                               std::to_string(i) + " is not finite");
      }
    }
  }

 private:
  std::vector<double> entries_;
};

void require_same_dim(const DenseVector& a, const DenseVector& b, const char* op);

DenseVector add(const DenseVector& a, const DenseVector& b);
DenseVector sub(const DenseVector& a, const DenseVector& b);
DenseVector scale(double s, const DenseVector& a);
DenseVector hadamard(const DenseVector& a, const DenseVector& b);
double dot(const DenseVector& a, const DenseVector& b);
double norm_sq(const DenseVector& a);
double norm(const DenseVector& a);
double inf_norm(const DenseVector& a);
double mean(const DenseVector& a);

// Value/gradient oracle plus the positivity metadata the auxiliary-variable
// schemes rely on. `value` is the raw function; the optimizer consumes
// value + shift, which must stay at or above `positivity_floor`. The optional
// optimum is stated in raw terms (x*, raw f(x*)).
struct Objective {
  std::string name;
  std::size_t dim = 0;
  std::function<double(const DenseVector&)> value;
  std::function<DenseVector(const DenseVector&)> gradient;
  std::function<DenseVector(const DenseVector&)> hessian_diagonal;  // may be empty
  bool hessian_diagonal_constant = false;
  double shift = 0.0;
  double positivity_floor = 1e-12;
  std::optional<DenseVector> optimum_x;
  std::optional<double> optimum_value;
  DenseVector default_x0;
  // Per-coordinate [lo, hi] bounds; used to place starting points and to
  // sample test points. Empty when no natural box exists.
  std::vector<std::pair<double, double>> domain;
};

// Raw value plus shift. Throws PositivityViolation when the result dips below
// the declared floor and NumericalFailure when it is not finite.
double shifted_value(const Objective& obj, const DenseVector& x);

// Central-difference gradient, entry i = (f(x+h e_i) - f(x-h e_i)) / (2h),
// on the raw objective (the shift cancels).
DenseVector finite_diff_gradient(const Objective& obj, const DenseVector& x, double h);

// Diagonal positive semi-definite splitting operator. The zero operator acts
// as lambda_i = 0 for every coordinate and carries no dimension.
class SplittingOperator {
 public:
  static SplittingOperator zero() { return SplittingOperator(); }

  // Negative entries are rejected with ConfigError unless clamp_negative is
  // set, in which case they are clamped to 0. Silent clamping hides modeling
  // mistakes, so it is opt-in.
  static SplittingOperator diagonal(DenseVector lambdas, bool clamp_negative = false);

  bool is_zero() const { return lambdas_.dim() == 0; }
  std::size_t dim() const { return lambdas_.dim(); }
  double lambda(std::size_t i) const { return is_zero() ? 0.0 : lambdas_[i]; }
  const DenseVector& lambdas() const { return lambdas_; }

 private:
  SplittingOperator() = default;
  explicit SplittingOperator(DenseVector lambdas) : lambdas_(std::move(lambdas)) {}
  DenseVector lambdas_;
};

// Full state of an element-wise scheme: one auxiliary value r_i per
// coordinate, plus the previous iterate/gradient needed by the secant and
// Steffensen step-size estimators.
struct ElementAuxState {
  DenseVector x;
  DenseVector r;
  std::size_t iter = 0;
  double dt_current = 0.0;
  std::optional<DenseVector> x_prev;
  std::optional<DenseVector> grad_prev;
};

// State of a scalar scheme: a single auxiliary value for the whole iterate.
struct ScalarAuxState {
  DenseVector x;
  double r = 0.0;
  std::size_t iter = 0;
  double dt_current = 0.0;
};

// Initializes r_i = sqrt(shifted f(x0)) for every coordinate.
ElementAuxState make_element_state(const Objective& obj, DenseVector x0);

// Initializes the scalar r = sqrt(shifted f(x0)).
ScalarAuxState make_scalar_state(const Objective& obj, DenseVector x0);

}  // namespace ersav::core
