#pragma once

#include <string_view>

namespace adsgd {

enum class LossKind {
  SquaredError,  ///< f_i(z) = (y_i - z)^2 / 2
  Logistic,      ///< f_i(z) = -y_i z + log(1 + e^z), y_i in {0, 1}
};

/**
 * Per-sample loss f_i(z) of a linear predictor z = a_i^T x.
 *
 * The conjugate is taken in the first argument: conjugate(u, y) = f_i^*(u).
 * Outside the conjugate's domain it returns +infinity.
 */
class Loss {
 public:
  explicit Loss(LossKind kind) : kind_(kind) {}

  LossKind kind() const { return kind_; }

  double value(double z, double y) const;
  double derivative(double z, double y) const;
  double second_derivative(double z, double y) const;
  double conjugate(double u, double y) const;

  /// Upper bound on f_i'' (1 for squared error, 1/4 for logistic).
  double curvature() const { return kind_ == LossKind::SquaredError ? 1.0 : 0.25; }

  std::string_view name() const;

 private:
  LossKind kind_;
};

LossKind parse_loss_kind(std::string_view name);

}  // namespace adsgd
