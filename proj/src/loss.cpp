#include "adsgd/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adsgd/errors.hpp"

namespace adsgd {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Slack for rounding when a dual coordinate sits on the domain boundary.
constexpr double kDomainSlack = 1e-12;

}  // namespace

double Loss::value(double z, double y) const {
  if (kind_ == LossKind::SquaredError) {
    const double r = y - z;
    return 0.5 * r * r;
  }
  return softplus(z) - y * z;
}

double Loss::derivative(double z, double y) const {
  if (kind_ == LossKind::SquaredError) return z - y;
  return sigmoid(z) - y;
}

double Loss::second_derivative(double z, double /*y*/) const {
  if (kind_ == LossKind::SquaredError) return 1.0;
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

double Loss::conjugate(double u, double y) const {
  if (kind_ == LossKind::SquaredError) return 0.5 * u * u + u * y;
  // sup_z (u + y) z - log(1 + e^z): finite only for p = u + y in [0, 1].
  double p = u + y;
  if (p < -kDomainSlack || p > 1.0 + kDomainSlack)
    return std::numeric_limits<double>::infinity();
  p = std::clamp(p, 0.0, 1.0);
  return xlogx(p) + xlogx(1.0 - p);
}

std::string_view Loss::name() const {
  return kind_ == LossKind::SquaredError ? "lasso" : "logistic";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "lasso" || name == "squared") return LossKind::SquaredError;
  if (name == "logistic") return LossKind::Logistic;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (expected lasso|logistic)");
}

}  // namespace adsgd
