#include "adsgd/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adsgd/errors.hpp"

namespace adsgd {

double Regularizer::block_value(std::span<const double> v) const {
  double acc = 0.0;
  if (kind_ == RegularizerKind::L1) {
    for (double x : v) acc += std::abs(x);
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double Regularizer::block_dual_norm(std::span<const double> u) const {
  if (kind_ == RegularizerKind::L1) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  for (double x : u) acc += x * x;
  return std::sqrt(acc);
}

void Regularizer::block_prox(std::span<double> v, double threshold) const {
  if (kind_ == RegularizerKind::L1) {
    for (double& x : v) {
      const double a = std::abs(x) - threshold;
      x = a > 0.0 ? std::copysign(a, x) : 0.0;
    }
    return;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm <= threshold) {
    for (double& x : v) x = 0.0;
    return;
  }
  const double shrink = 1.0 - threshold / norm;
  for (double& x : v) x *= shrink;
}

std::string_view Regularizer::name() const {
  return kind_ == RegularizerKind::L1 ? "l1" : "group";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
  if (name == "l1") return RegularizerKind::L1;
  if (name == "group" || name == "group-l2") return RegularizerKind::GroupL2;
  throw InvalidArgument("unknown regularizer '" + std::string(name) + "' (expected l1|group)");
}

}  // namespace adsgd
