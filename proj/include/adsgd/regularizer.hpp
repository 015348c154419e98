#pragma once

#include <span>
#include <string_view>

namespace adsgd {

enum class RegularizerKind {
  L1,       ///< Omega_j(v) = sum |v_k|; dual norm max |u_k|
  GroupL2,  ///< Omega_j(v) = ||v||_2; self-dual
};

/// Block-separable norm Omega(x) = sum_j Omega_j(x_{G_j}).
class Regularizer {
 public:
  explicit Regularizer(RegularizerKind kind) : kind_(kind) {}

  RegularizerKind kind() const { return kind_; }

  double block_value(std::span<const double> v) const;
  double block_dual_norm(std::span<const double> u) const;

  /// In place: v <- argmin_p 0.5 ||p - v||^2 + threshold * Omega_j(p).
  /// The block proximal step prox_{eta,lambda} uses threshold = eta * lambda.
  void block_prox(std::span<double> v, double threshold) const;

  std::string_view name() const;

 private:
  RegularizerKind kind_;
};

RegularizerKind parse_regularizer_kind(std::string_view name);

}  // namespace adsgd
