#pragma once

#include <vector>

#include "adsgd/problem.hpp"

namespace adsgd {

/// Dual point in sample space (length n) and the scaling applied to reach it.
struct DualPoint {
  Vector theta;
  double scale_used = 1.0;
};

/**
 * Surviving blocks of a screened run, with their features and cached
 * column bounds Omega_j^D(A_j). Only ever shrinks.
 */
class ActiveSet {
 public:
  /// Every block of `spec`, column bounds computed.
  static ActiveSet full(const ProblemSpec& spec);

  /// Blocks (sorted ids) with precomputed bounds aligned to them.
  ActiveSet(const BlockPartition& partition, std::vector<Index> blocks,
            std::vector<double> column_bounds);

  const std::vector<Index>& blocks() const { return blocks_; }
  const std::vector<Index>& features() const { return features_; }
  const std::vector<double>& column_bounds() const { return column_bounds_; }

  Index block_count() const { return static_cast<Index>(blocks_.size()); }
  Index feature_count() const { return static_cast<Index>(features_.size()); }
  bool empty() const { return blocks_.empty(); }
  bool contains(Index block) const;

  /// Keeps the blocks at positions where keep[k] is true.
  ActiveSet keep(const BlockPartition& partition, const std::vector<bool>& keep) const;

 private:
  std::vector<Index> blocks_;
  std::vector<Index> features_;
  std::vector<double> column_bounds_;
};

/**
 * Block scores Omega_j^D((1/n) A_j^T theta + 2 mu_p x0_{G_j}) for each active
 * block, in active order. Without the perturbation this is the correlation
 * that must stay below lambda for feasibility.
 */
std::vector<double> block_scores(const ProblemSpec& spec, const Vector& theta,
                                 const ActiveSet& active);

/// theta = -g / max(1, (1/n) Omega^D(A_S^T g) / lambda), g_i = f_i'(a_i^T x).
/// With mu_p > 0 every theta is dual feasible and no scaling is applied.
DualPoint dual_point(const ProblemSpec& spec, const Vector& sample_derivs,
                     const ActiveSet& active);

/// D(theta) on the sub-problem over `active`; -infinity outside the
/// conjugate's domain.
double dual_objective(const ProblemSpec& spec, const DualPoint& theta, const ActiveSet& active);

/// P_active(x) - D(theta). Coordinates outside the active features are
/// treated as zero. +infinity when theta leaves the conjugate's domain.
double duality_gap(const ProblemSpec& spec, const Vector& x, const DualPoint& theta,
                   const ActiveSet& active);

/// sqrt(2 * lipschitz * gap); negative gaps clamp to zero.
double safe_radius(double gap, double lipschitz);

/// Drops every block j with score_j + (1/n) Omega_j^D(A_j) r < lambda.
ActiveSet screen(const ProblemSpec& spec, const DualPoint& theta, double r,
                 const ActiveSet& active);

/// Blocks whose score at theta_star is within `tol` of lambda.
std::vector<Index> equicorrelation_set(const ProblemSpec& spec, const DualPoint& theta_star,
                                       double tol = 1e-7);

}  // namespace adsgd
