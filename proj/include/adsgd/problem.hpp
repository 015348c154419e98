#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "adsgd/dataset.hpp"
#include "adsgd/loss.hpp"
#include "adsgd/partition.hpp"
#include "adsgd/regularizer.hpp"

namespace adsgd {

/**
 * min_x  (1/n) sum_i f_i(a_i^T x) + mu_p ||x - x0||^2 + lambda * Omega(x)
 *
 * The perturbation term is disabled when mu_p == 0. The anchor x0 defaults
 * to the zero vector and doubles as the solvers' initial iterate.
 */
class ProblemSpec {
 public:
  ProblemSpec(std::shared_ptr<const Dataset> data, BlockPartition partition,
              Loss loss, Regularizer reg, double lambda, double mu_p = 0.0,
              std::optional<Vector> anchor = std::nullopt);

  const Dataset& data() const { return *data_; }
  const std::shared_ptr<const Dataset>& data_ptr() const { return data_; }
  const BlockPartition& partition() const { return partition_; }
  const Loss& loss() const { return loss_; }
  const Regularizer& reg() const { return reg_; }
  double lambda() const { return lambda_; }
  double mu_p() const { return mu_p_; }
  const Vector& anchor() const { return anchor_; }

  Index n() const { return data_->n(); }
  Index d() const { return data_->d(); }
  Index blocks() const { return partition_.size(); }

  ProblemSpec with_lambda(double lambda) const;

 private:
  std::shared_ptr<const Dataset> data_;
  BlockPartition partition_;
  Loss loss_;
  Regularizer reg_;
  double lambda_;
  double mu_p_;
  Vector anchor_;
};

struct LipschitzConstants {
  double L = 0.0;  ///< block-wise, per sample
  double T = 0.0;  ///< full gradient, per sample
  std::vector<double> per_block_L;
};

double primal_objective(const ProblemSpec& spec, const Vector& x);
Vector full_gradient(const ProblemSpec& spec, const Vector& x);

/// Mini-batch gradient restricted to block G_j, perturbation included.
/// Batch indices may repeat (sampling with replacement).
Vector partial_gradient(const ProblemSpec& spec, const Vector& x,
                        std::span<const Index> batch, Index block);

LipschitzConstants lipschitz_constants(const ProblemSpec& spec);

/// Smallest lambda for which x = 0 is optimal (lambda is ignored).
double lambda_max(const ProblemSpec& spec);

// Building blocks shared with the duality engine and the solvers.

/// z = A x.
Vector predictions(const ProblemSpec& spec, const Vector& x);
/// g_i = f_i'(z_i).
Vector sample_derivatives(const ProblemSpec& spec, const Vector& z);
/// (1/n) sum f_i(z_i) + mu_p ||x - x0||^2.
double smooth_value(const ProblemSpec& spec, const Vector& z, const Vector& x);
/// (1/n) A^T g + 2 mu_p (x - x0).
Vector gradient_from_derivatives(const ProblemSpec& spec, const Vector& g, const Vector& x);
double regularizer_value(const ProblemSpec& spec, const Vector& x);

/// Operator norm of A_{G_j} from l2 onto the dual-norm ball of block j:
/// max column norm for L1, spectral norm (power iteration) for GroupL2.
double column_bound(const ProblemSpec& spec, Index block);

/// The sub-problem over the listed blocks (sorted ids): columns compacted,
/// partition renumbered, anchor restricted. Local block k is blocks[k].
ProblemSpec restrict_problem(const ProblemSpec& spec, std::span<const Index> blocks);

/// Sorted union of the groups of `blocks`.
std::vector<Index> features_of(const BlockPartition& partition, std::span<const Index> blocks);

}  // namespace adsgd
