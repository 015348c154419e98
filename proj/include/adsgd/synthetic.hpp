#pragma once

#include <cstdint>
#include <memory>

#include "adsgd/dataset.hpp"
#include "adsgd/loss.hpp"

namespace adsgd {

struct SyntheticParams {
  Index n = 100;
  Index d = 200;
  double density = 1.0;  ///< probability that an entry of A is nonzero
  double noise = 0.1;    ///< std of the additive response noise (lasso)
  Index support = 10;    ///< planted nonzeros in x_planted
  std::uint64_t seed = 0;
  LossKind model = LossKind::SquaredError;
  /// Dense design with A^T A / n = I (requires n >= d); density is ignored.
  bool orthonormal = false;
};

struct SyntheticInstance {
  std::shared_ptr<const Dataset> data;
  Vector planted;
};

/**
 * Seeded sparse Gaussian design with a planted sparse coefficient vector.
 * Lasso responses are A x + noise; logistic labels are Bernoulli draws with
 * success probability sigmoid(a_i^T x). Same params give identical output.
 */
SyntheticInstance generate_synthetic(const SyntheticParams& params);

}  // namespace adsgd
