#pragma once

#include <span>

#include "adsgd/detail/kernels.hpp"
#include "adsgd/problem.hpp"

namespace adsgd::detail {

/**
 * out = (1/|I|) sum_{i in I} (f_i'(z_i) - f_i'(zt_i)) a_{i,G_j}
 *       + 2 mu_p (x_G - xt_G) + mut_G
 *
 * `pred(i)` yields z_i = a_i^T x; zt holds a_i^T x_tilde. `out` has |G_j|
 * slots and is overwritten.
 */
template <class Pred>
void vr_block_gradient(const ProblemSpec& spec, const Vector& x, const Vector& xt, const Vector& zt,
                       const Vector& mut, std::span<const Index> batch, Index block, Pred&& pred,
                       std::span<double> out) {
  const RowMatrix& A = spec.data().rows();
  const Vector& y = spec.data().y();
  const Loss& loss = spec.loss();
  const auto group = spec.partition().group(block);
  std::fill(out.begin(), out.end(), 0.0);
  for (Index i : batch) {
    const double delta = loss.derivative(pred(i), y[i]) - loss.derivative(zt[i], y[i]);
    if (delta == 0.0) continue;
    for_each_in_block(A, i, spec.partition(), block, [&](Index slot, double a) { out[slot] += delta * a; });
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double two_mu = 2.0 * spec.mu_p();
  for (std::size_t s = 0; s < group.size(); ++s) {
    const Index c = group[s];
    out[s] = out[s] * inv_b + mut[c];
    if (two_mu > 0.0) out[s] += two_mu * (x[c] - xt[c]);
  }
}

}  // namespace adsgd::detail
