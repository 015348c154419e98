#include "adsgd/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adsgd/errors.hpp"

namespace adsgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void gather(const Vector& v, std::span<const Index> idx, std::vector<double>& out) {
  out.resize(idx.size());
  for (std::size_t s = 0; s < idx.size(); ++s) out[s] = v[idx[s]];
}

// h_j^*(v) for h_j(u) = mu ||u - x0||^2 + lambda Omega_j(u), mu > 0.
double perturbed_block_conjugate(const Regularizer& reg, double lambda, double mu,
                                 std::span<const double> v, std::span<const double> x0) {
  const std::size_t m = v.size();
  std::vector<double> w(m), u(m);
  for (std::size_t s = 0; s < m; ++s) {
    w[s] = v[s] + 2.0 * mu * x0[s];
    u[s] = w[s] / (2.0 * mu);
  }
  reg.block_prox(u, lambda / (2.0 * mu));
  double value = -lambda * reg.block_value(u);
  for (std::size_t s = 0; s < m; ++s) {
    const double diff = u[s] - x0[s];
    value += v[s] * u[s] - mu * diff * diff;
  }
  return value;
}

}  // namespace

ActiveSet ActiveSet::full(const ProblemSpec& spec) {
  std::vector<Index> blocks(static_cast<std::size_t>(spec.blocks()));
  std::vector<double> bounds(blocks.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    blocks[j] = static_cast<Index>(j);
    bounds[j] = column_bound(spec, static_cast<Index>(j));
  }
  return ActiveSet(spec.partition(), std::move(blocks), std::move(bounds));
}

ActiveSet::ActiveSet(const BlockPartition& partition, std::vector<Index> blocks,
                     std::vector<double> column_bounds)
    : blocks_(std::move(blocks)), column_bounds_(std::move(column_bounds)) {
  if (blocks_.size() != column_bounds_.size())
    throw InvalidArgument("active set: bounds do not match blocks");
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    if (blocks_[k] < 0 || blocks_[k] >= partition.size() || (k > 0 && blocks_[k - 1] >= blocks_[k]))
      throw InvalidArgument("active set: block ids must be sorted, unique and in range");
  features_ = features_of(partition, blocks_);
}

bool ActiveSet::contains(Index block) const {
  return std::binary_search(blocks_.begin(), blocks_.end(), block);
}

ActiveSet ActiveSet::keep(const BlockPartition& partition, const std::vector<bool>& keep) const {
  std::vector<Index> blocks;
  std::vector<double> bounds;
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    if (keep[k]) {
      blocks.push_back(blocks_[k]);
      bounds.push_back(column_bounds_[k]);
    }
  return ActiveSet(partition, std::move(blocks), std::move(bounds));
}

std::vector<double> block_scores(const ProblemSpec& spec, const Vector& theta,
                                 const ActiveSet& active) {
  const ColMatrix& A = spec.data().cols();
  const double inv_n = 1.0 / static_cast<double>(spec.n());
  const double shift = 2.0 * spec.mu_p();
  std::vector<double> scores;
  scores.reserve(active.blocks().size());
  std::vector<double> buf;
  for (Index j : active.blocks()) {
    const auto group = spec.partition().group(j);
    buf.resize(group.size());
    for (std::size_t s = 0; s < group.size(); ++s) {
      buf[s] = A.col(group[s]).dot(theta) * inv_n;
      if (shift > 0.0) buf[s] += shift * spec.anchor()[group[s]];
    }
    scores.push_back(spec.reg().block_dual_norm(buf));
  }
  return scores;
}

DualPoint dual_point(const ProblemSpec& spec, const Vector& sample_derivs, const ActiveSet& active) {
  if (sample_derivs.size() != spec.n())
    throw InvalidArgument("dual_point: expected per-sample derivatives of length n");
  DualPoint out;
  out.theta = -sample_derivs;
  // With the quadratic perturbation the dual objective is finite everywhere
  // (the conjugate of mu ||u - x0||^2 + lambda Omega_j is smooth), so the
  // unscaled point is feasible and converges to the optimal dual.
  if (active.empty() || spec.mu_p() > 0.0) return out;
  const ColMatrix& A = spec.data().cols();
  const double inv_n = 1.0 / static_cast<double>(spec.n());
  double worst = 0.0;
  std::vector<double> buf;
  for (Index j : active.blocks()) {
    const auto group = spec.partition().group(j);
    buf.resize(group.size());
    for (std::size_t s = 0; s < group.size(); ++s) buf[s] = A.col(group[s]).dot(sample_derivs) * inv_n;
    worst = std::max(worst, spec.reg().block_dual_norm(buf));
  }
  out.scale_used = std::max(1.0, worst / spec.lambda());
  if (out.scale_used > 1.0) out.theta /= out.scale_used;
  return out;
}

double dual_objective(const ProblemSpec& spec, const DualPoint& dual, const ActiveSet& active) {
  if (dual.theta.size() != spec.n()) throw InvalidArgument("dual_objective: theta must have length n");
  const Vector& y = spec.data().y();
  double acc = 0.0;
  for (Index i = 0; i < spec.n(); ++i) {
    const double c = spec.loss().conjugate(-dual.theta[i], y[i]);
    if (!std::isfinite(c)) return -kInf;
    acc += c;
  }
  double value = -acc / static_cast<double>(spec.n());
  if (spec.mu_p() > 0.0) {
    // The quadratic perturbation joins the regularizer, lifting the
    // feasibility constraint: D gains -sum_j h_j^*((1/n) A_j^T theta).
    const ColMatrix& A = spec.data().cols();
    const double inv_n = 1.0 / static_cast<double>(spec.n());
    std::vector<double> v, x0;
    for (Index j : active.blocks()) {
      const auto group = spec.partition().group(j);
      v.resize(group.size());
      for (std::size_t s = 0; s < group.size(); ++s) v[s] = A.col(group[s]).dot(dual.theta) * inv_n;
      gather(spec.anchor(), group, x0);
      value -= perturbed_block_conjugate(spec.reg(), spec.lambda(), spec.mu_p(), v, x0);
    }
  }
  return value;
}

double duality_gap(const ProblemSpec& spec, const Vector& x, const DualPoint& dual,
                   const ActiveSet& active) {
  if (x.size() != spec.d()) throw InvalidArgument("duality_gap: x has the wrong length");
  double primal;
  if (active.feature_count() == spec.d()) {
    primal = primal_objective(spec, x);
  } else {
    Vector restricted = Vector::Zero(spec.d());
    for (Index f : active.features()) restricted[f] = x[f];
    primal = primal_objective(spec, restricted);
    // The sub-problem carries no anchor term for screened coordinates.
    if (spec.mu_p() > 0.0) {
      double screened = spec.anchor().squaredNorm();
      for (Index f : active.features()) screened -= spec.anchor()[f] * spec.anchor()[f];
      primal -= spec.mu_p() * screened;
    }
  }
  const double dual_value = dual_objective(spec, dual, active);
  if (!std::isfinite(dual_value)) return kInf;
  return primal - dual_value;
}

double safe_radius(double gap, double lipschitz) {
  if (!(lipschitz > 0.0)) throw InvalidArgument("safe_radius: Lipschitz constant must be positive");
  if (std::isnan(gap)) return kInf;
  return std::sqrt(2.0 * lipschitz * std::max(gap, 0.0));
}

ActiveSet screen(const ProblemSpec& spec, const DualPoint& dual, double r, const ActiveSet& active) {
  if (!(r >= 0.0)) throw InvalidArgument("screen: radius must be nonnegative");
  if (std::isinf(r) || active.empty()) return active;
  const std::vector<double> scores = block_scores(spec, dual.theta, active);
  const double inv_n = 1.0 / static_cast<double>(spec.n());
  std::vector<bool> keep(scores.size(), true);
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (scores[k] + inv_n * active.column_bounds()[k] * r < spec.lambda()) keep[k] = false;
  return active.keep(spec.partition(), keep);
}

std::vector<Index> equicorrelation_set(const ProblemSpec& spec, const DualPoint& theta_star, double tol) {
  std::vector<Index> all(static_cast<std::size_t>(spec.blocks()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<Index>(j);
  const ActiveSet everything(spec.partition(), all, std::vector<double>(all.size(), 0.0));
  const std::vector<double> scores = block_scores(spec, theta_star.theta, everything);
  std::vector<Index> out;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (std::abs(scores[j] - spec.lambda()) <= tol) out.push_back(static_cast<Index>(j));
  return out;
}

}  // namespace adsgd
