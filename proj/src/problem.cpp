#include "adsgd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adsgd/detail/kernels.hpp"
#include "adsgd/errors.hpp"

namespace adsgd {

namespace {

void check_length(const ProblemSpec& spec, const Vector& x, const char* what) {
  if (x.size() != spec.d())
    throw InvalidArgument(std::string(what) + ": expected a vector of length " +
                          std::to_string(spec.d()) + ", got " + std::to_string(x.size()));
}

}  // namespace

ProblemSpec::ProblemSpec(std::shared_ptr<const Dataset> data, BlockPartition partition,
                         Loss loss, Regularizer reg, double lambda, double mu_p,
                         std::optional<Vector> anchor)
    : data_(std::move(data)),
      partition_(std::move(partition)),
      loss_(loss),
      reg_(reg),
      lambda_(lambda),
      mu_p_(mu_p) {
  if (!data_) throw InvalidArgument("problem: null dataset");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
    throw InvalidArgument("problem: lambda must be positive and finite");
  if (!(mu_p_ >= 0.0) || !std::isfinite(mu_p_))
    throw InvalidArgument("problem: mu_p must be nonnegative");
  if (partition_.dim() != data_->d())
    throw InvalidArgument("problem: partition covers " + std::to_string(partition_.dim()) +
                          " coordinates but the data has " + std::to_string(data_->d()));
  anchor_ = anchor ? std::move(*anchor) : Vector::Zero(data_->d());
  if (anchor_.size() != data_->d()) throw InvalidArgument("problem: anchor length mismatch");
  if (loss_.kind() == LossKind::Logistic) {
    const Vector& y = data_->y();
    for (Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw InvalidArgument("problem: logistic labels must be 0 or 1 (sample " +
                              std::to_string(i) + ")");
  }
}

ProblemSpec ProblemSpec::with_lambda(double lambda) const {
  return ProblemSpec(data_, partition_, loss_, reg_, lambda, mu_p_, anchor_);
}

Vector predictions(const ProblemSpec& spec, const Vector& x) {
  check_length(spec, x, "predictions");
  const RowMatrix& A = spec.data().rows();
  Vector z(spec.n());
  for (Index i = 0; i < spec.n(); ++i) z[i] = detail::row_dot(A, i, x);
  return z;
}

Vector sample_derivatives(const ProblemSpec& spec, const Vector& z) {
  const Vector& y = spec.data().y();
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) g[i] = spec.loss().derivative(z[i], y[i]);
  return g;
}

double smooth_value(const ProblemSpec& spec, const Vector& z, const Vector& x) {
  const Vector& y = spec.data().y();
  double acc = 0.0;
  for (Index i = 0; i < z.size(); ++i) acc += spec.loss().value(z[i], y[i]);
  double value = acc / static_cast<double>(spec.n());
  if (spec.mu_p() > 0.0) value += spec.mu_p() * (x - spec.anchor()).squaredNorm();
  return value;
}

Vector gradient_from_derivatives(const ProblemSpec& spec, const Vector& g, const Vector& x) {
  Vector grad = spec.data().cols().transpose() * g;
  grad /= static_cast<double>(spec.n());
  if (spec.mu_p() > 0.0) grad += 2.0 * spec.mu_p() * (x - spec.anchor());
  return grad;
}

double regularizer_value(const ProblemSpec& spec, const Vector& x) {
  const BlockPartition& p = spec.partition();
  double acc = 0.0;
  std::vector<double> buf;
  for (Index j = 0; j < p.size(); ++j) {
    const auto g = p.group(j);
    buf.resize(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) buf[s] = x[g[s]];
    acc += spec.reg().block_value(buf);
  }
  return acc;
}

double primal_objective(const ProblemSpec& spec, const Vector& x) {
  check_length(spec, x, "primal_objective");
  const Vector z = predictions(spec, x);
  return smooth_value(spec, z, x) + spec.lambda() * regularizer_value(spec, x);
}

Vector full_gradient(const ProblemSpec& spec, const Vector& x) {
  check_length(spec, x, "full_gradient");
  return gradient_from_derivatives(spec, sample_derivatives(spec, predictions(spec, x)), x);
}

Vector partial_gradient(const ProblemSpec& spec, const Vector& x, std::span<const Index> batch,
                        Index block) {
  check_length(spec, x, "partial_gradient");
  if (batch.empty()) throw InvalidArgument("partial_gradient: empty batch");
  if (block < 0 || block >= spec.blocks())
    throw InvalidArgument("partial_gradient: block id out of range");
  const RowMatrix& A = spec.data().rows();
  const Vector& y = spec.data().y();
  const auto group = spec.partition().group(block);
  Vector out = Vector::Zero(static_cast<Index>(group.size()));
  for (Index i : batch) {
    if (i < 0 || i >= spec.n()) throw InvalidArgument("partial_gradient: sample index out of range");
    const double deriv = spec.loss().derivative(detail::row_dot(A, i, x), y[i]);
    detail::for_each_in_block(A, i, spec.partition(), block,
                              [&](Index slot, double a) { out[slot] += deriv * a; });
  }
  out /= static_cast<double>(batch.size());
  if (spec.mu_p() > 0.0)
    for (std::size_t s = 0; s < group.size(); ++s)
      out[static_cast<Index>(s)] += 2.0 * spec.mu_p() * (x[group[s]] - spec.anchor()[group[s]]);
  return out;
}

LipschitzConstants lipschitz_constants(const ProblemSpec& spec) {
  if (spec.n() == 0 || spec.d() == 0) throw DegenerateProblem("lipschitz_constants: empty dataset");
  const RowMatrix& A = spec.data().rows();
  const BlockPartition& p = spec.partition();
  const double c = spec.loss().curvature();
  LipschitzConstants out;
  out.per_block_L.assign(static_cast<std::size_t>(p.size()), 0.0);
  std::vector<double> block_sq(static_cast<std::size_t>(p.size()), 0.0);
  double max_row = 0.0;
  for (Index i = 0; i < spec.n(); ++i) {
    std::fill(block_sq.begin(), block_sq.end(), 0.0);
    double row_sq = 0.0;
    for (RowMatrix::InnerIterator it(A, i); it; ++it) {
      const double v2 = it.value() * it.value();
      row_sq += v2;
      block_sq[static_cast<std::size_t>(p.block_of(it.col()))] += v2;
    }
    max_row = std::max(max_row, row_sq);
    for (std::size_t j = 0; j < block_sq.size(); ++j)
      out.per_block_L[j] = std::max(out.per_block_L[j], block_sq[j]);
  }
  if (max_row == 0.0) throw DegenerateProblem("lipschitz_constants: design matrix is all zero");
  double max_block = 0.0;
  for (double& Lj : out.per_block_L) {
    max_block = std::max(max_block, Lj);
    Lj = c * Lj + 2.0 * spec.mu_p();
  }
  out.L = c * max_block + 2.0 * spec.mu_p();
  out.T = c * max_row + 2.0 * spec.mu_p();
  return out;
}

double lambda_max(const ProblemSpec& spec) {
  if (spec.n() == 0 || spec.d() == 0) throw DegenerateProblem("lambda_max: empty dataset");
  // x = 0 is optimal iff Omega_j^D(grad_{G_j} F(0)) <= lambda for every block.
  const Vector zero = Vector::Zero(spec.d());
  const Vector grad = full_gradient(spec, zero);
  const BlockPartition& p = spec.partition();
  double best = 0.0;
  std::vector<double> buf;
  for (Index j = 0; j < p.size(); ++j) {
    const auto g = p.group(j);
    buf.resize(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) buf[s] = grad[g[s]];
    best = std::max(best, spec.reg().block_dual_norm(buf));
  }
  return best;
}

double column_bound(const ProblemSpec& spec, Index block) {
  const ColMatrix& A = spec.data().cols();
  const auto group = spec.partition().group(block);
  if (spec.reg().kind() == RegularizerKind::L1 || group.size() == 1) {
    double best = 0.0;
    for (Index c : group) best = std::max(best, A.col(c).norm());
    return best;
  }
  // Power iteration on A_G^T A_G: 20 sweeps, relative tolerance 1e-6.
  const Index m = static_cast<Index>(group.size());
  Vector v = Vector::Ones(m) / std::sqrt(static_cast<double>(m));
  Vector u(spec.n());
  double sigma2 = 0.0;
  for (int iter = 0; iter < 20; ++iter) {
    u.setZero();
    for (Index s = 0; s < m; ++s) u += v[s] * A.col(group[static_cast<std::size_t>(s)]);
    Vector w(m);
    for (Index s = 0; s < m; ++s) w[s] = A.col(group[static_cast<std::size_t>(s)]).dot(u);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = std::abs(next - sigma2) <= 1e-6 * next;
    sigma2 = next;
    if (done) break;
  }
  return std::sqrt(sigma2);
}

std::vector<Index> features_of(const BlockPartition& partition, std::span<const Index> blocks) {
  std::vector<Index> out;
  for (Index j : blocks) {
    const auto g = partition.group(j);
    out.insert(out.end(), g.begin(), g.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ProblemSpec restrict_problem(const ProblemSpec& spec, std::span<const Index> blocks) {
  const BlockPartition& p = spec.partition();
  const std::vector<Index> features = features_of(p, blocks);
  if (features.empty()) throw InvalidArgument("restrict_problem: no blocks selected");
  std::vector<Index> local(static_cast<std::size_t>(spec.d()), -1);
  for (std::size_t k = 0; k < features.size(); ++k)
    local[static_cast<std::size_t>(features[k])] = static_cast<Index>(k);
  std::vector<std::vector<Index>> groups;
  groups.reserve(blocks.size());
  for (Index j : blocks) {
    std::vector<Index> g;
    for (Index c : p.group(j)) g.push_back(local[static_cast<std::size_t>(c)]);
    groups.push_back(std::move(g));
  }
  Vector anchor(static_cast<Index>(features.size()));
  for (std::size_t k = 0; k < features.size(); ++k) anchor[static_cast<Index>(k)] = spec.anchor()[features[k]];
  auto data = std::make_shared<const Dataset>(spec.data().select_columns(features));
  return ProblemSpec(std::move(data),
                     BlockPartition(std::move(groups), static_cast<Index>(features.size())),
                     spec.loss(), spec.reg(), spec.lambda(), spec.mu_p(), std::move(anchor));
}

}  // namespace adsgd
