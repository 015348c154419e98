#pragma once

// Independent reference computations for the unit and acceptance tests.
// Everything here works on dense matrices and closed-form formulas so the
// library's sparse kernels are checked against separate code paths.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "adsgd/problem.hpp"

namespace testing_support {

using adsgd::Index;
using adsgd::Vector;

struct DenseInstance {
  Eigen::MatrixXd A;
  Vector y;
  std::shared_ptr<const adsgd::Dataset> data;
};

inline std::shared_ptr<const adsgd::Dataset> to_dataset(const Eigen::MatrixXd& A, const Vector& y) {
  std::vector<adsgd::Entry> entries;
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) entries.push_back({i, j, A(i, j)});
  return std::make_shared<const adsgd::Dataset>(A.rows(), A.cols(), std::move(entries), y);
}

/// Gaussian design with Bernoulli(density) sparsity; labels in {0,1} for
/// logistic, a noisy sparse linear response otherwise.
inline DenseInstance random_instance(Index n, Index d, std::uint64_t seed, adsgd::LossKind model,
                                     double density = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      if (unit(gen) < density) A(i, j) = normal(gen);
  Vector w = Vector::Zero(d);
  for (Index j = 0; j < std::min<Index>(d, 5); ++j) w[(j * 7) % d] = normal(gen);
  const Vector z = A * w;
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    if (model == adsgd::LossKind::SquaredError) y[i] = z[i] + 0.1 * normal(gen);
    else y[i] = unit(gen) < 1.0 / (1.0 + std::exp(-z[i])) ? 1.0 : 0.0;
  }
  return {A, y, to_dataset(A, y)};
}

inline double loss_value(adsgd::LossKind kind, double z, double y) {
  if (kind == adsgd::LossKind::SquaredError) return 0.5 * (y - z) * (y - z);
  return -y * z + std::log1p(std::exp(z));
}

inline double loss_derivative(adsgd::LossKind kind, double z, double y) {
  if (kind == adsgd::LossKind::SquaredError) return z - y;
  return 1.0 / (1.0 + std::exp(-z)) - y;
}

inline double norm_value(adsgd::RegularizerKind kind, const Vector& v) {
  return kind == adsgd::RegularizerKind::L1 ? v.lpNorm<1>() : v.norm();
}

inline double dual_norm_value(adsgd::RegularizerKind kind, const Vector& v) {
  return kind == adsgd::RegularizerKind::L1 ? v.lpNorm<Eigen::Infinity>() : v.norm();
}

inline Vector gather(const Vector& x, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = x[idx[k]];
  return out;
}

/// (1/n) sum f(a_i^T x) + mu ||x - x0||^2 from a dense matrix.
inline double smooth_dense(const Eigen::MatrixXd& A, const Vector& y, adsgd::LossKind kind, double mu,
                           const Vector& x0, const Vector& x) {
  const Vector z = A * x;
  double s = 0.0;
  for (Index i = 0; i < A.rows(); ++i) s += loss_value(kind, z[i], y[i]);
  return s / static_cast<double>(A.rows()) + mu * (x - x0).squaredNorm();
}

inline double primal_dense(const Eigen::MatrixXd& A, const Vector& y, const adsgd::ProblemSpec& spec,
                           const Vector& x) {
  double reg = 0.0;
  for (Index j = 0; j < spec.blocks(); ++j)
    reg += norm_value(spec.reg().kind(), gather(x, spec.partition().group(j)));
  return smooth_dense(A, y, spec.loss().kind(), spec.mu_p(), spec.anchor(), x) + spec.lambda() * reg;
}

/// Central differences of the smooth part, step h scaled to |x_k|.
inline Vector finite_difference_gradient(const Eigen::MatrixXd& A, const Vector& y, adsgd::LossKind kind,
                                         double mu, const Vector& x0, const Vector& x) {
  Vector g(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (smooth_dense(A, y, kind, mu, x0, xp) - smooth_dense(A, y, kind, mu, x0, xm)) / (2.0 * h);
  }
  return g;
}

/// Closed-form Lasso solution for a design with A^T A / n = I and L1 singletons.
inline Vector orthonormal_lasso_solution(const Eigen::MatrixXd& A, const Vector& y, double lambda) {
  const Vector c = A.transpose() * y / static_cast<double>(A.rows());
  Vector x(c.size());
  for (Index k = 0; k < c.size(); ++k) x[k] = std::copysign(std::max(std::abs(c[k]) - lambda, 0.0), c[k]);
  return x;
}

}  // namespace testing_support
