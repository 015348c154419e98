#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adsgd/errors.hpp"
#include "adsgd/solver.hpp"

namespace adsgd {

namespace {

struct Evaluation {
  Vector z;
  Vector g;
  double smooth = 0.0;
};

Evaluation evaluate(const ProblemSpec& spec, const Vector& x) {
  Evaluation e;
  e.z = predictions(spec, x);
  e.g = sample_derivatives(spec, e.z);
  e.smooth = smooth_value(spec, e.z, x);
  return e;
}

void prox_all(const ProblemSpec& spec, Vector& x, double threshold) {
  const BlockPartition& part = spec.partition();
  std::vector<double> buf;
  for (Index j = 0; j < part.size(); ++j) {
    const auto group = part.group(j);
    buf.resize(group.size());
    for (std::size_t s = 0; s < group.size(); ++s) buf[s] = x[group[s]];
    spec.reg().block_prox(buf, threshold);
    for (std::size_t s = 0; s < group.size(); ++s) x[group[s]] = buf[s];
  }
}

double gap_at(const ProblemSpec& spec, const ActiveSet& all, const Vector& x, const Evaluation& e,
              DualPoint* theta_out = nullptr) {
  DualPoint theta = dual_point(spec, e.g, all);
  const double dual = dual_objective(spec, theta, all);
  const double primal = e.smooth + spec.lambda() * regularizer_value(spec, x);
  if (theta_out) *theta_out = std::move(theta);
  return std::isfinite(dual) ? primal - dual : std::numeric_limits<double>::infinity();
}

// Newton iterations on the smooth problem restricted to the support with the
// sign pattern frozen. Returns nullopt-equivalent (empty vector) on failure.
Vector polish_l1(const ProblemSpec& spec, const Vector& x) {
  std::vector<Index> support;
  for (Index c = 0; c < x.size(); ++c)
    if (x[c] != 0.0) support.push_back(c);
  const Index s = static_cast<Index>(support.size());
  if (s == 0 || s > spec.n()) return {};
  const ColMatrix& cols = spec.data().cols();
  Eigen::MatrixXd As(spec.n(), s);
  for (Index k = 0; k < s; ++k) As.col(k) = cols.col(support[static_cast<std::size_t>(k)]);
  Vector signs(s), xs(s), x0(s);
  for (Index k = 0; k < s; ++k) {
    const Index c = support[static_cast<std::size_t>(k)];
    signs[k] = x[c] > 0.0 ? 1.0 : -1.0;
    xs[k] = x[c];
    x0[k] = spec.anchor()[c];
  }
  const Vector& y = spec.data().y();
  const double inv_n = 1.0 / static_cast<double>(spec.n());
  const double two_mu = 2.0 * spec.mu_p();
  const int newton_steps = spec.loss().kind() == LossKind::SquaredError ? 2 : 30;
  for (int it = 0; it < newton_steps; ++it) {
    const Vector z = As * xs;
    Vector g(spec.n()), w(spec.n());
    for (Index i = 0; i < spec.n(); ++i) {
      g[i] = spec.loss().derivative(z[i], y[i]);
      w[i] = spec.loss().second_derivative(z[i], y[i]);
    }
    Vector grad = inv_n * (As.transpose() * g) + spec.lambda() * signs;
    if (two_mu > 0.0) grad += two_mu * (xs - x0);
    Eigen::MatrixXd H = inv_n * (As.transpose() * w.asDiagonal() * As);
    if (two_mu > 0.0) H.diagonal().array() += two_mu;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return {};
    const Vector step = ldlt.solve(grad);
    if (!step.allFinite()) return {};
    xs -= step;
    if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, xs.lpNorm<Eigen::Infinity>())) break;
  }
  for (Index k = 0; k < s; ++k)
    if (xs[k] * signs[k] <= 0.0) return {};
  Vector out = Vector::Zero(x.size());
  for (Index k = 0; k < s; ++k) out[support[static_cast<std::size_t>(k)]] = xs[k];
  return out;
}

// Largest eigenvalue of (c/n) A^T A + 2 mu_p by power iteration; a starting
// guess for backtracking, which corrects any underestimate.
double smooth_lipschitz_estimate(const ProblemSpec& spec) {
  const ColMatrix& A = spec.data().cols();
  Vector v = Vector::Ones(spec.d()).normalized();
  double est = 0.0;
  for (int it = 0; it < 30; ++it) {
    const Vector u = A * v;
    Vector w = A.transpose() * u;
    const double norm = w.norm();
    if (norm == 0.0) break;
    est = norm;
    v = w / norm;
  }
  return spec.loss().curvature() * est / static_cast<double>(spec.n()) + 2.0 * spec.mu_p();
}

}  // namespace

ReferenceResult reference_solve(const ProblemSpec& spec, double tol, Index max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("reference_solve: tol must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  std::vector<Index> all(static_cast<std::size_t>(spec.blocks()));
  std::iota(all.begin(), all.end(), Index{0});
  const ActiveSet everything(spec.partition(), all, std::vector<double>(all.size(), 0.0));

  ReferenceResult out;
  Vector x = spec.anchor();
  Evaluation ex = evaluate(spec, x);
  double objective = ex.smooth + spec.lambda() * regularizer_value(spec, x);
  double gap = gap_at(spec, everything, x, ex);
  double best_gap = gap;
  Vector yk = x;
  double t = 1.0;
  double L = std::max(smooth_lipschitz_estimate(spec), 1e-12);
  Index iter = 0;
  out.report.trace.push_back({0, elapsed(), objective, gap, spec.blocks(), spec.d()});
  while (gap > tol) {
    if (iter >= max_iter)
      throw ConvergenceFailure("reference_solve: iteration cap reached with gap " + std::to_string(best_gap),
                               best_gap);
    ++iter;
    const Evaluation ey = evaluate(spec, yk);
    const Vector grad = gradient_from_derivatives(spec, ey.g, yk);
    Vector xn;
    Evaluation en;
    for (;;) {
      xn = yk - grad / L;
      prox_all(spec, xn, spec.lambda() / L);
      en = evaluate(spec, xn);
      const Vector diff = xn - yk;
      const double model = ey.smooth + grad.dot(diff) + 0.5 * L * diff.squaredNorm();
      if (en.smooth <= model + 1e-14 * std::abs(model)) break;
      L *= 2.0;
      if (!std::isfinite(L)) throw Diverged("reference_solve: step size collapsed", static_cast<long>(iter));
    }
    const double obj_new = en.smooth + spec.lambda() * regularizer_value(spec, xn);
    if (!std::isfinite(obj_new)) throw Diverged("reference_solve: non-finite objective", static_cast<long>(iter));
    if (obj_new > objective && t > 1.0) {
      // Function-value restart: drop momentum and retry from x.
      t = 1.0;
      yk = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = xn + ((t - 1.0) / t_next) * (xn - x);
    t = t_next;
    x = std::move(xn);
    ex = std::move(en);
    objective = obj_new;
    gap = gap_at(spec, everything, x, ex);
    best_gap = std::min(best_gap, gap);
    out.report.trace.push_back({iter, elapsed(), objective, gap, spec.blocks(), spec.d()});
  }

  if (spec.reg().kind() == RegularizerKind::L1) {
    const Vector polished = polish_l1(spec, x);
    if (polished.size() == x.size()) {
      const Evaluation ep = evaluate(spec, polished);
      const double gp = gap_at(spec, everything, polished, ep);
      if (gp <= gap) {
        x = polished;
        ex = ep;
        gap = gp;
        objective = ep.smooth + spec.lambda() * regularizer_value(spec, x);
        out.report.trace.push_back({iter + 1, elapsed(), objective, gap, spec.blocks(), spec.d()});
      }
    }
  }

  gap_at(spec, everything, x, ex, &out.theta);
  out.x = x;
  out.gap = gap;
  out.objective = objective;
  for (Index c = 0; c < x.size(); ++c)
    if (x[c] != 0.0) out.support.push_back(c);
  for (Index j = 0; j < spec.blocks(); ++j)
    for (Index c : spec.partition().group(j))
      if (x[c] != 0.0) {
        out.support_blocks.push_back(j);
        break;
      }
  out.report.x_final = x;
  out.report.converged = true;
  out.report.outer_iters = iter;
  out.report.wall_time = elapsed();
  return out;
}

}  // namespace adsgd
