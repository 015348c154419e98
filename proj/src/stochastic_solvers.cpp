#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "adsgd/detail/kernels.hpp"
#include "adsgd/detail/vr.hpp"
#include "adsgd/errors.hpp"
#include "adsgd/solver.hpp"

namespace adsgd {

namespace {

enum class InnerStep {
  BlockVarianceReduced,  // ADSGD, MRBCD
  FullStochastic,        // ASGD
  FullVarianceReduced,   // ProxSVRG
};

struct Variant {
  InnerStep step;
  bool screening;
  bool shrink_budget;  // m_k = m q_k / q
};

using Clock = std::chrono::steady_clock;

// Running sum of piecewise-constant iterates; O(1) per coordinate change.
class LazyAverage {
 public:
  explicit LazyAverage(const Vector& x0) : sum_(Vector::Zero(x0.size())), since_(static_cast<std::size_t>(x0.size()), 1) {}

  // x[c] is about to take its step-t value.
  void before_change(Index c, double old_value, Index t) {
    auto& s = since_[static_cast<std::size_t>(c)];
    sum_[c] += old_value * static_cast<double>(t - s);
    s = t;
  }

  Vector mean(const Vector& x, Index steps) {
    for (Index c = 0; c < x.size(); ++c) {
      before_change(c, x[c], steps + 1);
    }
    return sum_ / static_cast<double>(steps);
  }

 private:
  Vector sum_;
  std::vector<Index> since_;
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}

  Index uniform(Index bound) {
    std::uniform_int_distribution<Index> dist(0, bound - 1);
    return dist(gen_);
  }

  // Uniform with replacement, or every sample in order when size == n.
  void batch(Index n, Index size, std::vector<Index>& out) {
    out.resize(static_cast<std::size_t>(size));
    if (size == n) {
      std::iota(out.begin(), out.end(), Index{0});
      return;
    }
    for (auto& i : out) i = uniform(n);
  }

 private:
  std::mt19937_64 gen_;
};

class Engine {
 public:
  Engine(const ProblemSpec& spec, const SolverConfig& config, Variant variant)
      : spec_(spec), config_(config), variant_(variant), rng_(config.seed) {
    resolve_hyperparameters();
  }

  SolveReport run();

 private:
  void resolve_hyperparameters();
  const ProblemSpec& work() const { return restricted_ ? *restricted_ : spec_; }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  // Applies a screening pass; returns false once every block is gone.
  bool apply_screen(Index k, const DualPoint& theta, double gap);
  Vector inner_loop(Index steps);
  Vector block_inner(Index steps);
  Vector full_inner(Index steps);

  const ProblemSpec& spec_;
  SolverConfig config_;
  Variant variant_;
  Sampler rng_;
  LipschitzConstants lip_;
  double eta_ = 0.0;
  Index m_ = 0;
  Index batch_ = 0;
  double radius_constant_ = 0.0;

  std::optional<ProblemSpec> restricted_;
  ActiveSet global_active_{BlockPartition::singletons(1), {}, {}};
  ActiveSet local_active_{BlockPartition::singletons(1), {}, {}};

  // Snapshot state, all in the current sub-problem's coordinates.
  Vector xt_, zt_, gt_, mut_;

  Clock::time_point start_;
  SolveReport report_;
};

void Engine::resolve_hyperparameters() {
  const Index n = spec_.n();
  if (config_.max_outer < 0) throw InvalidArgument("solver: max_outer must be nonnegative");
  if (!(config_.gap_tol > 0.0)) throw InvalidArgument("solver: gap_tol must be positive");
  if (config_.eta < 0.0 || !std::isfinite(config_.eta)) throw InvalidArgument("solver: eta must be nonnegative");
  if (config_.inner_m < 0) throw InvalidArgument("solver: inner_m must be nonnegative");
  if (config_.screen_every < 1) throw InvalidArgument("solver: screen_every must be >= 1");
  lip_ = lipschitz_constants(spec_);
  const bool block_step = variant_.step == InnerStep::BlockVarianceReduced;
  const double step_lipschitz = block_step ? lip_.L : lip_.T;
  if (config_.theory_mode) {
    batch_ = std::min<Index>(n, static_cast<Index>(std::ceil(lip_.T / lip_.L - 1e-12)));
    eta_ = 1.0 / (16.0 * step_lipschitz);
    if (config_.inner_m > 0) {
      m_ = config_.inner_m;
    } else if (config_.strong_convexity > 0.0) {
      m_ = static_cast<Index>(std::ceil(65.0 * static_cast<double>(spec_.blocks()) * lip_.L /
                                        config_.strong_convexity));
    } else {
      m_ = 2 * n;
    }
  } else {
    if (config_.batch_size < 1 || config_.batch_size > n)
      throw InvalidArgument("solver: batch_size must lie in [1, n] (got " +
                            std::to_string(config_.batch_size) + ")");
    batch_ = config_.batch_size;
    eta_ = config_.eta > 0.0 ? config_.eta : 1.0 / (16.0 * step_lipschitz);
    m_ = config_.inner_m > 0 ? config_.inner_m : 2 * n;
  }
  radius_constant_ = lip_.T;
  if (config_.radius_rule == RadiusRule::DualCurvature)
    radius_constant_ = std::max(lip_.T, static_cast<double>(n) * spec_.loss().curvature());
}

SolveReport Engine::run() {
  start_ = Clock::now();
  report_ = SolveReport{};
  report_.eta = eta_;
  report_.inner_m = m_;
  report_.batch_size = batch_;

  global_active_ = variant_.screening
                       ? ActiveSet::full(spec_)
                       : ActiveSet(spec_.partition(),
                                   [&] {
                                     std::vector<Index> all(static_cast<std::size_t>(spec_.blocks()));
                                     std::iota(all.begin(), all.end(), Index{0});
                                     return all;
                                   }(),
                                   std::vector<double>(static_cast<std::size_t>(spec_.blocks()), 0.0));
  local_active_ = global_active_;
  restricted_.reset();
  const Index q = spec_.blocks();

  Vector xhat = spec_.anchor();
  bool emptied = false;
  Index k = 0;
  for (;; ++k) {
    const ProblemSpec& P = work();
    xt_ = xhat;
    zt_ = predictions(P, xt_);
    gt_ = sample_derivatives(P, zt_);
    mut_ = gradient_from_derivatives(P, gt_, xt_);
    const double objective = smooth_value(P, zt_, xt_) + P.lambda() * regularizer_value(P, xt_);
    if (!std::isfinite(objective))
      throw Diverged(std::string(solver_name(config_.solver)) + ": non-finite objective at outer iteration " +
                         std::to_string(k),
                     static_cast<long>(k));
    const DualPoint theta = dual_point(P, gt_, local_active_);
    const double dual = dual_objective(P, theta, local_active_);
    const double gap = std::isfinite(dual) ? objective - dual : std::numeric_limits<double>::infinity();
    report_.trace.push_back({k, elapsed(), objective, gap, local_active_.block_count(),
                             local_active_.feature_count()});
    if (gap <= config_.gap_tol) {
      report_.converged = true;
      break;
    }
    if (k >= config_.max_outer) break;

    if (variant_.screening && k % config_.screen_every == 0 && std::isfinite(gap)) {
      if (!apply_screen(k, theta, gap)) {
        emptied = true;
        ++k;
        break;
      }
    }
    const Index steps = variant_.shrink_budget ? inner_budget(m_, local_active_.block_count(), q) : m_;
    xhat = inner_loop(steps);
  }

  report_.outer_iters = k;
  report_.x_final = Vector::Zero(spec_.d());
  if (emptied) {
    // Every block certified zero: the solution is x = 0.
    const Vector zero = Vector::Zero(spec_.d());
    const ActiveSet none(spec_.partition(), {}, {});
    const DualPoint theta = dual_point(spec_, sample_derivatives(spec_, predictions(spec_, zero)), none);
    const double gap = duality_gap(spec_, zero, theta, none);
    report_.trace.push_back({k, elapsed(), primal_objective(spec_, zero), gap, 0, 0});
    report_.converged = gap <= config_.gap_tol;
  } else {
    const auto& features = global_active_.features();
    for (std::size_t c = 0; c < features.size(); ++c) report_.x_final[features[c]] = xt_[static_cast<Index>(c)];
  }
  report_.wall_time = elapsed();
  return std::move(report_);
}

bool Engine::apply_screen(Index k, const DualPoint& theta, double gap) {
  const ProblemSpec& P = work();
  const double r = safe_radius(gap, radius_constant_);
  const ActiveSet survivors = screen(P, theta, r, local_active_);
  if (survivors.block_count() == local_active_.block_count()) return true;

  // Map local survivors back to global block ids.
  std::vector<bool> keep(static_cast<std::size_t>(local_active_.block_count()), false);
  for (Index local : survivors.blocks()) keep[static_cast<std::size_t>(local)] = true;
  for (std::size_t b = 0; b < keep.size(); ++b)
    if (!keep[b]) report_.eliminations.push_back({k, global_active_.blocks()[b]});
  const std::vector<Index> old_features = global_active_.features();
  global_active_ = global_active_.keep(spec_.partition(), keep);
  if (global_active_.empty()) return false;

  // Restrict snapshot state to the surviving features.
  const auto& new_features = global_active_.features();
  Vector xt(static_cast<Index>(new_features.size()));
  Vector mut(xt.size());
  bool dropped_nonzero = false;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < old_features.size(); ++c) {
    if (pos < new_features.size() && new_features[pos] == old_features[c]) {
      xt[static_cast<Index>(pos)] = xt_[static_cast<Index>(c)];
      mut[static_cast<Index>(pos)] = mut_[static_cast<Index>(c)];
      ++pos;
    } else if (xt_[static_cast<Index>(c)] != 0.0) {
      dropped_nonzero = true;
    }
  }
  restricted_.emplace(restrict_problem(spec_, global_active_.blocks()));
  std::vector<Index> local_blocks(global_active_.blocks().size());
  std::iota(local_blocks.begin(), local_blocks.end(), Index{0});
  local_active_ = ActiveSet(restricted_->partition(), std::move(local_blocks), global_active_.column_bounds());
  xt_ = std::move(xt);
  if (dropped_nonzero) {
    // Zeroing screened coordinates moved the snapshot; refresh its gradient.
    zt_ = predictions(*restricted_, xt_);
    gt_ = sample_derivatives(*restricted_, zt_);
    mut_ = gradient_from_derivatives(*restricted_, gt_, xt_);
  } else {
    mut_ = std::move(mut);
  }
  return true;
}

Vector Engine::inner_loop(Index steps) {
  return variant_.step == InnerStep::BlockVarianceReduced ? block_inner(steps) : full_inner(steps);
}

Vector Engine::block_inner(Index steps) {
  const ProblemSpec& P = work();
  const RowMatrix& rows = P.data().rows();
  const ColMatrix& cols = P.data().cols();
  const BlockPartition& part = P.partition();
  const Index q_k = part.size();
  const double threshold = eta_ * P.lambda();

  // Keep z = A x up to date through column updates when that is cheaper than
  // recomputing the batch's row products each step.
  const double col_cost = static_cast<double>(cols.nonZeros()) / static_cast<double>(q_k);
  const double row_cost = static_cast<double>(batch_) * static_cast<double>(rows.nonZeros()) /
                          static_cast<double>(P.n());
  const bool incremental = col_cost < row_cost;

  Vector x = xt_;
  Vector z;
  if (incremental) z = zt_;
  LazyAverage avg(x);
  std::vector<Index> batch;
  std::vector<double> grad;
  for (Index t = 1; t <= steps; ++t) {
    const Index j = rng_.uniform(q_k);
    rng_.batch(P.n(), batch_, batch);
    const auto group = part.group(j);
    grad.resize(group.size());
    if (incremental)
      detail::vr_block_gradient(P, x, xt_, zt_, mut_, batch, j, [&](Index i) { return z[i]; }, grad);
    else
      detail::vr_block_gradient(P, x, xt_, zt_, mut_, batch, j,
                                [&](Index i) { return detail::row_dot(rows, i, x); }, grad);
    for (std::size_t s = 0; s < group.size(); ++s) grad[s] = x[group[s]] - eta_ * grad[s];
    P.reg().block_prox(grad, threshold);
    for (std::size_t s = 0; s < group.size(); ++s) {
      const Index c = group[s];
      const double delta = grad[s] - x[c];
      if (delta == 0.0) continue;
      avg.before_change(c, x[c], t);
      if (incremental)
        for (ColMatrix::InnerIterator it(cols, c); it; ++it) z[it.row()] += delta * it.value();
      x[c] = grad[s];
    }
    report_.coordinate_updates += group.size();
  }
  return avg.mean(x, steps);
}

Vector Engine::full_inner(Index steps) {
  const ProblemSpec& P = work();
  const RowMatrix& rows = P.data().rows();
  const Vector& y = P.data().y();
  const BlockPartition& part = P.partition();
  const bool reduced = variant_.step == InnerStep::FullVarianceReduced;
  const double threshold = eta_ * P.lambda();
  const double two_mu = 2.0 * P.mu_p();
  const Index d = P.d();

  Vector x = xt_;
  Vector sum = Vector::Zero(d);
  Vector grad(d);
  std::vector<Index> batch;
  std::vector<double> buf;
  for (Index t = 1; t <= steps; ++t) {
    rng_.batch(P.n(), batch_, batch);
    grad.setZero();
    for (Index i : batch) {
      double coef = P.loss().derivative(detail::row_dot(rows, i, x), y[i]);
      if (reduced) coef -= P.loss().derivative(zt_[i], y[i]);
      if (coef == 0.0) continue;
      for (RowMatrix::InnerIterator it(rows, i); it; ++it) grad[it.col()] += coef * it.value();
    }
    grad /= static_cast<double>(batch.size());
    if (reduced) {
      grad += mut_;
      if (two_mu > 0.0) grad += two_mu * (x - xt_);
    } else if (two_mu > 0.0) {
      grad += two_mu * (x - P.anchor());
    }
    x -= eta_ * grad;
    for (Index j = 0; j < part.size(); ++j) {
      const auto group = part.group(j);
      buf.resize(group.size());
      for (std::size_t s = 0; s < group.size(); ++s) buf[s] = x[group[s]];
      P.reg().block_prox(buf, threshold);
      for (std::size_t s = 0; s < group.size(); ++s) x[group[s]] = buf[s];
    }
    sum += x;
    report_.coordinate_updates += static_cast<std::uint64_t>(d);
  }
  return sum / static_cast<double>(steps);
}

}  // namespace

Index inner_budget(Index m, Index active_blocks, Index blocks) {
  if (blocks < 1) throw InvalidArgument("inner_budget: block count must be positive");
  const Index scaled = (m * active_blocks + blocks - 1) / blocks;
  return std::max<Index>(1, scaled);
}

SolveReport adsgd_solve(const ProblemSpec& spec, const SolverConfig& config) {
  SolverConfig c = config;
  c.solver = SolverKind::ADSGD;
  return Engine(spec, c, {InnerStep::BlockVarianceReduced, config.screening, config.screening}).run();
}

SolveReport asgd_solve(const ProblemSpec& spec, const SolverConfig& config) {
  SolverConfig c = config;
  c.solver = SolverKind::ASGD;
  return Engine(spec, c, {InnerStep::FullStochastic, config.screening, config.screening}).run();
}

SolveReport proxsvrg_solve(const ProblemSpec& spec, const SolverConfig& config) {
  SolverConfig c = config;
  c.solver = SolverKind::ProxSVRG;
  return Engine(spec, c, {InnerStep::FullVarianceReduced, false, false}).run();
}

SolveReport mrbcd_solve(const ProblemSpec& spec, const SolverConfig& config) {
  SolverConfig c = config;
  c.solver = SolverKind::MRBCD;
  return Engine(spec, c, {InnerStep::BlockVarianceReduced, false, false}).run();
}

SolveReport solve(const ProblemSpec& spec, const SolverConfig& config) {
  switch (config.solver) {
    case SolverKind::ADSGD: return adsgd_solve(spec, config);
    case SolverKind::ASGD: return asgd_solve(spec, config);
    case SolverKind::ProxSVRG: return proxsvrg_solve(spec, config);
    case SolverKind::MRBCD: return mrbcd_solve(spec, config);
    case SolverKind::Reference: return reference_solve(spec, config.gap_tol).report;
  }
  throw InvalidArgument("solve: unknown solver");
}

Vector vr_gradient(const ProblemSpec& spec, const Vector& x, const Vector& x_tilde, const Vector& mu_tilde,
                   std::span<const Index> batch, Index block) {
  if (x.size() != spec.d() || x_tilde.size() != spec.d() || mu_tilde.size() != spec.d())
    throw InvalidArgument("vr_gradient: vectors must have length d");
  if (batch.empty()) throw InvalidArgument("vr_gradient: empty batch");
  if (block < 0 || block >= spec.blocks()) throw InvalidArgument("vr_gradient: block id out of range");
  for (Index i : batch)
    if (i < 0 || i >= spec.n()) throw InvalidArgument("vr_gradient: sample index out of range");
  const RowMatrix& rows = spec.data().rows();
  const Vector zt = predictions(spec, x_tilde);
  Vector out(static_cast<Index>(spec.partition().group(block).size()));
  detail::vr_block_gradient(spec, x, x_tilde, zt, mu_tilde, batch, block,
                            [&](Index i) { return detail::row_dot(rows, i, x); },
                            std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "adsgd") return SolverKind::ADSGD;
  if (name == "asgd") return SolverKind::ASGD;
  if (name == "proxsvrg") return SolverKind::ProxSVRG;
  if (name == "mrbcd") return SolverKind::MRBCD;
  if (name == "reference") return SolverKind::Reference;
  throw InvalidArgument("unknown solver '" + std::string(name) + "'");
}

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::ADSGD: return "adsgd";
    case SolverKind::ASGD: return "asgd";
    case SolverKind::ProxSVRG: return "proxsvrg";
    case SolverKind::MRBCD: return "mrbcd";
    case SolverKind::Reference: return "reference";
  }
  return "unknown";
}

RadiusRule parse_radius_rule(std::string_view name) {
  if (name == "lipschitz") return RadiusRule::PerSampleLipschitz;
  if (name == "dual") return RadiusRule::DualCurvature;
  throw InvalidArgument("unknown radius rule '" + std::string(name) + "' (expected lipschitz|dual)");
}

}  // namespace adsgd
