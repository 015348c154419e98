#include <algorithm>
#include <cmath>
#include <random>

#include "adsgd/errors.hpp"
#include "adsgd/solver.hpp"
#include "adsgd/synthetic.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace adsgd;
using testing_support::random_instance;

namespace {

ProblemSpec at_ratio(const std::shared_ptr<const Dataset>& data, LossKind loss, Index q, double ratio,
                     RegularizerKind reg = RegularizerKind::L1, double mu = 0.0) {
  const ProblemSpec base(data, BlockPartition::contiguous(data->d(), q), Loss(loss), Regularizer(reg), 1.0, mu);
  return base.with_lambda(ratio * lambda_max(base));
}

/// Traces compared on every field except wall-clock time.
bool same_iterates(const SolveReport& a, const SolveReport& b) {
  if (a.trace.size() != b.trace.size()) return false;
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    TraceRecord ra = a.trace[k], rb = b.trace[k];
    ra.elapsed_s = rb.elapsed_s = 0.0;
    if (!(ra == rb)) return false;
  }
  return a.x_final == b.x_final && a.coordinate_updates == b.coordinate_updates;
}

SolverConfig suite_config(const ProblemSpec& spec, SolverKind kind) {
  const auto lip = lipschitz_constants(spec);
  SolverConfig c;
  c.solver = kind;
  c.inner_m = 20 * spec.n();
  const bool full_vector = kind == SolverKind::ASGD || kind == SolverKind::ProxSVRG;
  c.eta = 0.2 / (full_vector ? lip.T : lip.L);
  if (kind == SolverKind::ASGD) c.batch_size = spec.n();
  return c;
}

void check_trace_invariants(const SolveReport& r) {
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].elapsed_s >= r.trace[k - 1].elapsed_s);
    CHECK(r.trace[k].active_blocks <= r.trace[k - 1].active_blocks);
    CHECK(r.trace[k].active_features <= r.trace[k - 1].active_features);
    CHECK(r.trace[k].outer_iter == r.trace[k - 1].outer_iter + 1);
  }
  CHECK((r.trace.back().gap <= 1e-6 || !r.converged));
}

}  // namespace

TEST_CASE("inner budget scales with the surviving blocks") {
  CHECK(inner_budget(100, 3, 10) == 30);
  CHECK(inner_budget(100, 10, 10) == 100);
  CHECK(inner_budget(10, 1, 3) == 4);
  CHECK(inner_budget(5, 0, 10) == 1);
  CHECK_THROWS_AS(inner_budget(5, 1, 0), InvalidArgument);
}

TEST_CASE("variance-reduced gradient is unbiased and exact at the snapshot") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  for (LossKind kind : {LossKind::SquaredError, LossKind::Logistic}) {
    const auto inst = random_instance(30, 12, 61, kind, 0.6);
    const ProblemSpec spec(inst.data, BlockPartition::contiguous(12, 3), Loss(kind), Regularizer(RegularizerKind::L1),
                           0.1, 0.05);
    Vector x(12), xt(12);
    for (Index k = 0; k < 12; ++k) {
      x[k] = normal(gen);
      xt[k] = normal(gen);
    }
    const Vector mut = full_gradient(spec, xt);
    const Vector gx = full_gradient(spec, x);
    for (Index j = 0; j < spec.blocks(); ++j) {
      const auto g = spec.partition().group(j);
      Vector avg = Vector::Zero(static_cast<Index>(g.size()));
      for (Index i = 0; i < spec.n(); ++i) {
        const std::vector<Index> batch{i};
        avg += vr_gradient(spec, x, xt, mut, batch, j);
        CHECK(vr_gradient(spec, xt, xt, mut, batch, j) == testing_support::gather(mut, g));
      }
      avg /= static_cast<double>(spec.n());
      CHECK((avg - testing_support::gather(gx, g)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
}

TEST_CASE("same seed gives identical runs") {
  const auto inst = generate_synthetic({80, 120, 0.5, 0.1, 8, 4, LossKind::SquaredError, false});
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 12, 0.5);
  for (SolverKind kind : {SolverKind::ADSGD, SolverKind::ASGD, SolverKind::ProxSVRG, SolverKind::MRBCD}) {
    SolverConfig c;
    c.solver = kind;
    c.seed = 99;
    c.max_outer = 15;
    const SolveReport a = solve(spec, c);
    const SolveReport b = solve(spec, c);
    CHECK(same_iterates(a, b));
    c.seed = 100;
    if (kind != SolverKind::ASGD || c.batch_size < spec.n()) CHECK(!same_iterates(a, solve(spec, c)));
  }
}

TEST_CASE("ADSGD without screening is MRBCD") {
  const auto inst = generate_synthetic({60, 90, 1.0, 0.1, 6, 5, LossKind::Logistic, false});
  const ProblemSpec spec = at_ratio(inst.data, LossKind::Logistic, 9, 0.5);
  SolverConfig c;
  c.seed = 3;
  c.max_outer = 30;
  c.screening = false;
  const SolveReport a = adsgd_solve(spec, c);
  c.solver = SolverKind::MRBCD;
  const SolveReport b = mrbcd_solve(spec, c);
  CHECK(same_iterates(a, b));
  for (const TraceRecord& r : b.trace) CHECK(r.active_blocks == spec.blocks());
  CHECK(b.eliminations.empty());
}

TEST_CASE("full batch with one block is proximal gradient") {
  const auto inst = random_instance(40, 25, 71, LossKind::SquaredError);
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 1, 0.5);
  SolverConfig c;
  c.solver = SolverKind::ASGD;
  c.batch_size = spec.n();
  c.inner_m = 1;
  c.max_outer = 1;
  c.screening = false;
  const SolveReport r = asgd_solve(spec, c);
  // x1 = soft_threshold(0 - eta grad F(0), eta lambda)
  const Vector step = -r.eta * (inst.A.transpose() * (-inst.y)) / 40.0;
  Vector x1(25);
  for (Index k = 0; k < 25; ++k)
    x1[k] = std::copysign(std::max(std::abs(step[k]) - r.eta * spec.lambda(), 0.0), step[k]);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[1].objective == doctest::Approx(testing_support::primal_dense(inst.A, inst.y, spec, x1)).epsilon(1e-12));
  CHECK((r.x_final - x1).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("lambda above lambda_max converges immediately to zero") {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 4;
  Vector y(2);
  y << 1, -1;
  const auto data = testing_support::to_dataset(A, y);
  const ProblemSpec spec(data, BlockPartition::contiguous(2, 2), Loss(LossKind::SquaredError),
                         Regularizer(RegularizerKind::L1), 1.0);
  for (SolverKind kind : {SolverKind::ADSGD, SolverKind::ASGD, SolverKind::ProxSVRG, SolverKind::MRBCD, SolverKind::Reference}) {
    SolverConfig c;
    c.solver = kind;
    c.batch_size = 1;
    const SolveReport r = solve(spec, c);
    CHECK(r.converged);
    CHECK(r.outer_iters <= 1);
    CHECK(r.x_final.isZero(0.0));
  }
}

TEST_CASE("every solver reaches the oracle on a suite instance") {
  for (LossKind kind : {LossKind::SquaredError, LossKind::Logistic}) {
    const auto inst = generate_synthetic({100, 200, 1.0, 0.1, 10, 500, kind, false});
    const ProblemSpec spec = at_ratio(inst.data, kind, 50, 0.5);
    const ReferenceResult ref = reference_solve(spec, 1e-10);
    const auto eq = equicorrelation_set(spec, ref.theta);
    for (SolverKind s : {SolverKind::ADSGD, SolverKind::ASGD, SolverKind::ProxSVRG, SolverKind::MRBCD}) {
      CAPTURE(solver_name(s));
      const SolveReport r = solve(spec, suite_config(spec, s));
      CHECK(r.converged);
      check_trace_invariants(r);
      CHECK((r.x_final - ref.x).lpNorm<Eigen::Infinity>() <= 1e-4);
      // screened coordinates are exactly zero, and zero at the optimum
      for (const Elimination& e : r.eliminations)
        for (Index k : spec.partition().group(e.block)) {
          CHECK(r.x_final[k] == 0.0);
          CHECK(std::abs(ref.x[k]) <= 1e-9);
        }
      if (s == SolverKind::ADSGD && kind == LossKind::SquaredError) CHECK(r.trace.back().active_blocks == static_cast<Index>(eq.size()));
    }
  }
}

TEST_CASE("ProxSVRG needs more coordinate updates than ADSGD") {
  const auto inst = generate_synthetic({100, 200, 1.0, 0.1, 10, 502, LossKind::SquaredError, false});
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 50, 0.5);
  const SolveReport a = solve(spec, suite_config(spec, SolverKind::ADSGD));
  const SolveReport p = solve(spec, suite_config(spec, SolverKind::ProxSVRG));
  REQUIRE(a.converged);
  REQUIRE(p.converged);
  CHECK(p.coordinate_updates > a.coordinate_updates);
}

TEST_CASE("theory mode resolves batch, step and inner length") {
  const auto inst = random_instance(50, 40, 81, LossKind::SquaredError);
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 8, 0.5);
  const auto lip = lipschitz_constants(spec);
  SolverConfig c;
  c.theory_mode = true;
  c.max_outer = 1;
  c.strong_convexity = 0.5;
  const SolveReport r = adsgd_solve(spec, c);
  CHECK(r.batch_size == std::min<Index>(50, static_cast<Index>(std::ceil(lip.T / lip.L))));
  CHECK(r.eta == doctest::Approx(1.0 / (16.0 * lip.L)));
  CHECK(r.inner_m == static_cast<Index>(std::ceil(65.0 * 8 * lip.L / 0.5)));
}

TEST_CASE("invalid configurations and divergence are reported") {
  const auto inst = random_instance(20, 10, 83, LossKind::SquaredError);
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 5, 0.5);
  SolverConfig c;
  c.batch_size = 21;
  CHECK_THROWS_AS(adsgd_solve(spec, c), InvalidArgument);
  c.batch_size = 5;
  c.eta = -1.0;
  CHECK_THROWS_AS(adsgd_solve(spec, c), InvalidArgument);
  c.eta = 1e8;
  c.solver = SolverKind::ProxSVRG;
  CHECK_THROWS_AS(proxsvrg_solve(spec, c), Diverged);
  CHECK_THROWS_AS(parse_solver_kind("sgd"), InvalidArgument);
  CHECK(parse_solver_kind("mrbcd") == SolverKind::MRBCD);
}

TEST_CASE("reference solver: closed forms and stability") {
  // orthonormal design: soft threshold of A^T y / n
  const auto inst = generate_synthetic({120, 40, 1.0, 0.0, 6, 91, LossKind::SquaredError, true});
  Eigen::MatrixXd A = Eigen::MatrixXd(inst.data->rows());
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 40, 0.3);
  const ReferenceResult tight = reference_solve(spec, 1e-10);
  const Vector expected = testing_support::orthonormal_lasso_solution(A, inst.data->y(), spec.lambda());
  CHECK((tight.x - expected).lpNorm<Eigen::Infinity>() <= 1e-8);
  const ReferenceResult loose = reference_solve(spec, 1e-8);
  CHECK(loose.support == tight.support);

  // noise-free orthonormal design recovers the planted support
  std::vector<Index> planted;
  for (Index k = 0; k < inst.planted.size(); ++k)
    if (inst.planted[k] != 0.0) planted.push_back(k);
  const ProblemSpec small = at_ratio(inst.data, LossKind::SquaredError, 40, 0.05);
  CHECK(reference_solve(small, 1e-10).support == planted);

  const ProblemSpec above = at_ratio(inst.data, LossKind::SquaredError, 40, 1.0 + 1e-9);
  const ReferenceResult zero = reference_solve(above);
  CHECK(zero.x.isZero(0.0));
  CHECK(zero.gap <= 1e-12);

  const auto hard = random_instance(60, 80, 93, LossKind::Logistic);
  CHECK_THROWS_AS(reference_solve(at_ratio(hard.data, LossKind::Logistic, 80, 0.01), 1e-14, 3), ConvergenceFailure);
}

TEST_CASE("literal radius can screen an active block on a sparse design") {
  // Regression instance for the radius rule: per-sample T is far below n c.
  SyntheticParams p;
  p.n = 182;
  p.d = 131;
  p.density = 0.02;
  p.support = 12;
  p.seed = 1012;
  const auto inst = generate_synthetic(p);
  const ProblemSpec spec = at_ratio(inst.data, LossKind::SquaredError, 10, 0.5);
  const ReferenceResult ref = reference_solve(spec, 1e-10);
  const auto lip = lipschitz_constants(spec);
  REQUIRE(lip.T < static_cast<double>(spec.n()));

  auto violations = [&](RadiusRule rule) {
    SolverConfig c;
    c.solver = SolverKind::ASGD;
    c.seed = 12;
    c.inner_m = 2000;
    c.eta = 0.24 / lip.T;
    c.radius_rule = rule;
    const SolveReport r = asgd_solve(spec, c);
    int bad = 0;
    for (const Elimination& e : r.eliminations)
      for (Index k : spec.partition().group(e.block)) bad += std::abs(ref.x[k]) > 1e-9;
    return bad;
  };
  CHECK(violations(RadiusRule::PerSampleLipschitz) > 0);
  CHECK(violations(RadiusRule::DualCurvature) == 0);
}
