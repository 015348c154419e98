#include <cmath>
#include <limits>
#include <random>

#include "adsgd/duality.hpp"
#include "adsgd/errors.hpp"
#include "adsgd/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace adsgd;
using testing_support::random_instance;

namespace {

Vector derivatives_at(const ProblemSpec& spec, const testing_support::DenseInstance& inst, const Vector& x) {
  const Vector z = inst.A * x;
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) g[i] = testing_support::loss_derivative(spec.loss().kind(), z[i], inst.y[i]);
  return g;
}

/// -(1/n) sum f*(-theta_i) with the conjugates written out by hand.
double dense_dual(LossKind kind, const Vector& y, const Vector& theta) {
  double s = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    const double u = -theta[i];
    if (kind == LossKind::SquaredError) {
      s += 0.5 * u * u + u * y[i];
    } else {
      const double p = u + y[i];
      if (p < 0.0 || p > 1.0) return -std::numeric_limits<double>::infinity();
      s += (p > 0 ? p * std::log(p) : 0.0) + (p < 1 ? (1 - p) * std::log(1 - p) : 0.0);
    }
  }
  return -s / static_cast<double>(theta.size());
}

double dense_score(const ProblemSpec& spec, const testing_support::DenseInstance& inst, const Vector& theta, Index j) {
  const Vector c = inst.A.transpose() * theta / static_cast<double>(spec.n());
  return testing_support::dual_norm_value(spec.reg().kind(), testing_support::gather(c, spec.partition().group(j)));
}

}  // namespace

TEST_CASE("safe radius examples") {
  CHECK(safe_radius(0.0, 3.0) == 0.0);
  CHECK(safe_radius(2.0, 1.0) == doctest::Approx(2.0));
  CHECK(safe_radius(0.5, 25.0) == doctest::Approx(5.0));
  CHECK(safe_radius(-1e-14, 4.0) == 0.0);
  CHECK_THROWS_AS(safe_radius(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(safe_radius(1.0, -2.0), InvalidArgument);
}

TEST_CASE("dual point scaling and feasibility") {
  for (LossKind kind : {LossKind::SquaredError, LossKind::Logistic}) {
    for (RegularizerKind reg : {RegularizerKind::L1, RegularizerKind::GroupL2}) {
      const auto inst = random_instance(40, 30, 13, kind, 0.5);
      const ProblemSpec base(inst.data, BlockPartition::contiguous(30, 6), Loss(kind), Regularizer(reg), 1.0);
      const double lmax = lambda_max(base);
      const ActiveSet all = ActiveSet::full(base);
      const Vector x = Vector::LinSpaced(30, -0.2, 0.2);
      const Vector g = derivatives_at(base, inst, x);
      double previous_scale = std::numeric_limits<double>::infinity();
      for (double ratio : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
        const ProblemSpec spec = base.with_lambda(ratio * lmax);
        const DualPoint dp = dual_point(spec, g, all);
        double worst = 0.0;
        for (Index j = 0; j < spec.blocks(); ++j) worst = std::max(worst, dense_score(spec, inst, -g, j));
        const double expected_scale = std::max(1.0, worst / spec.lambda());
        CHECK(dp.scale_used == doctest::Approx(expected_scale).epsilon(1e-12));
        CHECK((dp.theta + g / expected_scale).norm() <= 1e-12 * g.norm());
        for (Index j = 0; j < spec.blocks(); ++j)
          CHECK(dense_score(spec, inst, dp.theta, j) <= spec.lambda() * (1 + 1e-12));
        CHECK(dp.scale_used <= previous_scale);
        previous_scale = dp.scale_used;
      }
    }
  }
}

TEST_CASE("dual objective and gap agree with hand-written conjugates") {
  for (LossKind kind : {LossKind::SquaredError, LossKind::Logistic}) {
    const auto inst = random_instance(30, 20, 17, kind);
    const ProblemSpec base(inst.data, BlockPartition::contiguous(20, 20), Loss(kind), Regularizer(RegularizerKind::L1), 1.0);
    const ProblemSpec spec = base.with_lambda(0.3 * lambda_max(base));
    const ActiveSet all = ActiveSet::full(spec);
    const Vector x = Vector::LinSpaced(20, -0.1, 0.1);
    const DualPoint dp = dual_point(spec, derivatives_at(spec, inst, x), all);
    const double d_expected = dense_dual(kind, inst.y, dp.theta);
    CHECK(dual_objective(spec, dp, all) == doctest::Approx(d_expected).epsilon(1e-12));
    const double p = testing_support::primal_dense(inst.A, inst.y, spec, x);
    CHECK(duality_gap(spec, x, dp, all) == doctest::Approx(p - d_expected).epsilon(1e-10));
  }
}

TEST_CASE("gap vanishes at zero above lambda_max on the hand instance") {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 4;
  Vector y(2);
  y << 1, -1;
  const auto data = testing_support::to_dataset(A, y);
  for (double lambda : {1.0, 1.5, 4.0}) {
    const ProblemSpec spec(data, BlockPartition::contiguous(2, 2), Loss(LossKind::SquaredError),
                           Regularizer(RegularizerKind::L1), lambda);
    const ActiveSet all = ActiveSet::full(spec);
    const Vector g = sample_derivatives(spec, Vector::Zero(2));
    const DualPoint dp = dual_point(spec, g, all);
    CHECK(dp.scale_used == 1.0);
    CHECK(duality_gap(spec, Vector::Zero(2), dp, all) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("gap bounds suboptimality and vanishes at the optimum") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  for (LossKind kind : {LossKind::SquaredError, LossKind::Logistic}) {
    for (RegularizerKind reg : {RegularizerKind::L1, RegularizerKind::GroupL2}) {
      const auto inst = random_instance(40, 50, 23, kind);
      const ProblemSpec base(inst.data, BlockPartition::contiguous(50, 10), Loss(kind), Regularizer(reg), 1.0, 0.0);
      const ProblemSpec spec = base.with_lambda(0.4 * lambda_max(base));
      const ReferenceResult ref = reference_solve(spec, 1e-12);
      const ActiveSet all = ActiveSet::full(spec);
      CHECK(std::abs(duality_gap(spec, ref.x, ref.theta, all)) <= 1e-8);
      for (int trial = 0; trial < 10; ++trial) {
        Vector x = ref.x;
        for (Index k = 0; k < x.size(); ++k) x[k] += 0.05 * normal(gen);
        const DualPoint dp = dual_point(spec, derivatives_at(spec, inst, x), all);
        const double gap = duality_gap(spec, x, dp, all);
        CHECK(gap >= -1e-10);
        CHECK(gap + 1e-9 >= primal_objective(spec, x) - ref.objective);
      }
    }
  }
}

TEST_CASE("perturbed problems keep a valid gap") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  const auto inst = random_instance(30, 40, 31, LossKind::Logistic);
  Vector anchor(40);
  for (Index k = 0; k < 40; ++k) anchor[k] = 0.1 * normal(gen);
  const ProblemSpec base(inst.data, BlockPartition::contiguous(40, 8), Loss(LossKind::Logistic),
                         Regularizer(RegularizerKind::L1), 1.0, 1e-2, anchor);
  const ProblemSpec spec = base.with_lambda(0.5 * lambda_max(base));
  const ReferenceResult ref = reference_solve(spec, 1e-12);
  const ActiveSet all = ActiveSet::full(spec);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = ref.x;
    for (Index k = 0; k < x.size(); ++k) x[k] += 0.05 * normal(gen);
    const DualPoint dp = dual_point(spec, derivatives_at(spec, inst, x), all);
    CHECK(duality_gap(spec, x, dp, all) + 1e-9 >= primal_objective(spec, x) - ref.objective);
  }
}

TEST_CASE("infeasible logistic dual gives an infinite gap") {
  const auto inst = random_instance(10, 5, 3, LossKind::Logistic);
  const ProblemSpec spec(inst.data, BlockPartition::contiguous(5, 5), Loss(LossKind::Logistic),
                         Regularizer(RegularizerKind::L1), 0.1);
  DualPoint bad{Vector::Constant(10, 5.0), 1.0};
  CHECK(duality_gap(spec, Vector::Zero(5), bad, ActiveSet::full(spec)) == std::numeric_limits<double>::infinity());
}

TEST_CASE("screening test follows the sphere bound") {
  const auto inst = random_instance(50, 100, 41, LossKind::SquaredError);
  const ProblemSpec base(inst.data, BlockPartition::contiguous(100, 100), Loss(LossKind::SquaredError),
                         Regularizer(RegularizerKind::L1), 1.0);
  const ProblemSpec spec = base.with_lambda(0.5 * lambda_max(base));
  const ActiveSet all = ActiveSet::full(spec);
  const DualPoint dp = dual_point(spec, derivatives_at(spec, inst, Vector::Zero(100)), all);

  CHECK(screen(spec, dp, 1e12, all).blocks() == all.blocks());
  CHECK(screen(spec, dp, std::numeric_limits<double>::infinity(), all).blocks() == all.blocks());

  std::vector<Index> previous;
  for (double r : {10.0, 3.0, 1.0, 0.3, 0.0}) {
    const ActiveSet kept = screen(spec, dp, r, all);
    for (Index j = 0; j < spec.blocks(); ++j) {
      const double bound = dense_score(spec, inst, dp.theta, j) + inst.A.col(j).norm() * r / 50.0;
      if (std::abs(bound - spec.lambda()) <= 1e-12 * spec.lambda()) continue;  // rounding tie
      CHECK(kept.contains(j) == !(bound < spec.lambda()));
    }
    // smaller radius keeps a subset
    for (Index j : kept.blocks()) CHECK((previous.empty() || std::find(previous.begin(), previous.end(), j) != previous.end()));
    previous = kept.blocks();
    if (previous.empty()) break;
  }
}

TEST_CASE("screening at the optimum keeps exactly the equicorrelation set") {
  const auto inst = random_instance(50, 100, 43, LossKind::SquaredError);
  const ProblemSpec base(inst.data, BlockPartition::contiguous(100, 100), Loss(LossKind::SquaredError),
                         Regularizer(RegularizerKind::L1), 1.0);
  const ProblemSpec spec = base.with_lambda(0.5 * lambda_max(base));
  const ReferenceResult ref = reference_solve(spec, 1e-12);
  const auto eq = equicorrelation_set(spec, ref.theta);
  // A gap of 1e-20 stands in for zero: it only absorbs rounding in the scores.
  const double r = safe_radius(1e-20, lipschitz_constants(spec).T);
  const ActiveSet kept = screen(spec, ref.theta, r, ActiveSet::full(spec));
  CHECK(kept.blocks() == eq);
  for (Index j : ref.support_blocks) CHECK(std::find(eq.begin(), eq.end(), j) != eq.end());
}

TEST_CASE("equicorrelation set edge cases") {
  auto inst = random_instance(30, 10, 47, LossKind::SquaredError);
  const ProblemSpec base(inst.data, BlockPartition::contiguous(10, 10), Loss(LossKind::SquaredError),
                         Regularizer(RegularizerKind::L1), 1.0);
  const ProblemSpec above = base.with_lambda(1.01 * lambda_max(base));
  CHECK(equicorrelation_set(above, reference_solve(above).theta).empty());

  // Duplicate the most correlated column: both copies tie.
  const Vector c = (inst.A.transpose() * inst.y).cwiseAbs();
  Index top = 0;
  c.maxCoeff(&top);
  Eigen::MatrixXd A2(30, 11);
  A2 << inst.A, inst.A.col(top);
  const auto data2 = testing_support::to_dataset(A2, inst.y);
  const ProblemSpec dup_base(data2, BlockPartition::contiguous(11, 11), Loss(LossKind::SquaredError),
                             Regularizer(RegularizerKind::L1), 1.0);
  const ProblemSpec dup = dup_base.with_lambda(0.5 * lambda_max(dup_base));
  const auto eq = equicorrelation_set(dup, reference_solve(dup, 1e-12).theta);
  CHECK(std::find(eq.begin(), eq.end(), top) != eq.end());
  CHECK(std::find(eq.begin(), eq.end(), Index{10}) != eq.end());
}

TEST_CASE("an irrelevant small column is screened early") {
  auto inst = random_instance(60, 20, 53, LossKind::SquaredError);
  // Column orthogonal to y with a small norm.
  Vector v = Vector::LinSpaced(60, -1.0, 1.0);
  v -= v.dot(inst.y) / inst.y.squaredNorm() * inst.y;
  v *= 0.05 / v.norm();
  Eigen::MatrixXd A2(60, 21);
  A2 << inst.A, v;
  const auto data = testing_support::to_dataset(A2, inst.y);
  const ProblemSpec base(data, BlockPartition::contiguous(21, 21), Loss(LossKind::SquaredError),
                         Regularizer(RegularizerKind::L1), 1.0);
  const ProblemSpec spec = base.with_lambda(0.5 * lambda_max(base));
  SolverConfig config;
  config.blocks = 21;
  config.inner_m = 400;
  const SolveReport report = adsgd_solve(spec, config);
  bool removed = false;
  for (const Elimination& e : report.eliminations)
    if (e.block == 20 && e.outer_iter <= 3) removed = true;
  CHECK(removed);
}
