#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "adsgd/duality.hpp"
#include "adsgd/problem.hpp"

namespace adsgd {

enum class SolverKind { ADSGD, ASGD, ProxSVRG, MRBCD, Reference };

SolverKind parse_solver_kind(std::string_view name);
std::string_view solver_name(SolverKind kind);

/// Which Lipschitz-type constant multiplies the gap inside the safe radius.
enum class RadiusRule {
  /// r = sqrt(2 T Gap) with T the per-sample full-gradient constant.
  PerSampleLipschitz,
  /// r = sqrt(2 max(T, n c) Gap); n c is the inverse strong concavity of
  /// the dual in sample space, which keeps the sphere safe when T < n c.
  DualCurvature,
};

RadiusRule parse_radius_rule(std::string_view name);

struct SolverConfig {
  SolverKind solver = SolverKind::ADSGD;
  /// Step size; 0 selects 1/(16 L) for block solvers and 1/(16 T) for
  /// the full-vector solvers (ASGD, ProxSVRG).
  double eta = 0.0;
  /// Base inner-loop length m; 0 selects 2n.
  Index inner_m = 0;
  /// |I|. A batch equal to n uses every sample, in order.
  Index batch_size = 10;
  /// Block count used when the harness builds a contiguous partition.
  Index blocks = 10;
  Index max_outer = 200;
  double gap_tol = 1e-6;
  std::uint64_t seed = 0;
  /// |I| = ceil(T/L), eta = 1/(16 L); m = ceil(65 q L / mu) when
  /// strong_convexity > 0.
  bool theory_mode = false;
  double strong_convexity = 0.0;
  /// Perturbation strength applied by the harness when it builds the problem.
  double mu_p = 0.0;
  /// Screen every s-th outer iteration (ADSGD/ASGD).
  Index screen_every = 1;
  /// ADSGD without screening is MRBCD.
  bool screening = true;
  RadiusRule radius_rule = RadiusRule::DualCurvature;
};

struct TraceRecord {
  Index outer_iter = 0;
  double elapsed_s = 0.0;
  double objective = 0.0;
  double gap = 0.0;
  Index active_blocks = 0;
  Index active_features = 0;

  bool operator==(const TraceRecord&) const = default;
};

struct Elimination {
  Index outer_iter;  ///< trace row whose gap triggered the removal
  Index block;
};

struct SolveReport {
  Vector x_final;
  std::vector<TraceRecord> trace;
  bool converged = false;
  Index outer_iters = 0;
  double wall_time = 0.0;
  /// Coordinates written by proximal steps, summed over the run.
  std::uint64_t coordinate_updates = 0;
  std::vector<Elimination> eliminations;
  /// Hyperparameters after defaults and theory mode were resolved.
  double eta = 0.0;
  Index inner_m = 0;
  Index batch_size = 0;
};

/// m_k = max(1, ceil(m q_k / q)).
Index inner_budget(Index m, Index active_blocks, Index blocks);

SolveReport adsgd_solve(const ProblemSpec& spec, const SolverConfig& config);
SolveReport asgd_solve(const ProblemSpec& spec, const SolverConfig& config);
SolveReport proxsvrg_solve(const ProblemSpec& spec, const SolverConfig& config);
SolveReport mrbcd_solve(const ProblemSpec& spec, const SolverConfig& config);

/// Dispatches on config.solver (Reference runs reference_solve at gap_tol).
SolveReport solve(const ProblemSpec& spec, const SolverConfig& config);

/// grad_{G_j} F_I(x) - grad_{G_j} F_I(x_tilde) + mu_tilde_{G_j}.
Vector vr_gradient(const ProblemSpec& spec, const Vector& x, const Vector& x_tilde,
                   const Vector& mu_tilde, std::span<const Index> batch, Index block);

struct ReferenceResult {
  SolveReport report;
  Vector x;
  DualPoint theta;
  std::vector<Index> support;        ///< coordinates with x_k != 0
  std::vector<Index> support_blocks;  ///< blocks with a nonzero coordinate
  double objective = 0.0;
  double gap = 0.0;
};

/**
 * Deterministic high-accuracy solver used as the test oracle: FISTA with
 * backtracking and function-value restarts, run until the duality gap is
 * at most `tol`. For L1 problems the result is polished by Newton steps on
 * the identified support when that lowers the gap.
 *
 * Throws ConvergenceFailure (carrying the best gap) if `max_iter` is hit.
 */
ReferenceResult reference_solve(const ProblemSpec& spec, double tol = 1e-10, Index max_iter = 200000);

}  // namespace adsgd
