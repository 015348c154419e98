#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "adsgd/regularizer.hpp"
#include "adsgd/solver.hpp"
#include "adsgd/synthetic.hpp"

namespace adsgd {

/**
 * A grid of solves: every solver configuration at every lambda ratio,
 * repeated with solver seeds seed, seed+1, ... The dataset is built once.
 */
struct ExperimentPlan {
  /// LIBSVM file; when empty the synthetic generator is used.
  std::optional<std::filesystem::path> data_path;
  SyntheticParams synthetic;
  LossKind model = LossKind::SquaredError;
  RegularizerKind regularizer = RegularizerKind::L1;
  /// Fractions of lambda_max, each in (0, 1].
  std::vector<double> lambda_ratios{0.5, 0.25};
  std::vector<SolverConfig> solvers;
  Index repetitions = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "adsgd-out";
  bool svg = true;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// "n,d,sparsity,noise[,support]" as used by --synthetic and plan files.
SyntheticParams parse_synthetic_spec(std::string_view text);

/// Sets one solver hyperparameter from text (batch_size, blocks, inner_m,
/// eta, theory_mode, strong_convexity, mu_p, gap_tol, max_outer, screening,
/// screen_every, radius). Returns false for an unknown key.
bool apply_solver_option(SolverConfig& config, std::string_view key, std::string_view value);

/**
 * Plan files hold one "key = value" per line; '#' starts a comment.
 * Dataset keys: data, synthetic, seed, model, regularizer. Grid keys:
 * lambda_ratios, solvers (comma lists), repetitions, output, svg. Any
 * solver hyperparameter applies to every solver; "<solver>.<key>" applies
 * to that solver only and wins over the shared value.
 *
 * Throws ParseError with the offending line number.
 */
ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Builds the dataset the plan describes.
std::shared_ptr<const Dataset> plan_dataset(const ExperimentPlan& plan);

struct RunOutcome {
  std::string label;  ///< solver name, suffixed when a solver appears twice
  double lambda_ratio = 0.0;
  Index repetition = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  /// Elapsed seconds at the final trace row (the time to reach gap_tol
  /// when converged).
  double time_s = 0.0;
  double final_gap = 0.0;
  Index outer_iters = 0;
  std::uint64_t coordinate_updates = 0;
  std::filesystem::path trace_path;
  std::vector<TraceRecord> trace;
  /// Non-empty when the solve threw.
  std::string error;
};

struct SummaryRow {
  std::string label;
  double lambda_ratio = 0.0;
  Index runs = 0;
  Index converged = 0;
  /// Arithmetic mean of time_s over converged runs (NaN if none).
  double mean_time_s = 0.0;
  double mean_coordinate_updates = 0.0;
  Index failures = 0;
  std::string first_error;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::vector<SummaryRow> summary;
  std::filesystem::path summary_path;
  std::vector<std::filesystem::path> charts;
};

/**
 * Runs the plan sequentially, writing one trace CSV per run, summary.csv,
 * and (if enabled) one SVG chart per lambda ratio into output_dir. A failed
 * solve is recorded and the remaining runs continue.
 */
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Groups runs by (label, lambda_ratio) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<RunOutcome>& runs);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  ///< plotted on a log10 axis; non-positive values are clipped
};

/// Self-contained SVG polyline chart with a log-scaled y axis.
std::string render_svg_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                             const std::vector<ChartSeries>& series);

}  // namespace adsgd
