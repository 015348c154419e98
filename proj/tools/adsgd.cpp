#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "adsgd/errors.hpp"
#include "adsgd/experiment.hpp"
#include "adsgd/libsvm.hpp"
#include "adsgd/solver.hpp"
#include "adsgd/synthetic.hpp"
#include "adsgd/trace_io.hpp"

namespace {

using namespace adsgd;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kInvalidArgument = 2,
  kParseError = 3,
  kSolveFailure = 4,
  kDegenerate = 5,
};

constexpr const char* kOutputDirEnv = "ADSGD_OUTPUT_DIR";

struct DataOptions {
  std::string data_path;
  std::string synthetic;
  std::string model = "lasso";
  std::string regularizer = "l1";
  Index blocks = 10;
  double mu_p = 0.0;
  double lambda_ratio = 0.5;
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool with_lambda) {
  auto* data = cmd->add_option("--data", o.data_path, "LIBSVM file");
  auto* synth = cmd->add_option("--synthetic", o.synthetic, "synthetic design n,d,sparsity,noise[,support]");
  data->excludes(synth);
  cmd->add_option("--model", o.model, "lasso | logistic")->capture_default_str();
  cmd->add_option("--regularizer", o.regularizer, "l1 | group")->capture_default_str();
  cmd->add_option("--blocks", o.blocks, "number of contiguous blocks q")->capture_default_str();
  cmd->add_option("--mu-p", o.mu_p, "perturbation strength mu_p")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed (dataset and sampler)")->capture_default_str();
  if (with_lambda) cmd->add_option("--lambda-ratio", o.lambda_ratio, "lambda / lambda_max")->capture_default_str();
}

std::shared_ptr<const Dataset> load_data(const DataOptions& o) {
  const LossKind model = parse_loss_kind(o.model);
  if (!o.data_path.empty()) return load_libsvm(o.data_path, model);
  if (o.synthetic.empty()) throw InvalidArgument("one of --data or --synthetic is required");
  SyntheticParams p = parse_synthetic_spec(o.synthetic);
  p.seed = o.seed;
  p.model = model;
  return generate_synthetic(p).data;
}

/// Problem at lambda = 1 (for lambda_max) on the requested partition.
ProblemSpec base_problem(const DataOptions& o, const std::shared_ptr<const Dataset>& data) {
  if (o.blocks < 1) throw InvalidArgument("--blocks must be >= 1");
  const Index q = std::min<Index>(o.blocks, data->d());
  return ProblemSpec(data, BlockPartition::contiguous(data->d(), q), Loss(parse_loss_kind(o.model)),
                     Regularizer(parse_regularizer_kind(o.regularizer)), 1.0, o.mu_p);
}

ProblemSpec scaled_problem(const DataOptions& o, const std::shared_ptr<const Dataset>& data) {
  if (!(o.lambda_ratio > 0.0)) throw InvalidArgument("--lambda-ratio must be positive");
  const ProblemSpec base = base_problem(o, data);
  return base.with_lambda(o.lambda_ratio * lambda_max(base));
}

std::filesystem::path output_path(const std::filesystem::path& requested) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / requested.filename();
  }
  if (requested.has_parent_path()) std::filesystem::create_directories(requested.parent_path());
  return requested;
}

void print_support(const std::vector<Index>& support) {
  std::cout << "support:";
  for (Index k : support) std::cout << ' ' << k;
  std::cout << '\n';
}

int run_solve(const DataOptions& o, SolverConfig config, const std::string& solver,
              const std::string& radius, const std::string& out) {
  config.solver = parse_solver_kind(solver);
  config.radius_rule = parse_radius_rule(radius);
  config.mu_p = o.mu_p;
  config.seed = o.seed;
  config.blocks = o.blocks;
  const auto data = load_data(o);
  const ProblemSpec spec = scaled_problem(o, data);
  const SolveReport report = solve(spec, config);

  Index nonzeros = 0;
  for (Index k = 0; k < report.x_final.size(); ++k) nonzeros += report.x_final[k] != 0.0;
  const TraceRecord& last = report.trace.back();
  std::cout << "solver: " << solver_name(config.solver) << '\n'
            << "n: " << spec.n() << "  d: " << spec.d() << "  blocks: " << spec.blocks() << '\n'
            << "lambda: " << format_double(spec.lambda()) << '\n'
            << "eta: " << format_double(report.eta) << "  inner_m: " << report.inner_m
            << "  batch_size: " << report.batch_size << '\n'
            << "converged: " << (report.converged ? "yes" : "no") << '\n'
            << "outer_iters: " << report.outer_iters << '\n'
            << "objective: " << format_double(last.objective) << '\n'
            << "gap: " << format_double(last.gap) << '\n'
            << "active_blocks: " << last.active_blocks << "  active_features: " << last.active_features << '\n'
            << "nonzeros: " << nonzeros << '\n'
            << "coordinate_updates: " << report.coordinate_updates << '\n'
            << "wall_time_s: " << format_double(report.wall_time) << '\n';
  if (!out.empty()) {
    const auto path = output_path(out);
    write_trace_csv(path, report.trace);
    std::cout << "trace: " << path.string() << '\n';
  }
  return report.converged ? kOk : kSolveFailure;
}

int run_bench(const std::string& plan_path, const std::string& out) {
  ExperimentPlan plan = load_plan(plan_path);
  if (!out.empty()) plan.output_dir = out;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') plan.output_dir = dir;
  const ExperimentResult result = run_experiment(plan);
  write_summary_csv(std::cout, result.summary);
  std::cout << "summary: " << result.summary_path.string() << '\n';
  for (const auto& chart : result.charts) std::cout << "chart: " << chart.string() << '\n';
  for (const SummaryRow& row : result.summary)
    if (row.failures > 0) return kSolveFailure;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated doubly stochastic gradient solvers with safe screening"};
  app.require_subcommand(1);

  DataOptions solve_data;
  SolverConfig solve_config;
  std::string solver = "adsgd", radius = "dual", solve_out;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem and report the final state");
  add_data_options(solve_cmd, solve_data, true);
  solve_cmd->add_option("--solver", solver, "adsgd | asgd | mrbcd | proxsvrg | reference")->capture_default_str();
  solve_cmd->add_option("--batch-size", solve_config.batch_size, "mini-batch size |I|")->capture_default_str();
  solve_cmd->add_option("--inner-m", solve_config.inner_m, "base inner-loop length m (0: 2n)")->capture_default_str();
  auto* eta = solve_cmd->add_option("--eta", solve_config.eta, "step size (0: automatic)");
  auto* theory = solve_cmd->add_flag("--theory-mode", solve_config.theory_mode,
                                     "derive batch, step and inner length from the problem constants");
  eta->excludes(theory);
  solve_cmd->add_option("--strong-convexity", solve_config.strong_convexity, "strong convexity used by --theory-mode");
  solve_cmd->add_option("--gap-tol", solve_config.gap_tol, "duality-gap tolerance")->capture_default_str();
  solve_cmd->add_option("--max-outer", solve_config.max_outer, "outer-iteration cap")->capture_default_str();
  solve_cmd->add_option("--radius", radius, "safe-radius rule: dual | lipschitz")->capture_default_str();
  solve_cmd->add_option("--screen-every", solve_config.screen_every, "screen every s outer iterations");
  bool no_screening = false;
  solve_cmd->add_flag("--no-screening", no_screening, "disable safe screening");
  solve_cmd->add_option("--out", solve_out, "trace CSV path");

  DataOptions lmax_data;
  auto* lmax_cmd = app.add_subcommand("lambda-max", "print the smallest lambda with x = 0 optimal");
  add_data_options(lmax_cmd, lmax_data, false);

  std::string plan_path, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment plan (key = value file)");
  bench_cmd->add_option("plan", plan_path, "plan file")->required();
  bench_cmd->add_option("--out", bench_out, "output directory (overrides the plan)");

  DataOptions oracle_data;
  double oracle_tol = 1e-10;
  auto* oracle_cmd = app.add_subcommand("oracle", "high-accuracy reference solve; prints the support");
  add_data_options(oracle_cmd, oracle_data, true);
  oracle_cmd->add_option("--tol", oracle_tol, "duality-gap tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidArgument;
  }

  try {
    if (*solve_cmd) {
      solve_config.screening = !no_screening;
      return run_solve(solve_data, solve_config, solver, radius, solve_out);
    }
    if (*lmax_cmd) {
      const auto data = load_data(lmax_data);
      std::cout << format_double(lambda_max(base_problem(lmax_data, data))) << '\n';
      return kOk;
    }
    if (*bench_cmd) return run_bench(plan_path, bench_out);
    if (*oracle_cmd) {
      const auto data = load_data(oracle_data);
      const ProblemSpec spec = scaled_problem(oracle_data, data);
      const ReferenceResult ref = reference_solve(spec, oracle_tol);
      std::cout << "lambda: " << format_double(spec.lambda()) << '\n'
                << "objective: " << format_double(ref.objective) << '\n'
                << "gap: " << format_double(ref.gap) << '\n'
                << "support_size: " << ref.support.size() << '\n';
      print_support(ref.support);
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kInvalidArgument;
  } catch (const DegenerateProblem& e) {
    std::cerr << "degenerate problem: " << e.what() << '\n';
    return kDegenerate;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "solve failed: " << e.what() << " (best gap " << format_double(e.best_gap()) << ")\n";
    return kSolveFailure;
  } catch (const Diverged& e) {
    std::cerr << "solve failed: " << e.what() << '\n';
    return kSolveFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
