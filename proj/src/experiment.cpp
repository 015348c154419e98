#include "adsgd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <cctype>
#include <sstream>
#include <tuple>

#include "adsgd/errors.hpp"
#include "adsgd/libsvm.hpp"
#include "adsgd/trace_io.hpp"

namespace adsgd {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T to_number(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

bool to_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw InvalidArgument("invalid boolean '" + std::string(text) + "'");
}

std::string ratio_tag(double ratio) { return format_double(ratio); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

ProblemSpec build_problem(const ExperimentPlan& plan, const std::shared_ptr<const Dataset>& data,
                          const SolverConfig& config, double ratio) {
  const Index q = std::clamp<Index>(config.blocks, 1, data->d());
  ProblemSpec base(data, BlockPartition::contiguous(data->d(), q), Loss(plan.model),
                   Regularizer(plan.regularizer), 1.0, config.mu_p);
  return base.with_lambda(ratio * lambda_max(base));
}

}  // namespace

void ExperimentPlan::validate() const {
  if (lambda_ratios.empty()) throw InvalidArgument("plan: lambda_ratios is empty");
  for (double r : lambda_ratios)
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("plan: lambda ratios must lie in (0, 1]");
  if (repetitions < 1) throw InvalidArgument("plan: repetitions must be >= 1");
  if (solvers.empty()) throw InvalidArgument("plan: no solvers");
}

SyntheticParams parse_synthetic_spec(std::string_view text) {
  const auto parts = split_list(text);
  if (parts.size() != 4 && parts.size() != 5)
    throw InvalidArgument("synthetic parameters must be n,d,sparsity,noise[,support]");
  SyntheticParams p;
  p.n = to_number<Index>(parts[0], "n");
  p.d = to_number<Index>(parts[1], "d");
  p.density = to_number<double>(parts[2], "sparsity");
  p.noise = to_number<double>(parts[3], "noise");
  p.support = parts.size() == 5 ? to_number<Index>(parts[4], "support") : std::min<Index>(10, p.d);
  if (p.n < 1 || p.d < 1) throw InvalidArgument("synthetic: n and d must be positive");
  if (!(p.density > 0.0 && p.density <= 1.0)) throw InvalidArgument("synthetic: sparsity must lie in (0, 1]");
  return p;
}

bool apply_solver_option(SolverConfig& c, std::string_view key, std::string_view value) {
  if (key == "batch_size") c.batch_size = to_number<Index>(value, key);
  else if (key == "blocks") c.blocks = to_number<Index>(value, key);
  else if (key == "inner_m") c.inner_m = to_number<Index>(value, key);
  else if (key == "eta") c.eta = to_number<double>(value, key);
  else if (key == "theory_mode") c.theory_mode = to_bool(value);
  else if (key == "strong_convexity") c.strong_convexity = to_number<double>(value, key);
  else if (key == "mu_p") c.mu_p = to_number<double>(value, key);
  else if (key == "gap_tol") c.gap_tol = to_number<double>(value, key);
  else if (key == "max_outer") c.max_outer = to_number<Index>(value, key);
  else if (key == "screening") c.screening = to_bool(value);
  else if (key == "screen_every") c.screen_every = to_number<Index>(value, key);
  else if (key == "radius") c.radius_rule = parse_radius_rule(value);
  else return false;
  return true;
}

ExperimentPlan parse_plan(std::istream& in) {
  ExperimentPlan plan;
  std::vector<SolverKind> kinds{SolverKind::ADSGD, SolverKind::MRBCD, SolverKind::ProxSVRG};
  std::vector<std::pair<std::string, std::string>> shared;
  std::vector<std::tuple<SolverKind, std::string, std::string, std::size_t>> overrides;
  SolverConfig probe;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("plan: expected key = value", line_no);
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    try {
      if (key == "data") {
        plan.data_path = value;
      } else if (key == "synthetic") {
        const SyntheticParams p = parse_synthetic_spec(value);
        plan.synthetic.n = p.n;
        plan.synthetic.d = p.d;
        plan.synthetic.density = p.density;
        plan.synthetic.noise = p.noise;
        plan.synthetic.support = p.support;
      } else if (key == "seed") {
        plan.seed = to_number<std::uint64_t>(value, key);
      } else if (key == "model") {
        plan.model = parse_loss_kind(value);
      } else if (key == "regularizer") {
        plan.regularizer = parse_regularizer_kind(value);
      } else if (key == "lambda_ratios") {
        plan.lambda_ratios.clear();
        for (auto part : split_list(value)) plan.lambda_ratios.push_back(to_number<double>(part, "lambda ratio"));
      } else if (key == "solvers") {
        kinds.clear();
        for (auto part : split_list(value)) kinds.push_back(parse_solver_kind(part));
      } else if (key == "repetitions") {
        plan.repetitions = to_number<Index>(value, key);
      } else if (key == "output") {
        plan.output_dir = value;
      } else if (key == "svg") {
        plan.svg = to_bool(value);
      } else if (const auto dot = key.find('.'); dot != std::string::npos) {
        const SolverKind kind = parse_solver_kind(std::string_view(key).substr(0, dot));
        const std::string option = key.substr(dot + 1);
        if (!apply_solver_option(probe, option, value)) throw InvalidArgument("unknown key '" + key + "'");
        overrides.emplace_back(kind, option, value, line_no);
      } else {
        if (!apply_solver_option(probe, key, value)) throw InvalidArgument("unknown key '" + key + "'");
        shared.emplace_back(key, value);
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("plan: ") + e.what(), line_no);
    }
  }

  for (SolverKind kind : kinds) {
    SolverConfig c;
    c.solver = kind;
    for (const auto& [k, v] : shared) apply_solver_option(c, k, v);
    for (const auto& [okind, k, v, ln] : overrides)
      if (okind == kind) apply_solver_option(c, k, v);
    plan.solvers.push_back(c);
  }
  plan.synthetic.seed = plan.seed;
  plan.synthetic.model = plan.model;
  try {
    plan.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line_no);
  }
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return parse_plan(in);
}

std::shared_ptr<const Dataset> plan_dataset(const ExperimentPlan& plan) {
  if (plan.data_path) return load_libsvm(*plan.data_path, plan.model);
  SyntheticParams p = plan.synthetic;
  p.model = plan.model;
  return generate_synthetic(p).data;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const auto data = plan_dataset(plan);
  std::filesystem::create_directories(plan.output_dir);

  std::vector<std::string> labels;
  for (std::size_t s = 0; s < plan.solvers.size(); ++s) {
    std::string label(solver_name(plan.solvers[s].solver));
    const auto seen = std::count_if(plan.solvers.begin(), plan.solvers.begin() + static_cast<std::ptrdiff_t>(s),
                                    [&](const SolverConfig& c) { return c.solver == plan.solvers[s].solver; });
    if (seen > 0) label += "_" + std::to_string(seen + 1);
    labels.push_back(label);
  }

  ExperimentResult result;
  for (double ratio : plan.lambda_ratios) {
    std::vector<ChartSeries> series;
    double best_objective = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < plan.solvers.size(); ++s) {
      for (Index rep = 0; rep < plan.repetitions; ++rep) {
        RunOutcome run;
        run.label = labels[s];
        run.lambda_ratio = ratio;
        run.repetition = rep;
        run.seed = plan.seed + static_cast<std::uint64_t>(rep);
        try {
          SolverConfig config = plan.solvers[s];
          config.seed = run.seed;
          const ProblemSpec spec = build_problem(plan, data, config, ratio);
          const SolveReport report = solve(spec, config);
          run.converged = report.converged;
          run.trace = report.trace;
          run.outer_iters = report.outer_iters;
          run.coordinate_updates = report.coordinate_updates;
          if (!report.trace.empty()) {
            run.time_s = report.trace.back().elapsed_s;
            run.final_gap = report.trace.back().gap;
          }
        } catch (const std::exception& e) {
          run.error = e.what();
          if (const auto* cf = dynamic_cast<const ConvergenceFailure*>(&e)) run.final_gap = cf->best_gap();
        }
        if (run.error.empty()) {
          run.trace_path = plan.output_dir / (run.label + "_lam" + ratio_tag(ratio) + "_rep" + std::to_string(rep) + ".csv");
          write_trace_csv(run.trace_path, run.trace);
          for (const TraceRecord& r : run.trace) best_objective = std::min(best_objective, r.objective);
          if (rep == 0) {
            ChartSeries line{run.label, {}, {}};
            for (const TraceRecord& r : run.trace) {
              line.x.push_back(r.elapsed_s);
              line.y.push_back(r.objective);
            }
            series.push_back(std::move(line));
          }
        }
        result.runs.push_back(std::move(run));
      }
    }

    if (plan.svg && !series.empty()) {
      double p_star = best_objective;
      try {
        const ProblemSpec spec = build_problem(plan, data, plan.solvers.front(), ratio);
        p_star = std::min(p_star, reference_solve(spec, 1e-10).objective);
      } catch (const std::exception&) {
        // Fall back to the best objective any run reached.
      }
      for (ChartSeries& line : series)
        for (double& v : line.y) v -= p_star;
      const auto path = plan.output_dir / ("chart_lam" + ratio_tag(ratio) + ".svg");
      std::ofstream out(path);
      if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
      out << render_svg_chart("lambda = " + ratio_tag(ratio) + " lambda_max", "elapsed (s)",
                              "P(x) - P*", series);
      result.charts.push_back(path);
    }
  }

  result.summary = summarize(result.runs);
  result.summary_path = plan.output_dir / "summary.csv";
  std::ofstream out(result.summary_path);
  if (!out) throw InvalidArgument("cannot write '" + result.summary_path.string() + "'");
  write_summary_csv(out, result.summary);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<RunOutcome>& runs) {
  std::vector<SummaryRow> rows;
  std::vector<double> time_sums;
  std::vector<double> update_sums;
  for (const RunOutcome& run : runs) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) {
      return r.label == run.label && r.lambda_ratio == run.lambda_ratio;
    });
    if (it == rows.end()) {
      rows.push_back({run.label, run.lambda_ratio, 0, 0, 0.0, 0.0, 0, {}});
      time_sums.push_back(0.0);
      update_sums.push_back(0.0);
      it = rows.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - rows.begin());
    ++it->runs;
    if (!run.error.empty()) {
      ++it->failures;
      if (it->first_error.empty()) it->first_error = run.error;
    } else if (run.converged) {
      ++it->converged;
      time_sums[k] += run.time_s;
      update_sums[k] += static_cast<double>(run.coordinate_updates);
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double count = static_cast<double>(rows[k].converged);
    rows[k].mean_time_s = rows[k].converged > 0 ? time_sums[k] / count : std::numeric_limits<double>::quiet_NaN();
    rows[k].mean_coordinate_updates =
        rows[k].converged > 0 ? update_sums[k] / count : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "solver,lambda_ratio,runs,converged,mean_time_s,mean_coordinate_updates,failures,first_error\n";
  for (const SummaryRow& r : rows) {
    std::string error = r.first_error;
    std::replace(error.begin(), error.end(), '"', '\'');
    out << r.label << ',' << format_double(r.lambda_ratio) << ',' << r.runs << ',' << r.converged << ','
        << format_double(r.mean_time_s) << ',' << format_double(r.mean_coordinate_updates) << ','
        << r.failures << ",\"" << error << "\"\n";
  }
}

std::string render_svg_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                             const std::vector<ChartSeries>& series) {
  constexpr double width = 720, height = 460, left = 80, right = 170, top = 40, bottom = 60;
  constexpr double floor_value = 1e-16;
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  double x_max = 0.0, y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const ChartSeries& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x_max = std::max(x_max, s.x[k]);
      const double ly = std::log10(std::max(s.y[k], floor_value));
      y_lo = std::min(y_lo, ly);
      y_hi = std::max(y_hi, ly);
    }
  }
  if (!(y_lo <= y_hi)) y_lo = y_hi = 0.0;
  y_lo = std::floor(y_lo);
  y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
  if (x_max <= 0.0) x_max = 1.0;

  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto px = [&](double x) { return left + plot_w * x / x_max; };
  auto py = [&](double ly) { return top + plot_h * (y_hi - ly) / (y_hi - y_lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = y_lo; e <= y_hi; e += 1.0) {
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(e) << "\" y2=\"" << py(e)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double x = x_max * k / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
        << format_double(std::round(x * 1e4) / 1e4) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % std::size(palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const ChartSeries& line = series[s];
    for (std::size_t k = 0; k < line.x.size() && k < line.y.size(); ++k) {
      if (!std::isfinite(line.x[k]) || !std::isfinite(line.y[k])) continue;
      svg << px(line.x[k]) << ',' << py(std::log10(std::max(line.y[k], floor_value))) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(s);
    svg << "<line x1=\"" << width - right + 12 << "\" x2=\"" << width - right + 36 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - right + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(line.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace adsgd
