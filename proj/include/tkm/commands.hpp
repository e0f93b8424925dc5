#pragma once

// Subcommands behind the tkm executable. Each returns the process exit code:
// 0 converged (or all conditions proved), 2 stopped by the iteration or
// wall-clock cap, 1 configuration / validation / runtime error.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tkm/config.hpp"
#include "tkm/error.hpp"
#include "tkm/iteration.hpp"
#include "tkm/problems.hpp"
#include "tkm/schedules.hpp"
#include "tkm/trace_io.hpp"

namespace tkm {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCapped = 2;

// Command-line flags; when set they override the configuration file.
struct CommandOptions {
  std::optional<std::string> out_dir;
  bool force = false;
  std::optional<std::size_t> grid_n;
  std::optional<std::size_t> workers;
};

inline void apply_overrides(RunConfig& c, const CommandOptions& o) {
  if (o.out_dir) c.output_dir = *o.out_dir;
  if (o.force) c.force = true;
  if (o.grid_n) {
    if (*o.grid_n < 2) throw ConfigError("--grid-n must be >= 2");
    c.grid_n = *o.grid_n;
  }
  if (o.workers) {
    if (*o.workers < 1) throw ConfigError("--workers must be >= 1");
    c.workers = *o.workers;
  }
}

// Cocoercivity constant of the forward operator of a forward-backward problem.
inline double problem_cocoercivity(const RunConfig& c) {
  switch (c.kind) {
    case ProblemKind::reconstruction:
      return c.mode == ReconstructionMode::full_gradient ? 1.0 / (c.weight / 2.0 + 1.0) : 2.0 / c.weight;
    case ProblemKind::sfp: return 1.0;
    case ProblemKind::custom_finite_dim: return 1.0;
  }
  return 1.0;
}

inline ValidationReport validate_config(const RunConfig& c) {
  if (!c.uses_forward_backward()) return validate_km(c.beta, c.lambda);
  const double coc = problem_cocoercivity(c);
  return validate_fb(ScheduleSet{c.beta, c.lambda, c.gamma, coc}, coc);
}

inline FiniteDimProblem finite_problem(const RunConfig& c) {
  return FiniteDimProblem{c.finite_kind, c.finite_start, c.target, c.normal, c.offset, c.lower, c.upper};
}

struct RunOutcome {
  IterationTrace trace;
  std::vector<double> final_values;
};

// Runs the configured problem. Schedule validation is enforced unless
// c.force, in which case failures become trace warnings.
inline RunOutcome execute(const RunConfig& c) {
  const auto pack = [](IterationResult<Element>&& r) {
    const auto v = r.final.values();
    return RunOutcome{std::move(r.trace), std::vector<double>(v.begin(), v.end())};
  };
  switch (c.kind) {
    case ProblemKind::reconstruction: {
      const auto setup =
          build_reconstruction(ReconstructionProblem{c.weight, c.data, c.grid_n, c.mode}, unit_interval_space(c.grid_n));
      RunOptions<Element> opts;
      opts.monitor = setup.objective;
      opts.force = c.force;
      return pack(proximal_gradient_var(setup.prox, setup.grad, *c.gamma, c.beta, c.lambda,
                                        sample_catalog_function(c.start, setup.space), c.stop, opts));
    }
    case ProblemKind::sfp: {
      const auto setup = build_sfp(SfpProblem{c.grid_n, c.start});
      RunOptions<Element> opts;
      opts.monitor = setup.feasibility;
      opts.force = c.force;
      return pack(
          proximal_gradient_var(setup.projection, setup.grad, *c.gamma, c.beta, c.lambda, setup.start, c.stop, opts));
    }
    case ProblemKind::custom_finite_dim: {
      const auto setup = build_finite_dim(finite_problem(c));
      RunOptions<Element> opts;
      opts.force = c.force;
      if (setup.family) return pack(km_tikhonov_family(*setup.family, c.beta, c.lambda, setup.start, c.stop, opts));
      return pack(
          forward_backward_var(*setup.resolvent, *setup.forward, *c.gamma, c.beta, c.lambda, setup.start, c.stop, opts));
    }
  }
  throw ConfigError("unknown problem kind");
}

namespace cmd_detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

// Loads, applies overrides and checks the schedules. Returns nullopt after
// reporting when the command must stop with exit 1.
inline std::optional<RunConfig> load_checked(const std::string& path, const CommandOptions& o, std::ostream& err) {
  RunConfig c;
  try {
    c = load_config(path);
    apply_overrides(c, o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  const auto report = validate_config(c);
  if (!report.passed()) {
    const auto* f = report.first_failure();
    const std::string msg = "schedule condition " + f->group + " " + f->name + " is " + to_string(f->verdict) +
                            (f->witness.empty() ? "" : " (" + f->witness + ")");
    // Forced runs report the failure through the trace warnings.
    if (!c.force) {
      err << "error: " << msg << "\n" << report.to_text();
      return std::nullopt;
    }
  }
  return c;
}

}  // namespace cmd_detail

inline int cmd_run(const std::string& config_path, const CommandOptions& o, std::ostream& out, std::ostream& err) {
  const auto c = cmd_detail::load_checked(config_path, o, err);
  if (!c) return kExitError;
  try {
    const auto outcome = execute(*c);
    const auto summary = trace_summary(outcome.trace);
    const auto dir = cmd_detail::prepare_dir(c->output_dir);
    {
      std::ofstream csv(dir / "trace.csv");
      if (!csv) throw Error("cannot write trace.csv");
      write_trace_csv(csv, outcome.trace);
    }
    cmd_detail::write_file(dir / "summary.json", summary_json(summary, outcome.trace.warnings).dump(2) + "\n");
    for (const auto& w : outcome.trace.warnings) err << "warning: " << w << "\n";
    out << "problem: " << to_string(c->kind) << "\n" << summary_text(summary);
    return converged(summary.reason) ? kExitConverged : kExitCapped;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

inline int cmd_validate(const std::string& config_path, const CommandOptions& o, std::ostream& out,
                        std::ostream& err) {
  RunConfig c;
  try {
    c = load_config(config_path);
    apply_overrides(c, o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  const auto report = validate_config(c);
  out << report.to_text();
  return report.passed() ? kExitConverged : kExitError;
}

inline int cmd_oracle(const std::string& config_path, const CommandOptions& o, std::ostream& out, std::ostream& err) {
  try {
    auto c = load_config(config_path);
    apply_overrides(c, o);
    std::optional<OracleSolution> sol;
    if (c.kind == ProblemKind::reconstruction)
      sol = oracle_reconstruction(ReconstructionProblem{c.weight, c.data, c.grid_n, c.mode});
    else if (c.kind == ProblemKind::sfp)
      sol = oracle_sfp_min_norm(sfp_space(c.grid_n));
    else
      throw ConfigError(std::string("oracle: unsupported problem kind ") + to_string(c.kind));
    const auto dir = cmd_detail::prepare_dir(c.output_dir);
    std::ofstream csv(dir / "oracle.csv");
    if (!csv) throw Error("cannot write oracle.csv");
    csv << "t,value\n";
    const auto nodes = sol->minimizer.space()->grid()->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      csv << detail::fmt_real(nodes[i]) << ',' << detail::fmt_real(sol->minimizer[i]) << "\n";
    out << "problem: " << to_string(c.kind) << "\n"
        << "method: " << sol->method << "\n"
        << "norm: " << detail::fmt_real(norm(sol->minimizer)) << "\n"
        << "residual: " << detail::fmt_real(sol->residual) << "\n";
    return kExitConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

enum class SweepDimension { starting_points, schedules, both };

struct SweepRow {
  std::string start;
  std::string gamma;
  std::string lambda;
  std::optional<TraceSummary> summary;
  std::string error;
};

// Expands a sweep into its sub-configurations, in output order: starts
// outermost, then gamma, then lambda.
inline std::vector<RunConfig> expand_sweep(const RunConfig& base, SweepDimension dim) {
  if (base.kind == ProblemKind::custom_finite_dim && !base.sweep_starts.empty())
    throw ConfigError("sweep.starts needs a function-space problem");
  const bool vary_starts = dim != SweepDimension::schedules;
  const bool vary_schedules = dim != SweepDimension::starting_points;
  std::vector<std::string> starts{base.start};
  if (vary_starts && !base.sweep_starts.empty()) starts = base.sweep_starts;
  std::vector<std::optional<Sequence>> gammas{base.gamma};
  if (vary_schedules && !base.sweep_gamma.empty()) gammas.assign(base.sweep_gamma.begin(), base.sweep_gamma.end());
  std::vector<Sequence> lambdas{base.lambda};
  if (vary_schedules && !base.sweep_lambda.empty()) lambdas = base.sweep_lambda;
  std::vector<RunConfig> out;
  for (const auto& s : starts)
    for (const auto& g : gammas)
      for (const auto& l : lambdas) {
        RunConfig c = base;
        c.start = s;
        c.gamma = g;
        c.lambda = l;
        c.sweep_starts.clear();
        c.sweep_gamma.clear();
        c.sweep_lambda.clear();
        out.push_back(std::move(c));
      }
  return out;
}

inline std::vector<SweepRow> run_sweep(const std::vector<RunConfig>& runs, std::size_t workers) {
  std::vector<SweepRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto& c = runs[i];
      auto& row = rows[i];
      row.start = c.kind == ProblemKind::custom_finite_dim ? config_detail::join_reals(c.finite_start) : c.start;
      row.gamma = c.gamma ? format_sequence(*c.gamma) : "";
      row.lambda = format_sequence(c.lambda);
      try {
        row.summary = trace_summary(execute(c).trace);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline int cmd_sweep(const std::string& config_path, SweepDimension dim, const CommandOptions& o, std::ostream& out,
                     std::ostream& err) {
  RunConfig base;
  std::vector<RunConfig> runs;
  try {
    base = load_config(config_path);
    apply_overrides(base, o);
    runs = expand_sweep(base, dim);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  // Every sub-run is checked before any starts.
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto report = validate_config(runs[i]);
    if (report.passed()) continue;
    const auto* f = report.first_failure();
    const std::string msg = "run " + std::to_string(i + 1) + ": schedule condition " + f->group + " " + f->name +
                            " is " + to_string(f->verdict);
    if (!base.force) {
      err << "error: " << msg << "\n";
      return kExitError;
    }
    err << "warning: forced, " << msg << "\n";
  }

  const auto rows = run_sweep(runs, base.workers);
  std::ostringstream table;
  table << "start,gamma,lambda,iterations,termination,final_feasibility_or_objective,final_fp_residual,wall_seconds\n";
  bool all_converged = true;
  bool any_error = false;
  for (const auto& r : rows) {
    table << '"' << r.start << "\",\"" << r.gamma << "\",\"" << r.lambda << "\",";
    if (r.summary) {
      const auto& s = *r.summary;
      table << s.iterations << ',' << to_string(s.reason) << ','
            << (s.final_monitor ? detail::fmt_real(*s.final_monitor) : "") << ','
            << detail::fmt_real(s.final_fp_residual) << ',' << detail::fmt_real(s.wall_seconds) << "\n";
      all_converged = all_converged && converged(s.reason);
    } else {
      table << ",error,,,\n";
      err << "error: " << r.start << ": " << r.error << "\n";
      any_error = true;
    }
  }
  try {
    const auto dir = cmd_detail::prepare_dir(base.output_dir);
    cmd_detail::write_file(dir / "sweep.csv", table.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  out << table.str();
  if (any_error) return kExitError;
  return all_converged ? kExitConverged : kExitCapped;
}

}  // namespace tkm
