#pragma once

// Iteration drivers for the Tikhonov-regularized Krasnosel'skii-Mann scheme
//
//   x_{n+1} = beta_n x_n + lambda_n (T_n(beta_n x_n) - beta_n x_n)
//
// and its specializations: families of averaged operators, and the
// variable-step forward-backward / proximal-gradient scheme
//
//   x_{n+1} = (1 - lambda_n) beta_n x_n
//             + lambda_n J_{gamma_n A}(beta_n x_n - gamma_n B(beta_n x_n)).
//
// Every driver records one trace row per iterate (the start included) and
// stops on the first rule that fires, checked after x_{n+1} is computed.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tkm/error.hpp"
#include "tkm/hilbert.hpp"
#include "tkm/operators.hpp"
#include "tkm/schedules.hpp"

namespace tkm {

enum class Termination { step_tolerance, residual_tolerance, max_iterations, wall_clock };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::step_tolerance: return "step-tolerance";
    case Termination::residual_tolerance: return "residual-tolerance";
    case Termination::max_iterations: return "max-iterations";
    case Termination::wall_clock: return "wall-clock";
  }
  return "?";
}

inline bool converged(Termination t) {
  return t == Termination::step_tolerance || t == Termination::residual_tolerance;
}

inline constexpr std::size_t kDefaultMaxIterations = 100'000;

// Rules compose as "first to fire". The residual rule thresholds the
// monitor function supplied in RunOptions.
struct StoppingRule {
  std::optional<double> step_tolerance;
  std::optional<double> residual_tolerance;
  std::size_t max_iterations = kDefaultMaxIterations;
  std::optional<double> wall_seconds;

  void validate() const {
    if (step_tolerance && !(*step_tolerance > 0.0)) throw DomainError("step tolerance must be positive");
    if (residual_tolerance && !(*residual_tolerance > 0.0))
      throw DomainError("residual tolerance must be positive");
    if (max_iterations < 1) throw DomainError("max iterations must be >= 1");
    if (wall_seconds && !(*wall_seconds > 0.0)) throw DomainError("wall-clock limit must be positive");
  }

  friend bool operator==(const StoppingRule&, const StoppingRule&) = default;
};

struct TraceRecord {
  std::size_t n = 0;
  double iterate_norm = 0.0;
  // ||x_n - x_{n-1}||, 0 for the starting point.
  double step_norm = 0.0;
  // ||x_n - T_n x_n|| (or ||x_n - R_n x_n|| for forward-backward runs).
  double fp_residual = 0.0;
  std::optional<double> monitor;
  double beta = 0.0;
  double lambda = 0.0;
  std::optional<double> gamma;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  Termination reason = Termination::max_iterations;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
};

template <class V>
struct IterationResult {
  V final;
  IterationTrace trace;
};

template <class V>
struct RunOptions {
  // Problem-specific value recorded per iterate (objective or feasibility
  // residual); also drives StoppingRule::residual_tolerance.
  std::function<double(const V&)> monitor;
  // Called with (n, x_n, x_{n+1}) after every step.
  std::function<void(std::size_t, const V&, const V&)> observer;
  // Run even when the schedules fail validation; the failure is recorded as
  // a warning in the trace.
  bool force = false;
  double divergence_factor = 1e6;
};

namespace detail {

struct StepParameters {
  double beta;
  double lambda;
  std::optional<double> gamma;
};

inline void enforce(const ValidationReport& report, bool force, IterationTrace& trace, const char* driver) {
  if (report.passed()) return;
  const auto* failure = report.first_failure();
  std::string msg = std::string(driver) + ": schedule condition " + failure->group + " " + failure->name + " is " +
                    to_string(failure->verdict);
  if (!failure->witness.empty()) msg += " (" + failure->witness + ")";
  if (!force) throw ScheduleError(msg);
  trace.warnings.push_back("forced: " + msg);
}

template <HilbertVector V>
IterationResult<V> run_recursion(const V& x0, const std::function<V(std::size_t, const V&)>& step,
                                 const std::function<double(std::size_t, const V&)>& fp_residual,
                                 const std::function<StepParameters(std::size_t)>& params, const StoppingRule& stop,
                                 const RunOptions<V>& opts, IterationTrace trace) {
  stop.validate();
  if (stop.residual_tolerance && !opts.monitor)
    throw DomainError("residual stopping rule needs a monitor function");
  const auto started = std::chrono::steady_clock::now();
  const double x0_norm = norm(x0);
  const double guard = opts.divergence_factor * (1.0 + x0_norm);

  const auto record = [&](std::size_t n, const V& x, double step_norm) {
    const auto p = params(n);
    TraceRecord r;
    r.n = n;
    r.iterate_norm = norm(x);
    r.step_norm = step_norm;
    r.fp_residual = fp_residual(n, x);
    if (opts.monitor) r.monitor = opts.monitor(x);
    r.beta = p.beta;
    r.lambda = p.lambda;
    r.gamma = p.gamma;
    trace.records.push_back(r);
  };

  V x = x0;
  record(0, x, 0.0);
  for (std::size_t n = 0;; ++n) {
    std::optional<V> next;
    try {
      next.emplace(step(n, x));
    } catch (const NonFiniteValue&) {
      throw DivergenceError("non-finite iterate at n=" + std::to_string(n + 1));
    }
    const double step_norm = norm(combine(1.0, *next, -1.0, x));
    const double next_norm = norm(*next);
    if (!std::isfinite(next_norm) || next_norm > guard)
      throw DivergenceError("iterate norm " + detail::fmt_short(next_norm) + " exceeds divergence guard at n=" +
                            std::to_string(n + 1));
    if (opts.observer) opts.observer(n, x, *next);
    x = std::move(*next);
    record(n + 1, x, step_norm);

    const auto& last = trace.records.back();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::optional<Termination> reason;
    if (stop.step_tolerance && step_norm <= *stop.step_tolerance) reason = Termination::step_tolerance;
    else if (stop.residual_tolerance && *last.monitor <= *stop.residual_tolerance)
      reason = Termination::residual_tolerance;
    else if (n + 1 >= stop.max_iterations) reason = Termination::max_iterations;
    else if (stop.wall_seconds && elapsed >= *stop.wall_seconds) reason = Termination::wall_clock;
    if (reason) {
      trace.reason = *reason;
      trace.wall_seconds = elapsed;
      return {std::move(x), std::move(trace)};
    }
  }
}

}  // namespace detail

// Tikhonov-regularized KM iteration for a family of nonexpansive operators.
template <HilbertVector V>
IterationResult<V> km_tikhonov_family(const OperatorFamily<V>& family, const Sequence& beta, const Sequence& lambda,
                                      const V& x0, const StoppingRule& stop, const RunOptions<V>& opts = {}) {
  IterationTrace trace;
  detail::enforce(validate_km(beta, lambda), opts.force, trace, "km_tikhonov_family");
  return detail::run_recursion<V>(
      x0,
      [&](std::size_t n, const V& x) {
        const V shrunk = combine(beta(n), x, 0.0, x);
        const double l = lambda(n);
        return combine(1.0 - l, shrunk, l, family(n, shrunk));
      },
      [&](std::size_t n, const V& x) { return fixed_point_residual(family, n, x); },
      [&](std::size_t n) { return detail::StepParameters{beta(n), lambda(n), std::nullopt}; }, stop, opts,
      std::move(trace));
}

// Same recursion for a family of alpha_n-averaged operators R_n, which admits
// relaxation up to lambda_n <= 1 / alpha_n.
template <HilbertVector V>
IterationResult<V> km_tikhonov_averaged(const OperatorFamily<V>& family, const Sequence& alpha, const Sequence& beta,
                                        const Sequence& lambda, const V& x0, const StoppingRule& stop,
                                        const RunOptions<V>& opts = {}) {
  IterationTrace trace;
  detail::enforce(validate_averaged(alpha, beta, lambda), opts.force, trace, "km_tikhonov_averaged");
  return detail::run_recursion<V>(
      x0,
      [&](std::size_t n, const V& x) {
        const double l = lambda(n);
        const double a = alpha(n);
        if (!(l > 0.0) || l * a > 1.0 + 1e-12) {
          if (!opts.force)
            throw ScheduleError("km_tikhonov_averaged: lambda_n = " + detail::fmt_short(l) +
                                " exceeds 1/alpha_n = " + detail::fmt_short(1.0 / a) + " at n=" + std::to_string(n));
        }
        const V shrunk = combine(beta(n), x, 0.0, x);
        return combine(1.0 - l, shrunk, l, family(n, shrunk));
      },
      [&](std::size_t n, const V& x) { return fixed_point_residual(family, n, x); },
      [&](std::size_t n) { return detail::StepParameters{beta(n), lambda(n), std::nullopt}; }, stop, opts,
      std::move(trace));
}

// Variable-step forward-backward iteration for 0 in Ax + Bx, B cocoercive.
// Converges strongly to the minimum-norm zero of A + B.
template <HilbertVector V>
IterationResult<V> forward_backward_var(const Resolvent<V>& resolvent, const Operator<V>& b, const Sequence& gamma,
                                        const Sequence& beta, const Sequence& lambda, const V& x0,
                                        const StoppingRule& stop, const RunOptions<V>& opts = {}) {
  IterationTrace trace;
  const double coc = b.cocoercivity();
  detail::enforce(validate_fb(ScheduleSet{beta, lambda, gamma, coc}, coc), opts.force, trace,
                  "forward_backward_var");
  return detail::run_recursion<V>(
      x0,
      [&](std::size_t n, const V& x) {
        const double g = gamma(n);
        const double l = lambda(n);
        const V shrunk = combine(beta(n), x, 0.0, x);
        const V backward = resolvent(combine(1.0, shrunk, -g, b(shrunk)), g);
        return combine(1.0 - l, shrunk, l, backward);
      },
      [&](std::size_t n, const V& x) {
        const double g = gamma(n);
        return norm(combine(1.0, x, -1.0, resolvent(combine(1.0, x, -g, b(x)), g)));
      },
      [&](std::size_t n) { return detail::StepParameters{beta(n), lambda(n), gamma(n)}; }, stop, opts,
      std::move(trace));
}

// Proximal-gradient form: resolvent = prox_{gamma f}, B = grad g. Converges
// strongly to the minimum-norm minimizer of f + g.
template <HilbertVector V>
IterationResult<V> proximal_gradient_var(const Resolvent<V>& prox, const Operator<V>& grad, const Sequence& gamma,
                                         const Sequence& beta, const Sequence& lambda, const V& x0,
                                         const StoppingRule& stop, const RunOptions<V>& opts = {}) {
  return forward_backward_var(prox, grad, gamma, beta, lambda, x0, stop, opts);
}

struct TraceSummary {
  std::size_t iterations = 0;
  double final_iterate_norm = 0.0;
  double final_step_norm = 0.0;
  double final_fp_residual = 0.0;
  std::optional<double> final_monitor;
  Termination reason = Termination::max_iterations;
  double wall_seconds = 0.0;
  std::vector<double> residual_series;
};

inline TraceSummary trace_summary(const IterationTrace& trace) {
  if (trace.records.empty()) throw DomainError("trace_summary needs a nonempty trace");
  const auto& last = trace.records.back();
  TraceSummary s;
  s.iterations = trace.iterations();
  s.final_iterate_norm = last.iterate_norm;
  s.final_step_norm = last.step_norm;
  s.final_fp_residual = last.fp_residual;
  s.final_monitor = last.monitor;
  s.reason = trace.reason;
  s.wall_seconds = trace.wall_seconds;
  s.residual_series.reserve(trace.records.size());
  for (const auto& r : trace.records) s.residual_series.push_back(r.fp_residual);
  return s;
}

}  // namespace tkm
