#pragma once

// Parameter sequences (Tikhonov beta_n, relaxation lambda_n, step gamma_n,
// averagedness alpha_n) with closed-form descriptors, and validators that
// decide the convergence hypotheses analytically per descriptor kind.
//
// Divergence and summability are never inferred from a finite prefix: a
// user table gets "undetermined" for every asymptotic condition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tkm/error.hpp"

namespace tkm {

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest decimal form that parses back to the same double.
inline std::string fmt_exact(double v) {
  char buf[64];
  for (int precision = 1; precision < 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return fmt_real(v);
}

inline std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

class Sequence {
 public:
  struct Constant {
    double value;
  };
  // limit - coeff / (shift + n)
  struct HarmonicApproach {
    double limit;
    double coeff;
    double shift = 1.0;
  };
  // center - amplitude * (-1)^n
  struct Oscillating {
    double center;
    double amplitude;
  };
  enum class Tail { hold_last, cycle };
  struct Table {
    std::vector<double> values;
    Tail tail = Tail::hold_last;
  };
  using Kind = std::variant<Constant, HarmonicApproach, Oscillating, Table>;

  Sequence(Kind kind, std::optional<double> first = std::nullopt) : kind_(std::move(kind)), first_(first) {
    if (const auto* h = std::get_if<HarmonicApproach>(&kind_); h && !(h->shift > 0.0))
      throw DomainError("harmonic-approach sequence needs shift > 0");
    if (const auto* t = std::get_if<Table>(&kind_); t && t->values.empty())
      throw DomainError("table sequence needs at least one value");
    if (first_ && !std::isfinite(*first_)) throw DomainError("sequence override must be finite");
  }

  static Sequence constant(double c) { return Sequence(Constant{c}); }
  static Sequence harmonic_approach(double limit, double coeff, double shift = 1.0,
                                    std::optional<double> first = std::nullopt) {
    return Sequence(HarmonicApproach{limit, coeff, shift}, first);
  }
  static Sequence oscillating(double center, double amplitude) { return Sequence(Oscillating{center, amplitude}); }
  static Sequence table(std::vector<double> values, Tail tail = Tail::hold_last) {
    return Sequence(Table{std::move(values), tail});
  }

  const Kind& kind() const { return kind_; }
  const std::optional<double>& first() const { return first_; }

  double operator()(std::size_t n) const {
    if (n == 0 && first_) return *first_;
    return std::visit(
        [n](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) {
            return k.value;
          } else if constexpr (std::is_same_v<K, HarmonicApproach>) {
            return k.limit - k.coeff / (k.shift + static_cast<double>(n));
          } else if constexpr (std::is_same_v<K, Oscillating>) {
            return n % 2 == 0 ? k.center - k.amplitude : k.center + k.amplitude;
          } else {
            if (n < k.values.size()) return k.values[n];
            return k.tail == Tail::hold_last ? k.values.back() : k.values[n % k.values.size()];
          }
        },
        kind_);
  }

  bool is_table() const { return std::holds_alternative<Table>(kind_); }

  std::string describe() const;

  friend bool operator==(const Sequence& a, const Sequence& b) {
    if (a.first_ != b.first_ || a.kind_.index() != b.kind_.index()) return false;
    return std::visit(
        [&b](const auto& ka) {
          using K = std::decay_t<decltype(ka)>;
          const auto& kb = std::get<K>(b.kind_);
          if constexpr (std::is_same_v<K, Constant>) return ka.value == kb.value;
          else if constexpr (std::is_same_v<K, HarmonicApproach>)
            return ka.limit == kb.limit && ka.coeff == kb.coeff && ka.shift == kb.shift;
          else if constexpr (std::is_same_v<K, Oscillating>)
            return ka.center == kb.center && ka.amplitude == kb.amplitude;
          else return ka.values == kb.values && ka.tail == kb.tail;
        },
        a.kind_);
  }

 private:
  Kind kind_;
  std::optional<double> first_;
};

inline double eval(const Sequence& seq, std::size_t n) { return seq(n); }

inline std::string Sequence::describe() const {
  using detail::fmt_short;
  std::string s = std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) {
          return "constant(" + fmt_short(k.value) + ")";
        } else if constexpr (std::is_same_v<K, HarmonicApproach>) {
          return fmt_short(k.limit) + " - " + fmt_short(k.coeff) + "/(" + fmt_short(k.shift) + "+n)";
        } else if constexpr (std::is_same_v<K, Oscillating>) {
          return fmt_short(k.center) + " - " + fmt_short(k.amplitude) + "*(-1)^n";
        } else {
          return "table[" + std::to_string(k.values.size()) + "]" +
                 (k.tail == Tail::hold_last ? " hold-last" : " cycle");
        }
      },
      kind_);
  if (first_) s += ", n=0 -> " + fmt_short(*first_);
  return s;
}

struct ScheduleSet {
  Sequence beta;
  Sequence lambda;
  std::optional<Sequence> gamma;
  std::optional<double> cocoercivity;
};

enum class Verdict { proved, violated, undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::proved: return "proved";
    case Verdict::violated: return "violated";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

struct ConditionResult {
  std::string group;  // theorem hypothesis label: "(i)", "(ii)", "(iii)", "(alpha)"
  std::string name;
  Verdict verdict = Verdict::undetermined;
  std::string witness;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;

  bool passed() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.verdict == Verdict::proved; });
  }

  const ConditionResult* first_failure() const {
    for (const auto& c : conditions)
      if (c.verdict != Verdict::proved) return &c;
    return nullptr;
  }

  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& c : conditions) {
      out += c.group + " " + c.name + ": " + to_string(c.verdict);
      if (!c.witness.empty()) out += " [" + c.witness + "]";
      out += "\n";
    }
    out += std::string("overall: ") + (passed() ? "pass" : "fail") + "\n";
    return out;
  }

  void append(const ValidationReport& other) {
    conditions.insert(conditions.end(), other.conditions.begin(), other.conditions.end());
  }
};

// ---------------------------------------------------------------------------
// Analytic facts about a single descriptor

namespace analysis {

// Searched when a bound violation needs a concrete witness index.
inline constexpr std::size_t kWitnessHorizon = 1'000'000;

struct Range {
  double inf;
  double sup;
  bool inf_attained;
  bool sup_attained;
};

inline Range merge(Range r, double v) {
  if (v < r.inf || (v == r.inf && !r.inf_attained)) {
    r.inf = v;
    r.inf_attained = true;
  }
  if (v > r.sup || (v == r.sup && !r.sup_attained)) {
    r.sup = v;
    r.sup_attained = true;
  }
  return r;
}

// Exact infimum and supremum over all n >= 0.
inline Range range(const Sequence& seq) {
  const std::size_t start = seq.first() ? 1 : 0;
  Range r = std::visit(
      [&](const auto& k) -> Range {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) {
          return {k.value, k.value, true, true};
        } else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) {
          const double v0 = seq(start);
          if (k.coeff > 0.0) return {v0, k.limit, true, false};
          if (k.coeff < 0.0) return {k.limit, v0, false, true};
          return {k.limit, k.limit, true, true};
        } else if constexpr (std::is_same_v<K, Sequence::Oscillating>) {
          const double a = k.center - k.amplitude, b = k.center + k.amplitude;
          return {std::min(a, b), std::max(a, b), true, true};
        } else {
          Range t{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), false, false};
          const std::size_t end = std::max(k.values.size(), start + 1);
          for (std::size_t n = start; n < end; ++n) t = merge(t, seq(n));
          return t;
        }
      },
      seq.kind());
  if (seq.first()) r = merge(r, *seq.first());
  return r;
}

inline std::optional<std::size_t> find_index(const Sequence& seq, const std::function<bool(double)>& bad) {
  for (std::size_t n = 0; n < kWitnessHorizon; ++n)
    if (bad(seq(n))) return n;
  return std::nullopt;
}

struct Bound {
  double value;
  bool strict;
};

// Checks lo (<|<=) x_n (<|<=) hi for every n.
inline ConditionResult bounded(const Sequence& seq, std::string group, std::string name, std::optional<Bound> lo,
                               std::optional<Bound> hi) {
  ConditionResult c{std::move(group), std::move(name), Verdict::proved, ""};
  const Range r = range(seq);
  const auto below = [&](double v) { return lo && (lo->strict ? !(v > lo->value) : !(v >= lo->value)); };
  const auto above = [&](double v) { return hi && (hi->strict ? !(v < hi->value) : !(v <= hi->value)); };
  // An unattained infimum equal to a strict lower bound is fine: every term
  // lies strictly above it.
  const bool lo_ok = !lo || (r.inf_attained ? !below(r.inf) : r.inf >= lo->value);
  const bool hi_ok = !hi || (r.sup_attained ? !above(r.sup) : r.sup <= hi->value);
  if (lo_ok && hi_ok) {
    c.witness = "range [" + detail::fmt_short(r.inf) + ", " + detail::fmt_short(r.sup) + "]";
    return c;
  }
  c.verdict = Verdict::violated;
  if (const auto n = find_index(seq, [&](double v) { return below(v) || above(v); }))
    c.witness = "n=" + std::to_string(*n) + " gives " + detail::fmt_short(seq(*n));
  else
    c.witness = "range [" + detail::fmt_short(r.inf) + ", " + detail::fmt_short(r.sup) + "]";
  return c;
}

inline ConditionResult converges_to(const Sequence& seq, double target, std::string group, std::string name) {
  ConditionResult c{std::move(group), std::move(name), Verdict::undetermined, ""};
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) {
          c.verdict = k.value == target ? Verdict::proved : Verdict::violated;
          c.witness = "constant " + detail::fmt_short(k.value);
        } else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) {
          c.verdict = k.limit == target ? Verdict::proved : Verdict::violated;
          c.witness = "limit " + detail::fmt_short(k.limit);
        } else if constexpr (std::is_same_v<K, Sequence::Oscillating>) {
          if (k.amplitude == 0.0) {
            c.verdict = k.center == target ? Verdict::proved : Verdict::violated;
            c.witness = "constant " + detail::fmt_short(k.center);
          } else {
            c.verdict = Verdict::violated;
            c.witness = "oscillates between " + detail::fmt_short(k.center - k.amplitude) + " and " +
                        detail::fmt_short(k.center + k.amplitude);
          }
        } else {
          c.witness = "table: limit unknown beyond horizon";
        }
      },
      seq.kind());
  return c;
}

inline ConditionResult liminf_positive(const Sequence& seq, std::string group, std::string name) {
  ConditionResult c{std::move(group), std::move(name), Verdict::undetermined, ""};
  std::optional<double> liminf;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) liminf = k.value;
        else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) liminf = k.limit;
        else if constexpr (std::is_same_v<K, Sequence::Oscillating>)
          liminf = std::min(k.center - k.amplitude, k.center + k.amplitude);
      },
      seq.kind());
  if (!liminf) {
    c.witness = "table: liminf unknown beyond horizon";
    return c;
  }
  c.verdict = *liminf > 0.0 ? Verdict::proved : Verdict::violated;
  c.witness = "liminf " + detail::fmt_short(*liminf);
  return c;
}

// sum_{n>=1} |x_n - x_{n-1}| < infinity.
inline ConditionResult variation_summable(const Sequence& seq, std::string group, std::string name) {
  ConditionResult c{std::move(group), std::move(name), Verdict::undetermined, ""};
  const double jump = seq.first() ? std::abs(seq(1) - seq(0)) : 0.0;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) {
          c.verdict = Verdict::proved;
          c.witness = "total variation " + detail::fmt_short(jump);
        } else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) {
          // Monotone tail telescopes to |coeff| / (shift + start).
          const double start = seq.first() ? 1.0 : 0.0;
          c.verdict = Verdict::proved;
          c.witness = "telescoping, total variation " + detail::fmt_short(jump + std::abs(k.coeff) / (k.shift + start));
        } else if constexpr (std::is_same_v<K, Sequence::Oscillating>) {
          if (k.amplitude == 0.0) {
            c.verdict = Verdict::proved;
            c.witness = "total variation " + detail::fmt_short(jump);
          } else {
            c.verdict = Verdict::violated;
            c.witness = "|x_n - x_{n-1}| = " + detail::fmt_short(2.0 * std::abs(k.amplitude)) + " for every n";
          }
        } else {
          c.witness = "table: tail variation not certifiable";
        }
      },
      seq.kind());
  return c;
}

// sum_{n>=0} (1 - x_n) = +infinity.
inline ConditionResult complement_sum_diverges(const Sequence& seq, std::string group, std::string name) {
  ConditionResult c{std::move(group), std::move(name), Verdict::undetermined, ""};
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) {
          c.verdict = k.value < 1.0 ? Verdict::proved : Verdict::violated;
          c.witness = "terms equal " + detail::fmt_short(1.0 - k.value);
        } else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) {
          if (k.limit < 1.0) {
            c.verdict = Verdict::proved;
            c.witness = "terms tend to " + detail::fmt_short(1.0 - k.limit);
          } else if (k.limit == 1.0 && k.coeff > 0.0) {
            c.verdict = Verdict::proved;
            c.witness = "harmonic tail " + detail::fmt_short(k.coeff) + "/(" + detail::fmt_short(k.shift) + "+n)";
          } else {
            c.verdict = Verdict::violated;
            c.witness = k.limit == 1.0 ? "terms " + detail::fmt_short(k.coeff) + "/(shift+n) are not positive"
                                       : "terms tend to " + detail::fmt_short(1.0 - k.limit);
          }
        } else if constexpr (std::is_same_v<K, Sequence::Oscillating>) {
          c.verdict = k.center < 1.0 ? Verdict::proved : Verdict::violated;
          c.witness = "mean term " + detail::fmt_short(1.0 - k.center);
        } else {
          c.witness = "table: divergence not certifiable from a finite prefix";
        }
      },
      seq.kind());
  return c;
}

// a_n + scale * b_n <= bound for all n.
inline ConditionResult coupled_upper_bound(const Sequence& a, const Sequence& b, double scale, double bound,
                                           std::string group, std::string name) {
  ConditionResult c{std::move(group), std::move(name), Verdict::undetermined, ""};
  const Range ra = range(a);
  const Range rb = range(b);
  const double sup_b = scale >= 0.0 ? rb.sup : rb.inf;
  const double sum_sup = ra.sup + scale * sup_b;
  if (sum_sup <= bound) {
    c.verdict = Verdict::proved;
    c.witness = "sup bound " + detail::fmt_short(sum_sup) + " <= " + detail::fmt_short(bound);
    return c;
  }
  for (std::size_t n = 0; n < kWitnessHorizon; ++n) {
    const double v = a(n) + scale * b(n);
    if (v > bound) {
      c.verdict = Verdict::violated;
      c.witness = "n=" + std::to_string(n) + " gives " + detail::fmt_short(v) + " > " + detail::fmt_short(bound);
      return c;
    }
  }
  c.witness = "no violation up to n=" + std::to_string(kWitnessHorizon) + ", tail not certified";
  return c;
}

}  // namespace analysis

// ---------------------------------------------------------------------------
// Validators

namespace detail {

inline void add_beta_conditions(ValidationReport& r, const Sequence& beta) {
  using analysis::Bound;
  r.conditions.push_back(analysis::bounded(beta, "(i)", "0 < beta_n <= 1", Bound{0.0, true}, Bound{1.0, false}));
  r.conditions.push_back(analysis::converges_to(beta, 1.0, "(i)", "beta_n -> 1"));
  r.conditions.push_back(analysis::complement_sum_diverges(beta, "(i)", "sum (1 - beta_n) = inf"));
  r.conditions.push_back(analysis::variation_summable(beta, "(i)", "sum |beta_n - beta_{n-1}| < inf"));
}

}  // namespace detail

// Hypotheses (i)-(ii) of the Tikhonov-regularized KM iteration for a family of
// nonexpansive operators.
inline ValidationReport validate_km(const Sequence& beta, const Sequence& lambda) {
  using analysis::Bound;
  ValidationReport r;
  detail::add_beta_conditions(r, beta);
  r.conditions.push_back(
      analysis::bounded(lambda, "(ii)", "0 < lambda_n <= 1", Bound{0.0, true}, Bound{1.0, false}));
  r.conditions.push_back(analysis::liminf_positive(lambda, "(ii)", "liminf lambda_n > 0"));
  r.conditions.push_back(analysis::variation_summable(lambda, "(ii)", "sum |lambda_n - lambda_{n-1}| < inf"));
  return r;
}

// Hypotheses for a family of alpha_n-averaged operators: the alpha conditions
// plus 0 < lambda_n <= 1 / alpha_n.
inline ValidationReport validate_averaged(const Sequence& alpha, const Sequence& beta, const Sequence& lambda) {
  using analysis::Bound;
  ValidationReport r;
  r.conditions.push_back(
      analysis::bounded(alpha, "(alpha)", "0 < alpha_n < 1", Bound{0.0, true}, Bound{1.0, true}));
  r.conditions.push_back(analysis::liminf_positive(alpha, "(alpha)", "liminf alpha_n > 0"));
  {
    // |1/a_n - 1/a_{n-1}| <= |a_n - a_{n-1}| / inf(a)^2 once alpha is bounded
    // away from 0, so summable variation of alpha carries over.
    auto c = analysis::variation_summable(alpha, "(alpha)", "sum |1/alpha_n - 1/alpha_{n-1}| < inf");
    if (c.verdict == Verdict::proved && !(analysis::range(alpha).inf > 0.0)) {
      c.verdict = Verdict::undetermined;
      c.witness = "alpha not bounded away from 0";
    }
    r.conditions.push_back(std::move(c));
  }
  detail::add_beta_conditions(r, beta);
  {
    ConditionResult c{"(ii)", "0 < lambda_n <= 1/alpha_n", Verdict::proved, ""};
    const auto lo = analysis::bounded(lambda, "(ii)", "", Bound{0.0, true}, std::nullopt);
    const auto ra = analysis::range(alpha);
    const auto rl = analysis::range(lambda);
    if (lo.verdict != Verdict::proved) {
      c.verdict = Verdict::violated;
      c.witness = lo.witness;
    } else if (ra.inf > 0.0 && rl.sup * ra.sup <= 1.0) {
      c.witness = "sup lambda * sup alpha = " + detail::fmt_short(rl.sup * ra.sup);
    } else {
      c.verdict = Verdict::undetermined;
      c.witness = "no violation found up to n=" + std::to_string(analysis::kWitnessHorizon);
      for (std::size_t n = 0; n < analysis::kWitnessHorizon; ++n) {
        if (lambda(n) * alpha(n) > 1.0) {
          c.verdict = Verdict::violated;
          c.witness = "n=" + std::to_string(n) + ": lambda_n * alpha_n = " + detail::fmt_short(lambda(n) * alpha(n));
          break;
        }
      }
    }
    r.conditions.push_back(std::move(c));
  }
  r.conditions.push_back(analysis::liminf_positive(lambda, "(ii)", "liminf lambda_n > 0"));
  r.conditions.push_back(analysis::variation_summable(lambda, "(ii)", "sum |lambda_n - lambda_{n-1}| < inf"));
  return r;
}

// Hypotheses (i)-(iii) of the variable-step forward-backward iteration with
// a beta_coc-cocoercive single-valued part.
inline ValidationReport validate_fb(const ScheduleSet& s, double cocoercivity) {
  using analysis::Bound;
  if (!(cocoercivity > 0.0)) throw DomainError("cocoercivity constant must be positive");
  if (!s.gamma) throw DomainError("forward-backward validation needs a step-size sequence");
  const Sequence& gamma = *s.gamma;
  ValidationReport r;
  detail::add_beta_conditions(r, s.beta);
  {
    // lambda_n <= (4b - gamma_n) / (2b)  <=>  lambda_n + gamma_n / (2b) <= 2
    auto lo = analysis::bounded(s.lambda, "(ii)", "", Bound{0.0, true}, std::nullopt);
    auto c = analysis::coupled_upper_bound(s.lambda, gamma, 1.0 / (2.0 * cocoercivity), 2.0, "(ii)",
                                           "0 < lambda_n <= (4b - gamma_n)/(2b)");
    if (lo.verdict != Verdict::proved) {
      c.verdict = Verdict::violated;
      c.witness = lo.witness;
    }
    r.conditions.push_back(std::move(c));
  }
  r.conditions.push_back(analysis::liminf_positive(s.lambda, "(ii)", "liminf lambda_n > 0"));
  r.conditions.push_back(analysis::variation_summable(s.lambda, "(ii)", "sum |lambda_n - lambda_{n-1}| < inf"));
  r.conditions.push_back(
      analysis::bounded(gamma, "(iii)", "0 < gamma_n < 2b", Bound{0.0, true}, Bound{2.0 * cocoercivity, true}));
  r.conditions.push_back(analysis::liminf_positive(gamma, "(iii)", "liminf gamma_n > 0"));
  r.conditions.push_back(analysis::variation_summable(gamma, "(iii)", "sum |gamma_n - gamma_{n-1}| < inf"));
  return r;
}

// alpha_n = 2b / (4b - gamma_n), the averagedness of J_{gA}(Id - gB).
inline double alpha_from_gamma(double gamma, double cocoercivity) {
  if (!(cocoercivity > 0.0)) throw DomainError("cocoercivity constant must be positive");
  if (!(gamma > 0.0 && gamma < 2.0 * cocoercivity)) throw DomainError("step size must lie in (0, 2 beta)");
  return 2.0 * cocoercivity / (4.0 * cocoercivity - gamma);
}

}  // namespace tkm
