#pragma once

// Run configuration: flat "key = value" text with dotted section prefixes.
//
//   problem.kind = sfp
//   problem.start = t^2
//   grid.n = 4096
//   schedules.beta.kind = harmonic-approach
//   schedules.beta.limit = 1
//   schedules.beta.coeff = 1
//   schedules.beta.first = 0.25
//   schedules.lambda.kind = constant
//   schedules.lambda.value = 0.4
//   schedules.gamma.kind = constant
//   schedules.gamma.value = 0.5
//   stop.residual_tol = 1e-3
//   sweep.gamma = kind=constant value=0.5; kind=harmonic-approach limit=1 coeff=0.5
//
// Blank lines and '#' comments are ignored; unknown keys are rejected.

#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tkm/error.hpp"
#include "tkm/iteration.hpp"
#include "tkm/problems.hpp"
#include "tkm/schedules.hpp"

namespace tkm {

enum class ProblemKind { reconstruction, sfp, custom_finite_dim };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::reconstruction: return "reconstruction";
    case ProblemKind::sfp: return "sfp";
    case ProblemKind::custom_finite_dim: return "custom-finite-dim";
  }
  return "?";
}

struct RunConfig {
  ProblemKind kind = ProblemKind::sfp;
  // Catalog name of the starting function (function-space problems).
  std::string start = "t";
  double weight = 1.0;
  std::string data = "x";
  ReconstructionMode mode = ReconstructionMode::prox_gradient;
  FiniteDimKind finite_kind = FiniteDimKind::identity;
  std::vector<double> finite_start;
  std::vector<double> target;
  std::vector<double> normal;
  double offset = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t grid_n = kDefaultGridNodes;
  Sequence beta = Sequence::constant(1.0);
  Sequence lambda = Sequence::constant(1.0);
  std::optional<Sequence> gamma;
  StoppingRule stop;
  std::string output_dir = ".";
  bool force = false;
  std::size_t workers = 1;

  std::vector<std::string> sweep_starts;
  std::vector<Sequence> sweep_gamma;
  std::vector<Sequence> sweep_lambda;

  bool uses_forward_backward() const {
    return kind != ProblemKind::custom_finite_dim || finite_kind == FiniteDimKind::box;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ConfigError("'" + key + "': expected a real number, got '" + v + "'");
  return x;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || x < 0)
    throw ConfigError("'" + key + "': expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError("'" + key + "': expected a comma-separated list of reals");
  return out;
}

inline std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + detail::fmt_exact(v[i]);
  return s;
}

}  // namespace config_detail

// Builds a descriptor from its fields (kind, value, limit, coeff, shift,
// center, amplitude, values, tail, first). `where` prefixes error messages.
inline Sequence sequence_from_fields(const std::map<std::string, std::string>& f, const std::string& where) {
  using namespace config_detail;
  const auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = f.find(k);
    if (it == f.end()) return std::nullopt;
    return it->second;
  };
  const auto need = [&](const std::string& k) {
    const auto v = get(k);
    if (!v) throw ConfigError(where + ": missing field '" + k + "'");
    return *v;
  };
  const auto kind = need("kind");
  std::set<std::string> allowed{"kind", "first"};
  std::optional<double> first;
  if (const auto v = get("first")) first = parse_real(where + ".first", *v);
  std::optional<Sequence> seq;
  if (kind == "constant") {
    allowed.insert("value");
    seq = Sequence(Sequence::Constant{parse_real(where + ".value", need("value"))}, first);
  } else if (kind == "harmonic-approach") {
    allowed.insert({"limit", "coeff", "shift"});
    const double shift = get("shift") ? parse_real(where + ".shift", *get("shift")) : 1.0;
    try {
      seq = Sequence(Sequence::HarmonicApproach{parse_real(where + ".limit", need("limit")),
                                                parse_real(where + ".coeff", need("coeff")), shift},
                     first);
    } catch (const DomainError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else if (kind == "oscillating") {
    allowed.insert({"center", "amplitude"});
    seq = Sequence(Sequence::Oscillating{parse_real(where + ".center", need("center")),
                                         parse_real(where + ".amplitude", need("amplitude"))},
                   first);
  } else if (kind == "table") {
    allowed.insert({"values", "tail"});
    Sequence::Tail tail = Sequence::Tail::hold_last;
    if (const auto t = get("tail")) {
      if (*t == "cycle") tail = Sequence::Tail::cycle;
      else if (*t != "hold-last") throw ConfigError(where + ".tail: expected hold-last or cycle");
    }
    seq = Sequence(Sequence::Table{parse_reals(where + ".values", need("values")), tail}, first);
  } else {
    throw ConfigError(where + ": unknown sequence kind '" + kind + "'");
  }
  for (const auto& [k, v] : f)
    if (!allowed.contains(k)) throw ConfigError(where + ": field '" + k + "' does not apply to kind " + kind);
  return *seq;
}

inline std::map<std::string, std::string> sequence_fields(const Sequence& s) {
  const auto fmt_real = detail::fmt_exact;
  std::map<std::string, std::string> f;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sequence::Constant>) {
          f["kind"] = "constant";
          f["value"] = fmt_real(k.value);
        } else if constexpr (std::is_same_v<K, Sequence::HarmonicApproach>) {
          f["kind"] = "harmonic-approach";
          f["limit"] = fmt_real(k.limit);
          f["coeff"] = fmt_real(k.coeff);
          f["shift"] = fmt_real(k.shift);
        } else if constexpr (std::is_same_v<K, Sequence::Oscillating>) {
          f["kind"] = "oscillating";
          f["center"] = fmt_real(k.center);
          f["amplitude"] = fmt_real(k.amplitude);
        } else {
          f["kind"] = "table";
          f["values"] = config_detail::join_reals(k.values);
          f["tail"] = k.tail == Sequence::Tail::cycle ? "cycle" : "hold-last";
        }
      },
      s.kind());
  if (s.first()) f["first"] = fmt_real(*s.first());
  return f;
}

// Inline form: "kind=harmonic-approach limit=1 coeff=0.5".
inline Sequence parse_sequence(const std::string& text, const std::string& where = "sequence") {
  std::map<std::string, std::string> f;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(where + ": expected key=value, got '" + token + "'");
    const auto key = token.substr(0, eq);
    if (f.contains(key)) throw ConfigError(where + ": duplicate field '" + key + "'");
    f[key] = token.substr(eq + 1);
  }
  return sequence_from_fields(f, where);
}

inline std::string format_sequence(const Sequence& s) {
  const auto f = sequence_fields(s);
  std::string out = "kind=" + f.at("kind");
  for (const auto& [k, v] : f)
    if (k != "kind") out += " " + k + "=" + v;
  return out;
}

inline std::vector<Sequence> parse_sequence_list(const std::string& text, const std::string& where) {
  std::vector<Sequence> out;
  for (const auto& item : config_detail::split(text, ';')) out.push_back(parse_sequence(item, where));
  if (out.empty()) throw ConfigError(where + ": expected at least one sequence");
  return out;
}

inline RunConfig parse_config(const std::string& text) {
  using namespace config_detail;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.contains(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  if (kv.empty()) throw ConfigError("configuration is empty");

  RunConfig c;
  std::set<std::string> used;
  const auto take = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    used.insert(k);
    return it->second;
  };
  const auto need = [&](const std::string& k) {
    const auto v = take(k);
    if (!v) throw ConfigError("missing required key '" + k + "'");
    return *v;
  };
  const auto sequence = [&](const std::string& name) -> std::optional<Sequence> {
    const std::string prefix = "schedules." + name + ".";
    std::map<std::string, std::string> fields;
    for (const auto& [k, v] : kv)
      if (k.rfind(prefix, 0) == 0) {
        fields[k.substr(prefix.size())] = v;
        used.insert(k);
      }
    if (const auto inline_form = take("schedules." + name)) {
      if (!fields.empty()) throw ConfigError("schedules." + name + " given both inline and as fields");
      return parse_sequence(*inline_form, "schedules." + name);
    }
    if (fields.empty()) return std::nullopt;
    return sequence_from_fields(fields, "schedules." + name);
  };

  const auto kind = need("problem.kind");
  if (kind == "reconstruction") c.kind = ProblemKind::reconstruction;
  else if (kind == "sfp") c.kind = ProblemKind::sfp;
  else if (kind == "custom-finite-dim") c.kind = ProblemKind::custom_finite_dim;
  else throw ConfigError("problem.kind: unknown problem kind '" + kind + "'");

  if (c.kind == ProblemKind::custom_finite_dim) {
    const auto op = need("problem.operator");
    if (op == "identity") c.finite_kind = FiniteDimKind::identity;
    else if (op == "constant") c.finite_kind = FiniteDimKind::constant;
    else if (op == "hyperplane") c.finite_kind = FiniteDimKind::hyperplane;
    else if (op == "box") c.finite_kind = FiniteDimKind::box;
    else throw ConfigError("problem.operator: unknown operator '" + op + "'");
    c.finite_start = parse_reals("problem.start", need("problem.start"));
    if (const auto v = take("problem.target")) c.target = parse_reals("problem.target", *v);
    if (const auto v = take("problem.normal")) c.normal = parse_reals("problem.normal", *v);
    if (const auto v = take("problem.offset")) c.offset = parse_real("problem.offset", *v);
    if (const auto v = take("problem.lower")) c.lower = parse_reals("problem.lower", *v);
    if (const auto v = take("problem.upper")) c.upper = parse_reals("problem.upper", *v);
    const auto need_len = [&](const std::vector<double>& v, const char* what) {
      if (v.size() != c.finite_start.size())
        throw ConfigError(std::string(what) + " must have as many entries as problem.start");
    };
    if (c.finite_kind == FiniteDimKind::constant) need_len(c.target, "problem.target");
    if (c.finite_kind == FiniteDimKind::hyperplane) need_len(c.normal, "problem.normal");
    if (c.finite_kind == FiniteDimKind::box) {
      need_len(c.lower, "problem.lower");
      need_len(c.upper, "problem.upper");
      if (!c.target.empty()) need_len(c.target, "problem.target");
    }
  } else {
    c.start = need("problem.start");
    if (!is_catalog_function(c.start)) throw ConfigError("problem.start: unknown catalog function '" + c.start + "'");
    if (c.kind == ProblemKind::reconstruction) {
      if (const auto v = take("problem.weight")) c.weight = parse_real("problem.weight", *v);
      if (!(c.weight > 0.0)) throw ConfigError("problem.weight must be positive");
      c.data = need("problem.data");
      if (!is_catalog_function(c.data)) throw ConfigError("problem.data: unknown catalog function '" + c.data + "'");
      if (const auto v = take("problem.mode")) {
        if (*v == "full-gradient") c.mode = ReconstructionMode::full_gradient;
        else if (*v == "prox-gradient") c.mode = ReconstructionMode::prox_gradient;
        else throw ConfigError("problem.mode: expected full-gradient or prox-gradient");
      }
    }
  }

  if (const auto v = take("grid.n")) {
    c.grid_n = parse_count("grid.n", *v);
    if (c.grid_n < 2) throw ConfigError("grid.n must be >= 2");
  }

  const auto beta = sequence("beta");
  const auto lambda = sequence("lambda");
  if (!beta) throw ConfigError("missing schedule 'schedules.beta'");
  if (!lambda) throw ConfigError("missing schedule 'schedules.lambda'");
  c.beta = *beta;
  c.lambda = *lambda;
  c.gamma = sequence("gamma");
  if (c.uses_forward_backward() && !c.gamma) throw ConfigError("missing schedule 'schedules.gamma'");

  if (const auto v = take("stop.step_tol")) c.stop.step_tolerance = parse_real("stop.step_tol", *v);
  if (const auto v = take("stop.residual_tol")) c.stop.residual_tolerance = parse_real("stop.residual_tol", *v);
  if (const auto v = take("stop.max_iterations")) c.stop.max_iterations = parse_count("stop.max_iterations", *v);
  if (const auto v = take("stop.wall_seconds")) c.stop.wall_seconds = parse_real("stop.wall_seconds", *v);
  try {
    c.stop.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("stop: ") + e.what());
  }
  if (c.stop.residual_tolerance && c.kind == ProblemKind::custom_finite_dim)
    throw ConfigError("stop.residual_tol needs a problem with a feasibility residual or objective");

  if (const auto v = take("output.dir")) c.output_dir = *v;
  if (const auto v = take("run.force")) c.force = parse_bool("run.force", *v);
  if (const auto v = take("run.workers")) {
    c.workers = parse_count("run.workers", *v);
    if (c.workers < 1) throw ConfigError("run.workers must be >= 1");
  }

  if (const auto v = take("sweep.starts")) {
    c.sweep_starts = split(*v, ',');
    for (const auto& s : c.sweep_starts)
      if (!is_catalog_function(s)) throw ConfigError("sweep.starts: unknown catalog function '" + s + "'");
  }
  if (const auto v = take("sweep.gamma")) c.sweep_gamma = parse_sequence_list(*v, "sweep.gamma");
  if (const auto v = take("sweep.lambda")) c.sweep_lambda = parse_sequence_list(*v, "sweep.lambda");

  for (const auto& [k, v] : kv)
    if (!used.contains(k)) throw ConfigError("unknown key '" + k + "'");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  using config_detail::join_reals;
  const auto fmt_real = detail::fmt_exact;
  std::ostringstream out;
  out << "problem.kind = " << to_string(c.kind) << "\n";
  if (c.kind == ProblemKind::custom_finite_dim) {
    out << "problem.operator = " << to_string(c.finite_kind) << "\n";
    out << "problem.start = " << join_reals(c.finite_start) << "\n";
    if (!c.target.empty()) out << "problem.target = " << join_reals(c.target) << "\n";
    if (!c.normal.empty()) out << "problem.normal = " << join_reals(c.normal) << "\n";
    if (c.offset != 0.0) out << "problem.offset = " << fmt_real(c.offset) << "\n";
    if (!c.lower.empty()) out << "problem.lower = " << join_reals(c.lower) << "\n";
    if (!c.upper.empty()) out << "problem.upper = " << join_reals(c.upper) << "\n";
  } else {
    out << "problem.start = " << c.start << "\n";
    if (c.kind == ProblemKind::reconstruction) {
      out << "problem.weight = " << fmt_real(c.weight) << "\n";
      out << "problem.data = " << c.data << "\n";
      out << "problem.mode = " << to_string(c.mode) << "\n";
    }
  }
  out << "grid.n = " << c.grid_n << "\n";
  const auto seq = [&out](const std::string& name, const Sequence& s) {
    for (const auto& [k, v] : sequence_fields(s)) out << "schedules." << name << "." << k << " = " << v << "\n";
  };
  seq("beta", c.beta);
  seq("lambda", c.lambda);
  if (c.gamma) seq("gamma", *c.gamma);
  if (c.stop.step_tolerance) out << "stop.step_tol = " << fmt_real(*c.stop.step_tolerance) << "\n";
  if (c.stop.residual_tolerance) out << "stop.residual_tol = " << fmt_real(*c.stop.residual_tolerance) << "\n";
  out << "stop.max_iterations = " << c.stop.max_iterations << "\n";
  if (c.stop.wall_seconds) out << "stop.wall_seconds = " << fmt_real(*c.stop.wall_seconds) << "\n";
  out << "output.dir = " << c.output_dir << "\n";
  out << "run.force = " << (c.force ? "true" : "false") << "\n";
  out << "run.workers = " << c.workers << "\n";
  if (!c.sweep_starts.empty()) {
    out << "sweep.starts = ";
    for (std::size_t i = 0; i < c.sweep_starts.size(); ++i) out << (i ? ", " : "") << c.sweep_starts[i];
    out << "\n";
  }
  const auto list = [&out](const char* key, const std::vector<Sequence>& v) {
    if (v.empty()) return;
    out << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "; " : "") << format_sequence(v[i]);
    out << "\n";
  };
  list("sweep.gamma", c.sweep_gamma);
  list("sweep.lambda", c.sweep_lambda);
  return out.str();
}

}  // namespace tkm
