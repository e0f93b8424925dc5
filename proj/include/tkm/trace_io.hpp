#pragma once

// CSV export of iteration traces and the JSON summary record written next to
// them. Numbers use 17 significant digits so a re-imported trace reproduces
// the original doubles exactly.

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tkm/error.hpp"
#include "tkm/iteration.hpp"
#include "tkm/schedules.hpp"

namespace tkm {

inline constexpr const char* kTraceHeader =
    "n,iterate_norm,step_norm,fp_residual,feasibility_or_objective,beta_n,lambda_n,gamma_n";

inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  using detail::fmt_real;
  out << kTraceHeader << "\n";
  for (const auto& r : trace.records) {
    out << r.n << ',' << fmt_real(r.iterate_norm) << ',' << fmt_real(r.step_norm) << ',' << fmt_real(r.fp_residual)
        << ',' << (r.monitor ? fmt_real(*r.monitor) : "") << ',' << fmt_real(r.beta) << ',' << fmt_real(r.lambda)
        << ',' << (r.gamma ? fmt_real(*r.gamma) : "") << "\n";
  }
}

// Reads the records back; the termination reason is not part of the CSV and
// is left at its default.
inline IterationTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw Error("trace CSV: unexpected header");
  IterationTrace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) throw Error("trace CSV line " + std::to_string(lineno) + ": expected 8 columns");
    const auto real = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size())
        throw Error("trace CSV line " + std::to_string(lineno) + ": bad number '" + s + "'");
      return v;
    };
    TraceRecord r;
    r.n = static_cast<std::size_t>(std::strtoull(cells[0].c_str(), nullptr, 10));
    r.iterate_norm = real(cells[1]);
    r.step_norm = real(cells[2]);
    r.fp_residual = real(cells[3]);
    if (!cells[4].empty()) r.monitor = real(cells[4]);
    r.beta = real(cells[5]);
    r.lambda = real(cells[6]);
    if (!cells[7].empty()) r.gamma = real(cells[7]);
    trace.records.push_back(r);
  }
  return trace;
}

inline nlohmann::json summary_json(const TraceSummary& s, const std::vector<std::string>& warnings = {}) {
  nlohmann::json j;
  j["iterations"] = s.iterations;
  j["termination"] = to_string(s.reason);
  j["converged"] = converged(s.reason);
  j["final_iterate_norm"] = s.final_iterate_norm;
  j["final_step_norm"] = s.final_step_norm;
  j["final_fp_residual"] = s.final_fp_residual;
  j["final_feasibility_or_objective"] = s.final_monitor ? nlohmann::json(*s.final_monitor) : nlohmann::json();
  j["wall_seconds"] = s.wall_seconds;
  j["warnings"] = warnings;
  return j;
}

inline std::string summary_text(const TraceSummary& s) {
  using detail::fmt_short;
  std::string out = "iterations: " + std::to_string(s.iterations) + "\n";
  out += std::string("termination: ") + to_string(s.reason) + "\n";
  out += "final ||x_n||: " + fmt_short(s.final_iterate_norm) + "\n";
  out += "final ||x_n - x_{n-1}||: " + fmt_short(s.final_step_norm) + "\n";
  out += "final fixed-point residual: " + fmt_short(s.final_fp_residual) + "\n";
  if (s.final_monitor) out += "final feasibility/objective: " + fmt_short(*s.final_monitor) + "\n";
  out += "wall seconds: " + fmt_short(s.wall_seconds) + "\n";
  return out;
}

}  // namespace tkm
