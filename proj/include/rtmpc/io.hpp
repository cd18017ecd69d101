#pragma once

// Trace persistence: per-run CSV, sweep summary JSON with quartiles, and the
// solver-time histogram. All floating-point output uses %.17g so identical
// runs serialize byte-identically.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtmpc/experiment.hpp"

namespace rtmpc {

inline const char* solve_tag_name(SolveTag t) {
  switch (t) {
    case SolveTag::Optimal: return "optimal";
    case SolveTag::Infeasible: return "infeasible";
    case SolveTag::Unbounded: return "unbounded";
    case SolveTag::MaxIterations: return "maxiter";
  }
  return "unknown";
}

namespace detail {
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string trace_csv_name(const SimTrace& t) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s_%s_rho%02d_seed%03d.csv",
                variant_name(t.variant), plant_name(t.plant), t.rho_index,
                t.seed_index);
  return buf;
}

inline void write_trace_csv(const SimTrace& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace CSV: " + path);
  out << "k,x0,x1,x2,x3,xn0,xn1,xn2,xn3,u,un,xhat0,xhat1,xhat2,xhat3,"
         "theta,gamma,Theta,s,q,status,solve_ms\n";
  for (const StepRecord& r : t.records) {
    out << r.k;
    for (int i = 0; i < 4; ++i) out << ',' << detail::fmt_g17(r.x(i));
    for (int i = 0; i < 4; ++i) out << ',' << detail::fmt_g17(r.x_n(i));
    out << ',' << detail::fmt_g17(r.u(0)) << ',' << detail::fmt_g17(r.u_n(0));
    for (int i = 0; i < 4; ++i) out << ',' << detail::fmt_g17(r.x_hat(i));
    out << ',' << r.theta << ',' << r.gamma << ',' << r.Theta << ',' << r.s
        << ',' << r.q << ',' << solve_tag_name(r.status) << ','
        << detail::fmt_g17(r.solve_ms) << '\n';
  }
}

// Quantile with linear interpolation between order statistics (the common
// "type 7" definition: h = (n-1)q). Input need not be sorted.
inline double quantile_type7(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

// Per-rho five-number summary of avg tracking error plus infeasibility and
// violation counts. Empty input yields an empty summary object.
inline nlohmann::json sweep_summary_json(const std::vector<SimTrace>& traces) {
  nlohmann::json j;
  j["runs"] = traces.size();
  j["per_rho"] = nlohmann::json::array();
  if (traces.empty()) return j;
  std::map<double, std::vector<const SimTrace*>> by_rho;
  for (const SimTrace& t : traces) by_rho[t.rho].push_back(&t);
  for (const auto& [rho, group] : by_rho) {
    std::vector<double> err;
    long infeas = 0, tube = 0;
    double max_viol = 0;
    for (const SimTrace* t : group) {
      err.push_back(t->summary.avg_tracking_error);
      infeas += t->summary.infeasible_steps;
      tube += t->summary.tube_violations;
      max_viol = std::max(max_viol, t->summary.max_constraint_violation);
    }
    j["per_rho"].push_back(
        {{"rho", rho},
         {"runs", group.size()},
         {"avg_tracking_error",
          {{"min", quantile_type7(err, 0.0)},
           {"q1", quantile_type7(err, 0.25)},
           {"median", quantile_type7(err, 0.5)},
           {"q3", quantile_type7(err, 0.75)},
           {"max", quantile_type7(err, 1.0)}}},
         {"infeasible_steps", infeas},
         {"tube_violations", tube},
         {"max_constraint_violation", max_viol}});
  }
  return j;
}

// Solver wall-time histogram in 0.5 ms bins; the first solve of each run is
// excluded (cold start). Produced even when empty.
inline void write_solve_time_histogram(const std::vector<SimTrace>& traces,
                                       const std::string& path) {
  constexpr double kBin = 0.5;
  std::map<long, long> bins;
  std::vector<double> times;
  for (const SimTrace& t : traces)
    for (size_t i = 1; i < t.records.size(); ++i) {
      bins[static_cast<long>(std::floor(t.records[i].solve_ms / kBin))]++;
      times.push_back(t.records[i].solve_ms);
    }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write histogram: " + path);
  out << "bin_start_ms,bin_end_ms,count\n";
  for (const auto& [b, n] : bins)
    out << detail::fmt_g17(b * kBin) << ',' << detail::fmt_g17((b + 1) * kBin)
        << ',' << n << '\n';
  if (!times.empty()) {
    out << "# median_ms=" << detail::fmt_g17(quantile_type7(times, 0.5))
        << " q95_ms=" << detail::fmt_g17(quantile_type7(times, 0.95)) << '\n';
  }
}

inline void export_sweep(const std::vector<SimTrace>& traces,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (const SimTrace& t : traces)
    write_trace_csv(t, (fs::path(out_dir) / trace_csv_name(t)).string());
  std::ofstream js(fs::path(out_dir) / "summary.json");
  if (!js) throw std::runtime_error("cannot write summary.json in " + out_dir);
  js << sweep_summary_json(traces).dump(2) << "\n";
  write_solve_time_histogram(
      traces, (fs::path(out_dir) / "solve_time_histogram.csv").string());
}

}  // namespace rtmpc
