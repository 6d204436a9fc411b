#pragma once

// Command-line front end. Each subcommand validates its parameters, runs one
// computation and writes CSV or a JSON report to stdout or --output.
//
// Exit codes: 0 success, 1 a verification or report check failed, 2 usage or
// invalid parameters, 3 a numerical failure (accuracy, resolution, ...).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dll/correspondence.hpp"
#include "dll/errors.hpp"
#include "dll/fiber.hpp"
#include "dll/kernels.hpp"
#include "dll/landau.hpp"
#include "dll/parallel.hpp"
#include "dll/verify.hpp"

namespace dll::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, check_failed = 1, usage = 2, numerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Argument syntax
// ---------------------------------------------------------------------------

inline double parse_number(const std::string& s, const std::string& what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("bad number '" + s + "' in " + what);
  }
  if (used != s.size() || !std::isfinite(v)) throw UsageError("bad number '" + s + "' in " + what);
  return v;
}

inline int parse_int(const std::string& s, const std::string& what) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw UsageError("bad integer '" + s + "' in " + what);
  }
  if (used != s.size()) throw UsageError("bad integer '" + s + "' in " + what);
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

/// start:stop:step
inline XiRange parse_range(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 3) throw UsageError("range '" + s + "' must be start:stop:step");
  XiRange r{parse_number(p[0], s), parse_number(p[1], s), parse_number(p[2], s)};
  if (!(r.step > 0.0) || r.stop < r.start) throw UsageError("range '" + s + "' needs step > 0 and stop >= start");
  return r;
}

/// Comma list of integers and inclusive ranges, e.g. "-2..3" or "0,2,5..6". Sorted, unique.
inline std::vector<int> parse_int_set(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_int(item, s));
    } else {
      const int a = parse_int(item.substr(0, dots), s), b = parse_int(item.substr(dots + 2), s);
      if (b < a) throw UsageError("empty range '" + item + "'");
      for (int k = a; k <= b; ++k) out.push_back(k);
    }
  }
  if (out.empty()) throw UsageError("empty integer set '" + s + "'");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline PlanePoint parse_point(const std::string& s) {
  const auto p = split(s, ',');
  if (p.size() != 2) throw UsageError("point '" + s + "' must be x1,x2");
  return {parse_number(p[0], s), parse_number(p[1], s)};
}

inline std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> v;
  for (const auto& item : split(s, ',')) v.push_back(parse_number(item, s));
  if (v.empty()) throw UsageError("empty list '" + s + "'");
  return v;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

inline json island_json(const SpectralIsland& isl) {
  json a = json::array();
  for (int k : isl.levels()) a.push_back(k);
  return a;
}

// ---------------------------------------------------------------------------
// Configuration and subcommands
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string command;
  int jobs = 0;
  std::string output;  // empty: stdout

  double b = 1.0;
  int kmax = 3;
  std::string island = "0";
  std::string xi_range;  // empty: command default
  std::string k_set = "-1..1";
  double margin = 0.25;
  double xi_step = -1.0;
  std::string b_grid = "0.8:1.2:0.1";
  std::string kind = "edge";
  std::string sqrt_lambda = "1";
  std::string x1_range = "-1:1:0.5";
  std::string x2_range = "0:1:0.5";
  std::string xp = "0.3,0.7";
  double radius = -1.0;
  std::string suite = "all";
  CorrespondenceTolerances tol;
  double chern_tol = 1e-3;
};

struct Output {
  std::string text;
  int code = ok;
};

inline Output cmd_spectrum(const RunConfig& c) {
  const auto levels = landau_levels(c.b, c.kmax);
  std::string s = "k,lambda\n";
  for (size_t i = 0; i < levels.size(); ++i)
    s += std::to_string(static_cast<int>(i) - c.kmax) + "," + fmt(levels[i]) + "\n";
  return {s, ok};
}

inline Output cmd_dispersion(const RunConfig& c) {
  const auto ks = parse_int_set(c.k_set);
  int kmax = 0;
  for (int k : ks) kmax = std::max(kmax, std::abs(k));
  const double sb = std::sqrt(c.b);
  const XiRange r = c.xi_range.empty() ? XiRange{std::floor(required_sweep_start(c.b, kmax) * 20.0) / 20.0,
                                                 3.0 * sb, 0.05}
                                       : parse_range(c.xi_range);
  const auto branches = trace_branches(c.b, r, ks, {c.jobs});
  std::string s = "xi,k,lambda,velocity,bc_residual,ode_residual\n";
  for (const auto& br : branches)
    for (const auto& p : br.samples)
      s += fmt(p.xi) + "," + std::to_string(br.k) + "," + fmt(p.lambda) + "," + fmt(p.velocity) + "," +
           fmt(p.bc_residual) + "," + fmt(p.ode_residual) + "\n";
  return {s, ok};
}

inline json tolerances_json(const CorrespondenceTolerances& t) {
  return {{"edge_rel", t.edge_rel},
          {"chain_abs", t.chain_abs},
          {"streda_abs", t.streda_abs},
          {"telescoping", t.telescoping},
          {"routes", t.routes}};
}

inline SpectralIsland island_of(const RunConfig& c) { return SpectralIsland::from_levels(parse_int_set(c.island)); }

inline Output cmd_edge_trace(const RunConfig& c) {
  ReportOptions o;
  o.margin = c.margin;
  o.xi_step = c.xi_step;
  o.jobs = c.jobs;
  o.tolerances = c.tol;
  const auto r = bulk_edge_report(island_of(c), c.b, o);
  json branches = json::array();
  for (const auto& d : r.branches)
    branches.push_back({{"k", d.k},
                        {"integral", d.integral},
                        {"telescoped", d.telescoped},
                        {"xi_range", {d.xi_min, d.xi_max}},
                        {"lambda_ends", {d.lambda_min, d.lambda_max}}});
  json j = {{"b", r.b},
            {"island", island_json(r.island)},
            {"bulk_value", r.bulk_value},
            {"edge_value", r.edge_value},
            {"streda_slope", r.streda.slope},
            {"chern_estimate", r.streda.chern_estimate},
            {"spectral_flow", r.spectral_flow},
            {"abs_err", r.abs_err},
            {"rel_err", r.rel_err},
            {"pass", r.pass},
            {"tolerances", tolerances_json(r.tolerances)},
            {"details",
             {{"ids", r.ids_value},
              {"bulk_trace", r.bulk_trace_value},
              {"level_sum", r.level_sum},
              {"edge_vs_levels", r.edge_vs_levels},
              {"flow_above", {{"energy", r.flow_above_energy}, {"flow", r.flow_above}}},
              {"flow_below", {{"energy", r.flow_below_energy}, {"flow", r.flow_below}}},
              {"lambda_bar", r.lambda_bar},
              {"chern_real_space", r.chern_real_space ? json(*r.chern_real_space) : json(nullptr)},
              {"telescoping_max", r.telescoping_max},
              {"sweep", {{"start", r.sweep.start}, {"stop", r.sweep.stop}, {"step", r.sweep.step}}},
              {"margin", c.margin},
              {"checks",
               {{"edge", r.pass_edge},
                {"chain", r.pass_chain},
                {"streda", r.pass_streda},
                {"flow", r.pass_flow},
                {"telescoping", r.pass_telescoping},
                {"routes", r.pass_routes}}},
              {"branches", branches}}}};
  return {j.dump(2) + "\n", r.pass ? ok : check_failed};
}

inline Output cmd_streda(const RunConfig& c) {
  const auto island = island_of(c);
  const auto grid = parse_range(c.b_grid).points();
  const auto s = streda_slope(island, grid);
  double mean = 0.0;
  for (double b : grid) mean += b;
  mean /= static_cast<double>(grid.size());
  const double err = std::abs(s.chern_estimate - island.size());
  const bool pass = err <= c.tol.streda_abs && s.residual <= 1e-12;
  json bg = json::array();
  for (double b : grid) bg.push_back(b);
  json j = {{"b", mean},
            {"island", island_json(island)},
            {"bulk_value", s.slope},
            {"edge_value", nullptr},
            {"streda_slope", s.slope},
            {"chern_estimate", s.chern_estimate},
            {"spectral_flow", nullptr},
            {"abs_err", err},
            {"rel_err", err / island.size()},
            {"pass", pass},
            {"tolerances", {{"streda_abs", c.tol.streda_abs}, {"fit_residual", 1e-12}}},
            {"details", {{"b_grid", bg}, {"intercept", s.intercept}, {"fit_residual", s.residual}}}};
  return {j.dump(2) + "\n", pass ? ok : check_failed};
}

inline KernelKind kernel_kind(const std::string& s) {
  if (s == "free") return KernelKind::free;
  if (s == "edge") return KernelKind::edge;
  if (s == "S") return KernelKind::dressed_S;
  if (s == "T") return KernelKind::dressed_T;
  throw UsageError("unknown kernel '" + s + "' (free, edge, S, T)");
}

inline Output cmd_kernel(const RunConfig& c) {
  const KernelKind kind = kernel_kind(c.kind);
  const PlanePoint xp = parse_point(c.xp);
  const auto svals = parse_number_list(c.sqrt_lambda);
  const auto x1s = parse_range(c.x1_range).points();
  const auto x2s = parse_range(c.x2_range).points();
  std::string s = "x1,x2,xp1,xp2,sqrt_lambda,re11,im11,re12,im12,re21,im21,re22,im22\n";
  for (double sq : svals)
    for (double x1 : x1s)
      for (double x2 : x2s) {
        const SpinorMatrix k = evaluate_kernel(kind, c.b, {x1, x2}, xp, SpectralParameter(sq));
        s += fmt(x1) + "," + fmt(x2) + "," + fmt(xp.x1) + "," + fmt(xp.x2) + "," + fmt(sq);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) s += "," + fmt(k(i, j).real()) + "," + fmt(k(i, j).imag());
        s += "\n";
      }
  return {s, ok};
}

inline Output cmd_chern(const RunConfig& c) {
  const auto ch = chern_zero_mode(c.b, c.radius, c.jobs);
  const SpectralIsland zero(0, 0);
  const double db = 0.1 * c.b;
  const auto s = streda_slope(zero, {c.b - db, c.b, c.b + db});
  const double err = std::abs(ch.value - 1.0);
  const double routes = std::abs(ch.value - s.chern_estimate);
  const bool pass = err <= c.chern_tol && routes <= 2.0 * c.chern_tol;
  json j = {{"b", c.b},
            {"island", island_json(zero)},
            {"bulk_value", nullptr},
            {"edge_value", nullptr},
            {"streda_slope", s.slope},
            {"chern_estimate", ch.value},
            {"spectral_flow", nullptr},
            {"abs_err", err},
            {"rel_err", err},
            {"pass", pass},
            {"tolerances", {{"chern", c.chern_tol}, {"routes", 2.0 * c.chern_tol}}},
            {"details", {{"quadrature_error", ch.abs_error}, {"streda_chern", s.chern_estimate}, {"routes_err", routes}}}};
  return {j.dump(2) + "\n", pass ? ok : check_failed};
}

inline Output cmd_verify(const RunConfig& c) {
  const auto results = verify::run_suites(c.suite, c.jobs);
  json suites = json::array();
  bool all = true;
  for (const auto& r : results) {
    json checks = json::array();
    for (const auto& ck : r.checks) {
      json e = {{"name", ck.name},
                {"value", std::isnan(ck.value) ? json(nullptr) : json(ck.value)},
                {"tolerance", ck.tolerance},
                {"pass", ck.pass}};
      if (!ck.error.empty()) e["error"] = ck.error;
      checks.push_back(e);
    }
    suites.push_back({{"suite", r.suite}, {"pass", r.pass()}, {"checks", checks}});
    all = all && r.pass();
  }
  json j = {{"suite", c.suite}, {"pass", all}, {"suites", suites}};
  return {j.dump(2) + "\n", all ? ok : check_failed};
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dirac-Landau bulk/edge laboratory", "dll"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  RunConfig c;
  app.add_option("--jobs", c.jobs, "worker threads (default: DLL_JOBS, else all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("-o,--output", c.output, "write to this file instead of stdout");

  auto* spectrum = app.add_subcommand("spectrum", "bulk Landau levels as CSV");
  spectrum->add_option("--b", c.b, "field strength")->required();
  spectrum->add_option("--kmax", c.kmax, "largest |k|")->required();

  auto* dispersion = app.add_subcommand("dispersion", "edge dispersion branches as CSV");
  dispersion->add_option("--b", c.b, "field strength")->required();
  dispersion->add_option("--xi", c.xi_range, "xi sweep start:stop:step");
  dispersion->add_option("--k", c.k_set, "branch labels, e.g. -2..3 or 0,1")->capture_default_str();

  auto* edge = app.add_subcommand("edge-trace", "bulk-edge correspondence report as JSON");
  edge->add_option("--b", c.b, "field strength")->required();
  edge->add_option("--island", c.island, "contiguous Landau levels, e.g. 0 or 0..1")->capture_default_str();
  edge->add_option("--margin", c.margin, "gap-function margin in (0, 1/2)")->capture_default_str();
  edge->add_option("--xi-step", c.xi_step, "sweep step (default 0.0125/sqrt(b))");
  edge->add_option("--tol-edge", c.tol.edge_rel)->capture_default_str();
  edge->add_option("--tol-chain", c.tol.chain_abs)->capture_default_str();
  edge->add_option("--tol-streda", c.tol.streda_abs)->capture_default_str();
  edge->add_option("--tol-telescoping", c.tol.telescoping)->capture_default_str();
  edge->add_option("--tol-routes", c.tol.routes)->capture_default_str();

  auto* streda = app.add_subcommand("streda", "Streda slope of the IDS as JSON");
  streda->add_option("--island", c.island)->capture_default_str();
  streda->add_option("--b-grid", c.b_grid, "field values start:stop:step")->capture_default_str();
  streda->add_option("--tol-streda", c.tol.streda_abs)->capture_default_str();

  auto* kernel = app.add_subcommand("kernel", "resolvent kernel samples as CSV");
  kernel->add_option("--kind", c.kind, "free, edge, S or T")->capture_default_str();
  kernel->add_option("--b", c.b, "field strength for S and T")->capture_default_str();
  kernel->add_option("--sqrt-lambda", c.sqrt_lambda, "comma list of sqrt(lambda)")->capture_default_str();
  kernel->add_option("--x1", c.x1_range, "start:stop:step")->capture_default_str();
  kernel->add_option("--x2", c.x2_range, "start:stop:step")->capture_default_str();
  kernel->add_option("--xp", c.xp, "source point x1,x2")->capture_default_str();

  auto* chern = app.add_subcommand("chern", "real-space Chern integral of the zero-mode projection as JSON");
  chern->add_option("--b", c.b, "field strength")->capture_default_str();
  chern->add_option("--radius", c.radius, "quadrature radius (default 11/sqrt(b))");
  chern->add_option("--tol", c.chern_tol)->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run invariant suites; exit 0 iff all pass");
  verify->add_option("--suite", c.suite)
      ->check(CLI::IsMember({"specfun", "kernels", "fiber", "correspondence", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  if (c.jobs == 0) c.jobs = default_jobs();

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Output o;
    if (name == "spectrum") o = cmd_spectrum(c);
    else if (name == "dispersion") o = cmd_dispersion(c);
    else if (name == "edge-trace") o = cmd_edge_trace(c);
    else if (name == "streda") o = cmd_streda(c);
    else if (name == "kernel") o = cmd_kernel(c);
    else if (name == "chern") o = cmd_chern(c);
    else o = cmd_verify(c);

    if (c.output.empty()) {
      out << o.text;
    } else {
      std::ofstream f(c.output, std::ios::binary);
      if (!f) {
        err << "dll: cannot open " << c.output << "\n";
        return usage;
      }
      f << o.text;
    }
    return o.code;
  } catch (const UsageError& e) {
    err << "dll " << name << ": " << e.what() << "\n";
    return usage;
  } catch (const Error& e) {
    err << "dll " << name << ": " << e.what() << "\n";
    return e.is_numerical() ? numerical : usage;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"dll"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dll::cli
