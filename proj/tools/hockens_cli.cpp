// Batch front end: one analysis per invocation, CSV (+ optional SVG) into --out,
// plus manifest.json describing the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hockens/config.hpp"
#include "hockens/hockens.hpp"

namespace fs = std::filesystem;
using namespace hockens;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::string> out_dir;
  bool svg = false;
  bool no_cache = false;
  bool deterministic_svg = false;
};

struct Run {
  RunConfig cfg;
  Globals g;
  fs::path out;
  std::string command;
  std::vector<std::string> outputs;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  std::optional<std::string> stamp() const {
    if (g.deterministic_svg || cfg.output.deterministic_svg) return std::nullopt;
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return std::string(buf);
  }
  bool want_svg() const { return g.svg || cfg.output.svg; }

  std::ofstream open(const std::string& name) {
    const fs::path p = out / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(Errc::Config, "cannot write '" + p.string() + "'");
    outputs.push_back(p.string());
    return os;
  }
};

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const char* pass(bool ok) { return ok ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------------------

struct PathArgs {
  std::optional<double> from, to, step, budget;
};

void cmd_hoeckens_path(Run& run, const PathArgs& a) {
  auto& ps = run.cfg.path;
  if (a.from) ps.theta_lo = Angle::deg(*a.from);
  if (a.to) ps.theta_hi = Angle::deg(*a.to);
  if (a.step) ps.step = Angle::deg(*a.step);
  if (a.budget) ps.deviation_budget = *a.budget;
  if (!(ps.step.rad() > 0.0)) throw Error(Errc::Config, "invalid step");
  if (ps.theta_hi < ps.theta_lo) throw Error(Errc::Config, "invalid range: theta_hi < theta_lo");

  const auto& hp = run.cfg.finger.hoeckens;
  const auto tr = trace(hp, ps.theta_lo, ps.theta_hi, ps.step);
  {
    auto os = run.open("hoeckens_path.csv");
    os << "theta1_deg,x_mm,y_mm\n";
    for (const auto& t : tr) {
      os << detail::format6(t.theta1.deg()) << ',' << detail::format6(t.d.x) << ',' << detail::format6(t.d.y) << '\n';
    }
  }
  const LinearBand band = linear_band(hp, ps.theta_lo, ps.theta_hi, ps.step, ps.deviation_budget);
  std::cout << "band: theta1=[" << fmt("%.2f", band.theta_lo.deg()) << ", " << fmt("%.2f", band.theta_hi.deg())
            << "] deg max_deviation=" << fmt("%.4f", band.max_deviation) << " l spread=" << fmt("%.4f", band.spread)
            << " l samples=" << band.samples << '\n';
  run.extra["band"] = {{"theta_lo_deg", band.theta_lo.deg()},
                       {"theta_hi_deg", band.theta_hi.deg()},
                       {"max_deviation_l", band.max_deviation},
                       {"spread_l", band.spread}};

  if (run.want_svg()) {
    svg::Series path{"point D", {}, "#1f77b4"}, in_band{"linear band", {}, "#d62728"};
    for (const auto& t : tr) {
      path.points.push_back(t.d);
      if (t.theta1 >= band.theta_lo && t.theta1 <= band.theta_hi) in_band.points.push_back(t.d);
    }
    auto os = run.open("hoeckens_path.svg");
    svg::line_plot(os, {path, in_band}, {"Point D path", "x (mm)", "y (mm)", true, run.stamp()});
  }
}

// ---------------------------------------------------------------------------

void cmd_scan(Run& run, std::optional<unsigned> threads) {
  const ScanSpec& spec = run.cfg.scan;
  const bool use_cache = run.cfg.output.use_cache && !run.g.no_cache;
  const fs::path cache = fs::path(run.cfg.output.cache_dir) / ("scan-" + hex(spec.hash()) + ".csv");

  ScanResult res;
  bool hit = false;
  if (use_cache && fs::exists(cache)) {
    std::ifstream in(cache, std::ios::binary);
    try {
      res = read_csv(in, spec);
      hit = true;
    } catch (const Error&) {
      hit = false;  // stale or foreign file: recompute
    }
  }
  if (!hit) {
    res = scan(spec, threads.value_or(run.cfg.scan_threads));
    if (use_cache) {
      fs::create_directories(cache.parent_path().empty() ? fs::path(".") : cache.parent_path());
      std::ofstream os(cache, std::ios::binary);
      write_csv(os, res);
    }
  }
  run.extra["cache_hit"] = hit;
  run.extra["cache_file"] = use_cache ? cache.string() : "";
  {
    auto os = run.open("scan.csv");
    write_csv(os, res);
  }

  std::size_t feasible = 0;
  for (const auto& c : res.cells) feasible += c.feasible;
  std::cout << "cells: " << res.cells.size() << " feasible=" << feasible << (hit ? " (cache hit)" : "") << '\n';
  if (const auto best = argmax(res)) {
    std::cout << "argmax: L_AG=" << detail::format6(best->l_ag) << "mm L_DG=" << detail::format6(best->l_dg)
              << "mm delta_theta_max=" << fmt("%.2f", *best->delta_theta_deg) << "deg\n";
    run.extra["argmax"] = {{"l_ag_mm", best->l_ag}, {"l_dg_mm", best->l_dg}, {"delta_theta_max_deg", *best->delta_theta_deg}};
  } else {
    std::cout << "argmax: no feasible cell\n";
  }
  const FingerConfig& f = run.cfg.finger;
  if (const ScanCell* c = res.find(f.l_ag, f.l_gd)) {
    std::cout << "design: L_AG=" << detail::format6(f.l_ag) << "mm L_DG=" << detail::format6(f.l_gd) << "mm "
              << (c->feasible ? "feasible" : "infeasible(" + std::string(to_string(c->reason)) + ")")
              << " delta_theta_max=" << (c->delta_theta_deg ? fmt("%.2f", *c->delta_theta_deg) : std::string("n/a"))
              << "deg\n";
  }
  try {
    const SensitivityReport s = sensitivity(res);
    std::cout << "sensitivity: r=" << fmt("%.4f", s.r) << " slope_AG=" << fmt("%.4f", s.slope_ag)
              << "deg/mm slope_DG<60=" << fmt("%.4f", s.slope_dg_below_60) << "deg/mm AG+30mm="
              << fmt("%.2f", 30.0 * s.slope_ag) << "deg\n";
    run.extra["sensitivity"] = {{"r", s.r}, {"slope_ag", s.slope_ag}, {"slope_dg_below_60", s.slope_dg_below_60}};
  } catch (const Error& e) {
    std::cout << "sensitivity: unavailable (" << e.what() << ")\n";
  }
  if (run.want_svg()) {
    auto os = run.open("scan.svg");
    write_svg(os, res, run.stamp());
  }
}

// ---------------------------------------------------------------------------

struct TrajectoryArgs {
  std::optional<double> omega, dt;
  bool original = false;
};

void cmd_trajectory(Run& run, const TrajectoryArgs& a) {
  auto& ts = run.cfg.trajectory;
  if (a.omega) ts.omega1_deg_s = *a.omega;
  if (a.dt) ts.dt_s = *a.dt;
  if (a.original) ts.pushed = false;
  if (!(ts.omega1_deg_s > 0.0)) throw Error(Errc::Config, "omega1 must be positive");
  if (!(ts.dt_s > 0.0)) throw Error(Errc::Config, "invalid dt");

  const FingerConfig& f = run.cfg.finger;
  const Trajectory tr = simulate(f, ts.omega1_deg_s, ts.dt_s, ts.pushed);
  {
    auto os = run.open("trajectory.csv");
    write_csv(os, tr);
  }
  const Trajectory orig = ts.pushed ? simulate(f, ts.omega1_deg_s, ts.dt_s, false) : tr;

  if (ts.pushed) {
    const VelocityJump j = velocity_jump(tr);
    std::cout << "velocity jump: t=" << fmt("%.3f", j.t) << "s vx=" << fmt("%.3f", j.vx) << "mm/s\n";
    run.extra["velocity_jump"] = {{"t_s", j.t}, {"vx_mm_s", j.vx}};

    // Coincidence over the first 16 mm of D's rise.
    const double y0 = solve(f.hoeckens, f.stroke_start).d.y;
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      if (solve(f.hoeckens, tr.samples[i].theta1).d.y - y0 > 16.0) break;
      worst = std::max(worst, distance(tr.samples[i].tip, orig.samples[i].tip));
    }
    std::cout << "coincidence first 16 mm: " << pass(worst < 1e-9) << " (max gap " << fmt("%.3g", worst) << " mm)\n";

    const Point2 end = tr.samples.back().tip, end0 = orig.samples.back().tip;
    std::cout << "final: x=" << fmt("%.2f", end.x) << "mm lift=" << fmt("%.2f", end.y - end0.y) << "mm\n";
  }
  const double area = workspace_area(f, ts.pushed);
  std::cout << "workspace area: " << fmt("%.2f", area) << " mm^2\n";
  run.extra["workspace_area_mm2"] = area;

  if (run.want_svg()) {
    svg::Series pushed{ts.pushed ? "pushed path" : "original path", {}, "#d62728"};
    svg::Series original{"original path", {}, "#1f77b4"};
    for (const auto& s : tr.samples) pushed.points.push_back(s.tip);
    for (const auto& s : orig.samples) original.points.push_back(s.tip);
    std::vector<svg::Series> series{original};
    if (ts.pushed) series.push_back(pushed);
    auto os = run.open("trajectory.svg");
    svg::line_plot(os, series, {"Fingertip trajectory", "x (mm)", "y (mm)", true, run.stamp()});
  }
}

// ---------------------------------------------------------------------------

struct ForceArgs {
  std::vector<double> theta1;
  bool theta_given = false;
};

std::string surface_name(double theta_deg) {
  std::string s = detail::format6(theta_deg);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return "force_theta1_" + s;
}

void cmd_force(Run& run, const ForceArgs& a) {
  auto& fs_ = run.cfg.force;
  if (a.theta_given) fs_.theta1_deg = a.theta1;
  if (fs_.theta1_deg.empty()) throw Error(Errc::Config, "empty theta1 list");
  if (!(fs_.omega1_deg_s > 0.0)) throw Error(Errc::Config, "omega1 must be positive");
  if (fs_.p_axis.n == 0 || fs_.r_axis.n == 0) throw Error(Errc::Config, "force grid needs at least one node per axis");

  const FingerConfig& f = run.cfg.finger;
  const SpringParams& sp = run.cfg.springs;
  std::vector<std::pair<double, ForceSurface>> surfaces;
  for (double th : fs_.theta1_deg) {
    ForceSurface s = force_surface(f, sp, Angle::deg(th), fs_.omega1_deg_s, fs_.p_axis, fs_.r_axis);
    {
      auto os = run.open(surface_name(th) + ".csv");
      write_csv(os, s);
    }
    if (run.want_svg()) {
      auto os = run.open(surface_name(th) + ".svg");
      write_svg(os, s, run.stamp());
    }

    // Monotonicity over the grid: increasing in P, decreasing in r.
    bool mono_p = true, mono_r = true;
    for (std::size_t ir = 0; ir < s.r_axis.n; ++ir) {
      for (std::size_t ip = 0; ip < s.p_axis.n; ++ip) {
        const auto& v = s.at(ip, ir);
        if (!v) continue;
        if (ip + 1 < s.p_axis.n && s.at(ip + 1, ir) && !(*s.at(ip + 1, ir) > *v)) mono_p = false;
        if (ir + 1 < s.r_axis.n && s.at(ip, ir + 1) && !(*s.at(ip, ir + 1) < *v)) mono_r = false;
      }
    }
    std::size_t singular = 0;
    for (const auto& v : s.values) singular += !v;
    std::cout << "theta1=" << detail::format6(th) << "deg: dF/dP>0 " << pass(mono_p) << ", dF/dr<0 " << pass(mono_r)
              << ", singular nodes " << singular << '\n';

    // Nesting: a doubled grid reproduces every shared node exactly.
    const ForceSurface fine = force_surface(f, sp, Angle::deg(th), fs_.omega1_deg_s, fs_.p_axis.refined(),
                                            fs_.r_axis.refined());
    bool nested = true;
    for (std::size_t ir = 0; ir < s.r_axis.n; ++ir) {
      for (std::size_t ip = 0; ip < s.p_axis.n; ++ip) {
        const auto& c = s.at(ip, ir);
        const auto& d = fine.at(s.p_axis.n > 1 ? 2 * ip : 0, s.r_axis.n > 1 ? 2 * ir : 0);
        if (c.has_value() != d.has_value() || (c && *c != *d)) nested = false;
      }
    }
    std::cout << "theta1=" << detail::format6(th) << "deg: grid nesting " << pass(nested) << '\n';
    surfaces.emplace_back(th, std::move(s));
  }

  // Ordering report: each larger crank angle against each smaller one.
  nlohmann::ordered_json order = nlohmann::ordered_json::array();
  for (const auto& [hi_th, hi] : surfaces) {
    for (const auto& [lo_th, lo] : surfaces) {
      if (!(hi_th > lo_th)) continue;
      bool dom = true;
      for (std::size_t k = 0; k < hi.values.size(); ++k) {
        if (hi.values[k] && lo.values[k] && !(*hi.values[k] > *lo.values[k])) dom = false;
      }
      std::cout << "dominance theta1=" << detail::format6(hi_th) << " over theta1=" << detail::format6(lo_th) << ": "
                << pass(dom) << '\n';
      order.push_back({{"high_deg", hi_th}, {"low_deg", lo_th}, {"dominates", dom}});
    }
  }
  run.extra["dominance"] = order;
}

// ---------------------------------------------------------------------------

void cmd_amplification(Run& run, std::optional<double> step) {
  const Angle st = Angle::deg(step.value_or(0.01));
  if (!(st.rad() > 0.0)) throw Error(Errc::Config, "invalid step");
  const Amplification a = rocker_amplification(run.cfg.finger, st);
  {
    auto os = run.open("amplification.csv");
    os << "input_sweep_deg,output_sweep_deg,ratio\n";
    os << detail::format6(a.input_sweep.deg()) << ',' << detail::format6(a.output_sweep.deg()) << ','
       << detail::format6(a.ratio) << '\n';
  }
  std::cout << "amplification: input=" << fmt("%.2f", a.input_sweep.deg()) << "deg output="
            << fmt("%.2f", a.output_sweep.deg()) << "deg ratio=" << fmt("%.3f", a.ratio) << '\n';
}

// ---------------------------------------------------------------------------

void write_manifest(const Run& run, double wall) {
  nlohmann::ordered_json m;
  m["tool"] = "hockens_cli";
  m["version"] = kToolVersion;
  m["command"] = run.command;
  m["config_hash"] = hex(run.cfg.hash());
  m["inputs"] = {{"config", run.g.config_path}};
  m["config"] = run.cfg.canonical();
  m["outputs"] = run.outputs;
  for (const auto& [k, v] : run.extra.items()) m[k] = v;
  m["wall_time_s"] = wall;
  std::ofstream os(run.out / "manifest.json", std::ios::binary);
  os << m.dump(2) << '\n';
}

int fail(int code, std::string_view kind, const std::string& msg) {
  nlohmann::ordered_json e{{"error", kind}, {"message", msg}, {"exit_code", code}};
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar-linkage analyses for the Hockens-A finger"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory");
  app.add_flag("--svg", g.svg, "also write SVG plots");
  app.add_flag("--no-cache", g.no_cache, "ignore and do not write the scan cache");
  app.add_flag("--deterministic-svg", g.deterministic_svg, "omit the timestamp from SVG output");

  PathArgs path_args;
  auto* c_path = app.add_subcommand("hoeckens-path", "point-D path and its near-linear band");
  c_path->add_option("--from", path_args.from, "first crank angle (deg)");
  c_path->add_option("--to", path_args.to, "last crank angle (deg)");
  c_path->add_option("--step", path_args.step, "crank step (deg)");
  c_path->add_option("--budget", path_args.budget, "deviation budget (units of l)");

  std::optional<unsigned> threads;
  auto* c_scan = app.add_subcommand("scan", "grid scan over (L_AG, L_DG)");
  c_scan->add_option("--threads", threads, "worker threads (0 = hardware)");

  TrajectoryArgs traj_args;
  auto* c_traj = app.add_subcommand("trajectory", "fingertip trajectory and workspace area");
  c_traj->add_option("--omega", traj_args.omega, "crank rate (deg/s)");
  c_traj->add_option("--dt", traj_args.dt, "sample interval (s)");
  c_traj->add_flag("--original", traj_args.original, "disable the push linkage");

  ForceArgs force_args;
  auto* c_force = app.add_subcommand("force", "grasp-force surfaces");
  c_force->add_option("--theta1", force_args.theta1, "crank angles (deg)")->delimiter(',')->expected(0, -1);

  std::optional<double> amp_step;
  auto* c_amp = app.add_subcommand("amplification", "rocker amplification over the stroke");
  c_amp->add_option("--step", amp_step, "crank step (deg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "Usage", e.what());
  }
  force_args.theta_given = c_force->count("--theta1") > 0;

  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  run.g = g;
  try {
    run.cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    run.out = g.out_dir.value_or(run.cfg.output.dir);
    fs::create_directories(run.out);

    if (c_path->parsed()) {
      run.command = "hoeckens-path";
      cmd_hoeckens_path(run, path_args);
    } else if (c_scan->parsed()) {
      run.command = "scan";
      cmd_scan(run, threads);
    } else if (c_traj->parsed()) {
      run.command = "trajectory";
      cmd_trajectory(run, traj_args);
    } else if (c_force->parsed()) {
      run.command = "force";
      cmd_force(run, force_args);
    } else if (c_amp->parsed()) {
      run.command = "amplification";
      cmd_amplification(run, amp_step);
    }
  } catch (const Error& e) {
    const bool usage = e.code() == Errc::Config || e.code() == Errc::InvalidArgument;
    return fail(usage ? 2 : 3, to_string(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(2, "Config", e.what());
  } catch (const std::exception& e) {
    return fail(3, "Internal", e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(run, wall);
  return 0;
}
