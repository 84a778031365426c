#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hockens/error.hpp"
#include "hockens/geometry.hpp"
#include "hockens/hoeckens.hpp"
#include "hockens/mechanism.hpp"
#include "hockens/svg.hpp"

namespace hockens {

/// Grid over the (L_AG, L_DG) design plane plus the D trace that drives it.
struct ScanSpec {
  double ag_min = 30.0, ag_max = 180.0;
  double dg_min = 30.0, dg_max = 180.0;
  double resolution = 1.0;
  HoeckensParams hoeckens = HoeckensParams::paper_proportions(30.0);
  Angle trace_start = Angle::deg(68.51);
  Angle trace_end = Angle::deg(156.56);
  Angle trace_step = Angle::deg(0.5);
  double workspace_margin = 45.0;

  std::size_t ag_count() const { return axis_count(ag_min, ag_max); }
  std::size_t dg_count() const { return axis_count(dg_min, dg_max); }
  double ag_at(std::size_t i) const { return ag_min + static_cast<double>(i) * resolution; }
  double dg_at(std::size_t j) const { return dg_min + static_cast<double>(j) * resolution; }

  void validate() const {
    if (!(resolution > 0.0)) throw Error(Errc::InvalidArgument, "scan resolution must be positive");
    if (!(ag_min > 0.0 && dg_min > 0.0 && ag_max >= ag_min && dg_max >= dg_min)) {
      throw Error(Errc::InvalidArgument, "scan ranges must be positive and ordered");
    }
    if (!(trace_step.rad() > 0.0) || trace_end < trace_start) throw Error(Errc::InvalidArgument, "invalid D-trace sweep");
    hoeckens.validate();
  }

  std::uint64_t hash() const {
    char buf[1024];
    std::snprintf(buf, sizeof buf, "scan-v1|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                  ag_min, ag_max, dg_min, dg_max, resolution, hoeckens.l_ab, hoeckens.l_ac, hoeckens.l_bd,
                  hoeckens.c.x, hoeckens.c.y, hoeckens.unit_length, trace_start.rad(), trace_end.rad(),
                  trace_step.rad(), workspace_margin, hoeckens.a.x + 7.0 * hoeckens.a.y);
    return detail::fnv1a(buf);
  }

 private:
  std::size_t axis_count(double lo, double hi) const {
    return static_cast<std::size_t>(std::floor((hi - lo) / resolution + 1e-9)) + 1;
  }
};

/// D path over the stroke at the trace step, with the exact end sample appended.
inline std::vector<Point2> d_trace(const HoeckensParams& p, Angle start, Angle end, Angle step) {
  std::vector<Point2> out;
  for (const auto& t : trace(p, start, end, step)) out.push_back(t.d);
  const detail::DegreeGrid grid(start.deg(), step.deg());
  const std::size_t n = grid.count(end.deg());
  if (n == 0 || std::abs(grid.at(n - 1) - end.deg()) > 1e-9) out.push_back(solve(p, end).d);
  return out;
}

inline std::vector<Point2> d_trace(const ScanSpec& s) {
  return d_trace(s.hoeckens, s.trace_start, s.trace_end, s.trace_step);
}

enum class Infeasibility { None, Grashof, Workspace, Discontinuous };

constexpr std::string_view to_string(Infeasibility r) {
  switch (r) {
    case Infeasibility::None: return "";
    case Infeasibility::Grashof: return "grashof";
    case Infeasibility::Workspace: return "workspace";
    case Infeasibility::Discontinuous: return "discontinuous";
  }
  return "?";
}

struct Feasibility {
  bool feasible = true;
  Infeasibility reason = Infeasibility::None;
  std::size_t sample = 0;  // index of the first violating D sample
};

/// Grashof (triangle) condition |L_AG - L_DG| <= d <= L_AG + L_DG for every
/// D sample, then the workspace limit G_y >= D_y - margin on the lower branch.
inline Feasibility check_feasibility(double l_ag, double l_dg, std::span<const Point2> trace, double margin) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double d = trace[k].norm();
    if (!(std::abs(l_ag - l_dg) <= d && d <= l_ag + l_dg)) return {false, Infeasibility::Grashof, k};
  }
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const Point2 g = circle_intersection({{0.0, 0.0}, l_ag, trace[k], l_dg}).lower();
    if (!(g.y >= trace[k].y - margin)) return {false, Infeasibility::Workspace, k};
  }
  return {};
}

/// Max minus min of the push angle over the trace.
inline Angle delta_theta_max(double l_ag, double l_dg, std::span<const Point2> trace) {
  if (trace.empty()) throw Error(Errc::InvalidArgument, "empty D trace");
  double lo = 1e300, hi = -1e300;
  for (const Point2& d : trace) {
    IntersectionResult ir;
    try {
      ir = circle_intersection({{0.0, 0.0}, l_ag, d, l_dg});
    } catch (const Error& e) {
      throw Error(Errc::InfeasibleCell, std::string("no assembly for L_AG=") + std::to_string(l_ag) +
                                            ", L_DG=" + std::to_string(l_dg) + ": " + e.what());
    }
    const double th = push_angle(ir.lower(), d).rad();
    lo = std::min(lo, th);
    hi = std::max(hi, th);
  }
  return Angle::rad(hi - lo);
}

struct ScanCell {
  double l_ag = 0.0;
  double l_dg = 0.0;
  bool feasible = false;
  std::optional<double> delta_theta_deg;  // present whenever the four-bar assembles
  Infeasibility reason = Infeasibility::None;

  friend bool operator==(const ScanCell&, const ScanCell&) = default;
};

/// Row-major over L_AG (outer) then L_DG (inner).
struct ScanResult {
  ScanSpec spec;
  std::size_t n_ag = 0;
  std::size_t n_dg = 0;
  std::vector<ScanCell> cells;
  std::uint64_t spec_hash = 0;

  const ScanCell& at(std::size_t i, std::size_t j) const { return cells[i * n_dg + j]; }

  /// Cell at the given lengths, if they fall on the grid.
  const ScanCell* find(double l_ag, double l_dg) const {
    const double fi = (l_ag - spec.ag_min) / spec.resolution, fj = (l_dg - spec.dg_min) / spec.resolution;
    const long i = std::lround(fi), j = std::lround(fj);
    if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6) return nullptr;
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_ag || static_cast<std::size_t>(j) >= n_dg) return nullptr;
    return &at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
};

inline ScanCell evaluate_cell(double l_ag, double l_dg, std::span<const Point2> trace, double margin) {
  ScanCell c;
  c.l_ag = l_ag;
  c.l_dg = l_dg;
  const Feasibility f = check_feasibility(l_ag, l_dg, trace, margin);
  c.reason = f.reason;
  if (f.reason != Infeasibility::Grashof) {
    try {
      c.delta_theta_deg = delta_theta_max(l_ag, l_dg, trace).deg();
    } catch (const Error&) {
      c.reason = Infeasibility::Grashof;
    }
  }
  if (c.reason == Infeasibility::None && c.delta_theta_deg && *c.delta_theta_deg > 180.0) {
    c.reason = Infeasibility::Discontinuous;
  }
  c.feasible = c.reason == Infeasibility::None;
  return c;
}

/// Exhaustive grid scan. `threads` = 0 picks hardware concurrency; cells are
/// claimed in `stride` order, which changes scheduling but never the result.
inline ScanResult scan(const ScanSpec& spec, unsigned threads = 0, bool reverse_order = false) {
  spec.validate();
  const auto tr = d_trace(spec);
  ScanResult res;
  res.spec = spec;
  res.n_ag = spec.ag_count();
  res.n_dg = spec.dg_count();
  res.spec_hash = spec.hash();
  res.cells.resize(res.n_ag * res.n_dg);

  const std::size_t total = res.cells.size();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t idx = reverse_order ? total - 1 - k : k;
      const std::size_t i = idx / res.n_dg, j = idx % res.n_dg;
      res.cells[idx] = evaluate_cell(spec.ag_at(i), spec.dg_at(j), tr, spec.workspace_margin);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return res;
}

/// Feasible cell with the largest delta_theta_max (first in grid order on ties).
inline std::optional<ScanCell> argmax(const ScanResult& r) {
  std::optional<ScanCell> best;
  for (const auto& c : r.cells) {
    if (c.feasible && (!best || *c.delta_theta_deg > *best->delta_theta_deg)) best = c;
  }
  return best;
}

struct SensitivityReport {
  double r = 0.0;                  // pooled Pearson, L_AG vs delta_theta_max
  double slope_ag = 0.0;           // deg/mm, slope of the L_AG upper-envelope curve
  double slope_dg_below_60 = 0.0;  // deg/mm, slope of the L_DG mean curve for L_DG < 60
  double pooled_slope_ag = 0.0;
  double pooled_slope_dg_below_60 = 0.0;
  std::vector<Point2> ag_envelope;  // (L_AG, max over feasible L_DG)
  std::vector<Point2> ag_mean;      // (L_AG, mean over feasible L_DG)
  std::vector<Point2> dg_mean;      // (L_DG, mean over feasible L_AG)
};

namespace detail {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

inline LinearFit least_squares(std::span<const Point2> pts, const char* what) {
  if (pts.size() < 2) throw Error(Errc::InsufficientData, std::string("fewer than 2 feasible points for ") + what);
  double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::InsufficientData, std::string("no spread in the regressor for ") + what);
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  return f;
}

}  // namespace detail

inline SensitivityReport sensitivity(const ScanResult& res, double dg_split = 60.0) {
  SensitivityReport rep;
  std::vector<Point2> pooled_ag, pooled_dg_low;
  std::map<double, std::pair<double, int>> dg_acc;
  for (std::size_t i = 0; i < res.n_ag; ++i) {
    double mx = -1e300, sum = 0.0;
    int cnt = 0;
    for (std::size_t j = 0; j < res.n_dg; ++j) {
      const auto& c = res.at(i, j);
      if (!c.feasible) continue;
      const double v = *c.delta_theta_deg;
      pooled_ag.push_back({c.l_ag, v});
      if (c.l_dg < dg_split) pooled_dg_low.push_back({c.l_dg, v});
      auto& acc = dg_acc[c.l_dg];
      acc.first += v;
      acc.second += 1;
      mx = std::max(mx, v);
      sum += v;
      ++cnt;
    }
    if (cnt > 0) {
      rep.ag_envelope.push_back({res.spec.ag_at(i), mx});
      rep.ag_mean.push_back({res.spec.ag_at(i), sum / cnt});
    }
  }
  for (const auto& [dg, acc] : dg_acc) rep.dg_mean.push_back({dg, acc.first / acc.second});

  const auto pooled = detail::least_squares(pooled_ag, "pooled L_AG");
  rep.r = pooled.r;
  rep.pooled_slope_ag = pooled.slope;
  rep.pooled_slope_dg_below_60 = detail::least_squares(pooled_dg_low, "pooled L_DG below split").slope;
  rep.slope_ag = detail::least_squares(rep.ag_envelope, "L_AG envelope").slope;
  std::vector<Point2> dg_low;
  for (const auto& p : rep.dg_mean) {
    if (p.x < dg_split) dg_low.push_back(p);
  }
  rep.slope_dg_below_60 = detail::least_squares(dg_low, "L_DG mean below split").slope;
  return rep;
}

inline void write_csv(std::ostream& os, const ScanResult& r) {
  os << "L_AG_mm,L_DG_mm,feasible,delta_theta_max_deg,reason\n";
  for (const auto& c : r.cells) {
    os << detail::format6(c.l_ag) << ',' << detail::format6(c.l_dg) << ',' << (c.feasible ? 1 : 0) << ',';
    if (c.delta_theta_deg) os << detail::format6(*c.delta_theta_deg);
    os << ',' << to_string(c.reason) << '\n';
  }
}

/// Rebuilds a result from its CSV for the given spec (cache reload). The
/// lengths and delta values round-trip at the CSV's 6 significant digits.
inline ScanResult read_csv(std::istream& is, const ScanSpec& spec) {
  ScanResult r;
  r.spec = spec;
  r.n_ag = spec.ag_count();
  r.n_dg = spec.dg_count();
  r.spec_hash = spec.hash();
  std::string line;
  if (!std::getline(is, line) || line != "L_AG_mm,L_DG_mm,feasible,delta_theta_max_deg,reason") {
    throw Error(Errc::Config, "scan CSV header mismatch");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() == 4) f.emplace_back();
    if (f.size() != 5) throw Error(Errc::Config, "malformed scan CSV row: " + line);
    ScanCell c;
    c.l_ag = std::stod(f[0]);
    c.l_dg = std::stod(f[1]);
    c.feasible = f[2] == "1";
    if (!f[3].empty()) c.delta_theta_deg = std::stod(f[3]);
    if (f[4] == "grashof") c.reason = Infeasibility::Grashof;
    else if (f[4] == "workspace") c.reason = Infeasibility::Workspace;
    else if (f[4] == "discontinuous") c.reason = Infeasibility::Discontinuous;
    r.cells.push_back(c);
  }
  if (r.cells.size() != r.n_ag * r.n_dg) throw Error(Errc::Config, "scan CSV cell count does not match spec");
  return r;
}

inline void write_svg(std::ostream& os, const ScanResult& r, std::optional<std::string> stamp = std::nullopt) {
  // x: L_AG, y: L_DG; values row-major in y.
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.n_ag; ++i) xs.push_back(r.spec.ag_at(i));
  for (std::size_t j = 0; j < r.n_dg; ++j) ys.push_back(r.spec.dg_at(j));
  std::vector<std::optional<double>> vals(r.n_ag * r.n_dg);
  for (std::size_t i = 0; i < r.n_ag; ++i) {
    for (std::size_t j = 0; j < r.n_dg; ++j) {
      const auto& c = r.at(i, j);
      if (c.feasible) vals[j * r.n_ag + i] = c.delta_theta_deg;
    }
  }
  std::vector<Point2> marks;
  if (auto best = argmax(r)) marks.push_back({best->l_ag, best->l_dg});
  svg::PlotOptions opt{"Push-angle sweep over the (L_AG, L_DG) plane (grey: infeasible)", "L_AG (mm)", "L_DG (mm)",
                       false, std::move(stamp)};
  svg::heatmap(os, xs, ys, vals, opt, marks);
}

}  // namespace hockens
