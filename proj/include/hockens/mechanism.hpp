#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hockens/error.hpp"
#include "hockens/geometry.hpp"
#include "hockens/hoeckens.hpp"

namespace hockens {

/// Composite finger: Hoeckens stage, double parallelogram, push four-bar
/// (A-G-D) with the Q2 trigger, and the distal phalange hinged at D.
/// Defaults are the published design values.
struct FingerConfig {
  HoeckensParams hoeckens = HoeckensParams::paper_proportions(30.0);
  double l_ag = 125.0;
  double l_gd = 50.0;
  /// Push angle at which stopper Q2 meets the trigger surface.
  Angle stopper_q2 = Angle::deg(81.5);
  /// Stop face of Q3 in the parallel-link frame; no kinematic effect.
  Angle stopper_q3 = Angle::deg(60.0);
  double delta_h1 = 19.0;
  double delta_h2 = 68.0;
  double h_max = 180.0;
  Angle posture_sweep = Angle::deg(35.0);  // delta_theta1_max
  double phalange_length = 55.0;           // l_DI
  Point2 fingertip_offset{0.0, -55.0};     // I relative to D, phalange frame
  Angle stroke_start = Angle::deg(68.51);
  Angle stroke_end = Angle::deg(156.56);
  Angle aux_base = Angle::deg(150.0);  // direction of auxiliary base AE
  double workspace_margin = 45.0;

  double h_trigger() const { return h_max - delta_h1; }
  double h_min() const { return h_max - delta_h1 - delta_h2; }

  void validate() const {
    hoeckens.validate();
    if (!(l_ag > 0.0 && l_gd > 0.0 && phalange_length >= 0.0 && h_max > 0.0)) {
      throw Error(Errc::InvalidArgument, "finger lengths must be positive");
    }
    if (!(delta_h1 > 0.0 && delta_h1 < delta_h2)) throw Error(Errc::InvalidArgument, "require 0 < delta_h1 < delta_h2");
    if (!(posture_sweep.rad() > 0.0)) throw Error(Errc::InvalidArgument, "posture sweep must be positive");
    if (!(stroke_start < stroke_end)) throw Error(Errc::InvalidArgument, "stroke start must precede stroke end");
  }

  /// Phalange of length l with the fingertip straight below D.
  FingerConfig with_phalange(double l) const {
    FingerConfig c = *this;
    c.phalange_length = l;
    c.fingertip_offset = {0.0, -l};
    return c;
  }
};

enum class MotionStage { IdleVertical, Triggered, FullyDeployed };

constexpr std::string_view to_string(MotionStage s) {
  switch (s) {
    case MotionStage::IdleVertical: return "IdleVertical";
    case MotionStage::Triggered: return "Triggered";
    case MotionStage::FullyDeployed: return "FullyDeployed";
  }
  return "?";
}

/// Joint G of the push four-bar: lower branch of circle(A, l_AG) ∩ circle(D, l_GD).
inline Point2 push_joint(const FingerConfig& cfg, Point2 d) {
  return circle_intersection({cfg.hoeckens.a, cfg.l_ag, d, cfg.l_gd}).lower();
}

struct FingerState {
  HoeckensState hoeckens;
  Point2 g;
  Angle push;     // orientation of G->D from +y
  Angle posture;  // phalange tilt from vertical, outward positive
  Point2 d_prime; // far end of the translating link DD'
  Point2 tip;     // fingertip I
};

/// Posture of the phalange for a given push angle: zero until Q2 engages,
/// then follows the push link, capped at the posture sweep.
inline Angle posture_for_push(const FingerConfig& cfg, Angle push) {
  const double raw = cfg.stopper_q2.rad() - push.rad();
  return Angle::rad(std::clamp(raw, 0.0, cfg.posture_sweep.rad()));
}

inline FingerState finger_state(const FingerConfig& cfg, Angle theta1, bool pushed = true) {
  FingerState s;
  s.hoeckens = solve(cfg.hoeckens, theta1);
  const Point2 d = s.hoeckens.d;
  s.g = push_joint(cfg, d);
  s.push = push_angle(s.g, d);
  s.posture = pushed ? posture_for_push(cfg, s.push) : Angle{};
  // Parallelograms ACC'E and CC'D'D: C' = C + (E - A), D' = D + (C' - C).
  const Point2 e = cfg.hoeckens.a + cfg.hoeckens.l_ab * Point2{std::cos(cfg.aux_base.rad()), std::sin(cfg.aux_base.rad())};
  const Point2 c_prime = cfg.hoeckens.c + (e - cfg.hoeckens.a);
  s.d_prime = d + (c_prime - cfg.hoeckens.c);
  s.tip = d + rotate(cfg.fingertip_offset, s.posture.rad());
  return s;
}

inline Point2 fingertip(const FingerConfig& cfg, Angle theta1, bool pushed = true) {
  return finger_state(cfg, theta1, pushed).tip;
}

/// Crank angle at which Q2 engages (raw posture crosses zero), if inside the stroke.
inline std::optional<Angle> trigger_angle(const FingerConfig& cfg) {
  auto raw = [&](double t) {
    const auto s = finger_state(cfg, Angle::rad(t), false);
    return cfg.stopper_q2.rad() - s.push.rad();
  };
  const double lo = cfg.stroke_start.rad(), hi = cfg.stroke_end.rad();
  if (raw(lo) >= 0.0) return cfg.stroke_start;
  // Coarse scan for the first sign change, then bisection.
  const int n = 2000;
  double a = lo;
  for (int k = 1; k <= n; ++k) {
    const double b = lo + (hi - lo) * k / n;
    if (raw(b) >= 0.0) {
      double x0 = a, x1 = b;
      for (int it = 0; it < 200 && x1 - x0 > 1e-15; ++it) {
        const double m = 0.5 * (x0 + x1);
        (raw(m) >= 0.0 ? x1 : x0) = m;
      }
      return Angle::rad(x1);
    }
    a = b;
  }
  return std::nullopt;
}

namespace detail {

// Rise of D above its stroke-start height at the trigger and at stroke end.
struct HeightMap {
  Angle trigger;
  double y0 = 0.0;
  double r_trig = 0.0;
  double r_end = 0.0;

  explicit HeightMap(const FingerConfig& cfg)
      : trigger(trigger_angle(cfg).value_or(cfg.stroke_end)),
        y0(solve(cfg.hoeckens, cfg.stroke_start).d.y),
        r_trig(solve(cfg.hoeckens, trigger).d.y - y0),
        r_end(solve(cfg.hoeckens, cfg.stroke_end).d.y - y0) {}

  double height(const FingerConfig& cfg, Angle theta1) const {
    const double r = solve(cfg.hoeckens, theta1).d.y - y0;
    if (theta1 <= trigger) {
      if (r_trig <= 0.0) return cfg.h_max;
      return cfg.h_max - cfg.delta_h1 * r / r_trig;
    }
    return cfg.h_trigger() - cfg.delta_h2 * (r - r_trig) / (r_end - r_trig);
  }
};

}  // namespace detail

/// Pressing height for a crank angle: piecewise linear in D's vertical rise,
/// h_max at stroke start, h_max - delta_h1 at the Q2 trigger, h_min at stroke end.
inline double pressing_height(const FingerConfig& cfg, Angle theta1) {
  return detail::HeightMap(cfg).height(cfg, theta1);
}

/// Inverse of pressing_height over the stroke (D rises monotonically there).
inline Angle theta_at_height(const FingerConfig& cfg, double h) {
  if (!(h >= cfg.h_min() - 1e-12 && h <= cfg.h_max + 1e-12)) {
    throw Error(Errc::OutOfStroke, "pressing height " + std::to_string(h) + " mm outside [" +
                                       std::to_string(cfg.h_min()) + ", " + std::to_string(cfg.h_max) + "]");
  }
  const detail::HeightMap map(cfg);
  if (h >= cfg.h_max) return cfg.stroke_start;
  if (h == cfg.h_trigger()) return map.trigger;
  if (h <= cfg.h_min()) return cfg.stroke_end;
  double a = cfg.stroke_start.rad(), b = cfg.stroke_end.rad();
  if (h > cfg.h_trigger()) b = map.trigger.rad();
  else a = map.trigger.rad();
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    (map.height(cfg, Angle::rad(m)) > h ? a : b) = m;
  }
  return Angle::rad(0.5 * (a + b));
}

struct PostureReading {
  Angle posture;
  MotionStage stage = MotionStage::IdleVertical;
};

inline MotionStage stage_for_height(const FingerConfig& cfg, double h) {
  if (h > cfg.h_trigger()) return MotionStage::IdleVertical;
  if (h > cfg.h_min()) return MotionStage::Triggered;
  return MotionStage::FullyDeployed;
}

inline PostureReading phalange_posture(const FingerConfig& cfg, double h) {
  const Angle t = theta_at_height(cfg, h);
  return {finger_state(cfg, t, true).posture, stage_for_height(cfg, h)};
}

struct Amplification {
  Angle input_sweep;   // rotation of rod BD over the stroke
  Angle output_sweep;  // push-angle sweep over the stroke
  double ratio = 0.0;
};

inline Amplification rocker_amplification(const FingerConfig& cfg, Angle step = Angle::deg(0.01)) {
  const detail::DegreeGrid grid(cfg.stroke_start.deg(), step.deg());
  std::size_t n = grid.count(cfg.stroke_end.deg());
  double t2_lo = 1e300, t2_hi = -1e300, p_lo = 1e300, p_hi = -1e300;
  auto take = [&](Angle t) {
    const auto s = finger_state(cfg, t, false);
    t2_lo = std::min(t2_lo, s.hoeckens.theta2.rad());
    t2_hi = std::max(t2_hi, s.hoeckens.theta2.rad());
    p_lo = std::min(p_lo, s.push.rad());
    p_hi = std::max(p_hi, s.push.rad());
  };
  for (std::size_t k = 0; k < n; ++k) take(Angle::deg(grid.at(k)));
  take(cfg.stroke_end);
  Amplification a;
  a.input_sweep = Angle::rad(t2_hi - t2_lo);
  a.output_sweep = Angle::rad(p_hi - p_lo);
  a.ratio = a.output_sweep.rad() / a.input_sweep.rad();
  return a;
}

struct TrajectorySample {
  double t = 0.0;
  Angle theta1;
  Point2 tip;
  Point2 v;
  Angle posture;
  MotionStage stage = MotionStage::IdleVertical;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::uint64_t config_hash = 0;
  double omega1_deg_s = 0.0;
  double dt = 0.0;
  bool pushed = true;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string format6(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::uint64_t config_hash(const FingerConfig& c) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                c.hoeckens.unit_length, c.hoeckens.l_ab, c.hoeckens.l_ac, c.hoeckens.l_bd, c.hoeckens.c.x,
                c.hoeckens.c.y, c.l_ag, c.l_gd, c.stopper_q2.rad(), c.stopper_q3.rad(), c.delta_h1, c.delta_h2,
                c.h_max, c.posture_sweep.rad(), c.phalange_length, c.fingertip_offset.x, c.fingertip_offset.y,
                c.stroke_start.rad(), c.stroke_end.rad(), c.aux_base.rad(), c.workspace_margin, c.hoeckens.a.x);
  return detail::fnv1a(buf);
}

/// Sample-wise kinematic simulation: theta1 = stroke_start + omega1 * t,
/// t = k * dt, plus a final sample at the stroke end. Velocities by central
/// differences on the sample grid (one-sided at the ends).
inline Trajectory simulate(const FingerConfig& cfg, double omega1_deg_s, double dt, bool pushed) {
  if (!(omega1_deg_s > 0.0)) throw Error(Errc::InvalidArgument, "omega1 must be positive");
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "dt must be positive");
  const double duration = (cfg.stroke_end.deg() - cfg.stroke_start.deg()) / omega1_deg_s;
  const Angle trig = trigger_angle(cfg).value_or(Angle::rad(1e300));

  Trajectory tr;
  tr.config_hash = config_hash(cfg);
  tr.omega1_deg_s = omega1_deg_s;
  tr.dt = dt;
  tr.pushed = pushed;

  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > duration * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(duration);

  tr.samples.reserve(times.size());
  for (double t : times) {
    const Angle th = (t == duration) ? cfg.stroke_end : Angle::deg(cfg.stroke_start.deg() + omega1_deg_s * t);
    TrajectorySample s;
    s.t = t;
    s.theta1 = th;
    try {
      const FingerState fs = finger_state(cfg, th, pushed);
      s.tip = fs.tip;
      s.posture = fs.posture;
    } catch (const Error& e) {
      throw Error(e.code(), "simulation sample t=" + std::to_string(t) + " s: " + e.what());
    }
    if (!pushed) s.stage = MotionStage::IdleVertical;
    else if (t == duration) s.stage = MotionStage::FullyDeployed;
    else if (th >= trig) s.stage = MotionStage::Triggered;
    else s.stage = MotionStage::IdleVertical;
    tr.samples.push_back(s);
  }

  auto& smp = tr.samples;
  const std::size_t n = smp.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    if (a == b) continue;
    const double h = smp[b].t - smp[a].t;
    smp[i].v = (1.0 / h) * (smp[b].tip - smp[a].tip);
  }
  return tr;
}

/// Largest upward step in vx, reported at the velocity peak that follows it.
struct VelocityJump {
  double t = 0.0;
  double vx = 0.0;
};

inline VelocityJump velocity_jump(const Trajectory& tr) {
  const auto& s = tr.samples;
  if (s.size() < 3) throw Error(Errc::DegeneratePath, "trajectory too short for a velocity event");
  std::size_t k = 0;
  double best = -1e300;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dv = s[i + 1].v.x - s[i].v.x;
    if (dv > best) {
      best = dv;
      k = i + 1;
    }
  }
  while (k + 1 < s.size() && s[k + 1].v.x > s[k].v.x) ++k;
  return {s[k].t, s[k].v.x};
}

/// Fingertip path over the stroke at a fixed crank step (end sample included).
inline std::vector<Point2> fingertip_path(const FingerConfig& cfg, bool pushed, Angle step = Angle::deg(0.01)) {
  const detail::DegreeGrid grid(cfg.stroke_start.deg(), step.deg());
  const std::size_t n = grid.count(cfg.stroke_end.deg());
  std::vector<Point2> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) out.push_back(fingertip(cfg, Angle::deg(grid.at(k)), pushed));
  if (std::abs(grid.at(n - 1) - cfg.stroke_end.deg()) > 1e-9) out.push_back(fingertip(cfg, cfg.stroke_end, pushed));
  return out;
}

/// Area enclosed by the fingertip path over the stroke, closed from its end
/// back to its start.
inline double workspace_area(const FingerConfig& cfg, bool pushed = true, Angle step = Angle::deg(0.01)) {
  const auto path = fingertip_path(cfg, pushed, step);
  std::vector<Point2> distinct;
  for (const Point2& p : path) {
    if (distinct.empty() || distance(distinct.back(), p) > kEpsGeo) distinct.push_back(p);
  }
  if (distinct.size() < 3) throw Error(Errc::DegeneratePath, "fingertip path has fewer than 3 distinct vertices");
  return shoelace_area(distinct);
}

inline void write_csv(std::ostream& os, const Trajectory& tr) {
  os << "t_s,theta1_deg,x_mm,y_mm,vx_mm_s,vy_mm_s,posture_deg,stage\n";
  for (const auto& s : tr.samples) {
    os << detail::format6(s.t) << ',' << detail::format6(s.theta1.deg()) << ',' << detail::format6(s.tip.x) << ','
       << detail::format6(s.tip.y) << ',' << detail::format6(s.v.x) << ',' << detail::format6(s.v.y) << ','
       << detail::format6(s.posture.deg()) << ',' << to_string(s.stage) << '\n';
  }
}

}  // namespace hockens
