#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hockens/error.hpp"
#include "hockens/geometry.hpp"
#include "hockens/mechanism.hpp"
#include "hockens/svg.hpp"

namespace hockens {

/// Return springs. k1 is the torsion spring on the Hoeckens crank; k2 is the
/// tension spring between parallel link 4 and the push link DG.
struct SpringParams {
  double k1 = 50.0;                       // N*mm/rad
  Angle k1_pretension = Angle::deg(40.0);
  double k2 = 0.5;                        // N/mm
  Point2 k2_anchor{-20.0, 20.0};          // fixed end, relative to D on parallel link 4
  double k2_arm = 20.0;                   // moving end, distance from D along D->G
  std::optional<double> k2_free_length;   // default: length at stroke start minus 2 mm

  void validate() const {
    if (!(k1 >= 0.0 && k2 >= 0.0 && k1_pretension.rad() >= 0.0)) {
      throw Error(Errc::InvalidArgument, "spring stiffness and pre-tension must be non-negative");
    }
  }
};

struct ForceQuery {
  Angle theta1;
  double r = 0.0;         // contact distance from D along the phalange, mm
  double p_press = 1.0;   // W
  double omega1_deg_s = 10.0;
};

/// Speed maps per unit crank rate.
struct KinematicDerivatives {
  double f_prime = 0.0;  // |dD/dtheta1|, mm/rad
  double g_prime = 0.0;  // push-link rotation, outward positive, rad/rad
  double h_prime = 0.0;  // k2 spring length rate, mm/rad
};

inline constexpr double kDerivativeStep = 1e-4;  // rad
inline constexpr double kEpsForce = 1e-6;        // mm/rad

/// Deflection of k1 from its free pose: pre-tension plus crank travel since stroke start.
inline double spring_deflection(const FingerConfig& cfg, const SpringParams& sp, Angle theta1) {
  return sp.k1_pretension.rad() + (theta1.rad() - cfg.stroke_start.rad());
}

inline double spring_length(const FingerConfig& cfg, const SpringParams& sp, Angle theta1) {
  const Point2 d = solve(cfg.hoeckens, theta1).d;
  const Point2 g = push_joint(cfg, d);
  const Point2 anchor = d + sp.k2_anchor;
  const Point2 attach = d + (sp.k2_arm / distance(g, d)) * (g - d);
  return distance(anchor, attach);
}

inline double spring_free_length(const FingerConfig& cfg, const SpringParams& sp) {
  return sp.k2_free_length ? *sp.k2_free_length : spring_length(cfg, sp, cfg.stroke_start) - 2.0;
}

/// Outward rotation of the push link, g(theta1) = -push angle.
inline double push_rotation(const FingerConfig& cfg, Angle theta1) {
  const Point2 d = solve(cfg.hoeckens, theta1).d;
  return -push_angle(push_joint(cfg, d), d).rad();
}

inline KinematicDerivatives derivatives(const FingerConfig& cfg, const SpringParams& sp, Angle theta1,
                                        double delta = kDerivativeStep) {
  const Angle lo = Angle::rad(theta1.rad() - delta), hi = Angle::rad(theta1.rad() + delta);
  try {
    KinematicDerivatives k;
    const Point2 dd = solve(cfg.hoeckens, hi).d - solve(cfg.hoeckens, lo).d;
    k.f_prime = dd.norm() / (2.0 * delta);
    k.g_prime = (push_rotation(cfg, hi) - push_rotation(cfg, lo)) / (2.0 * delta);
    k.h_prime = (spring_length(cfg, sp, hi) - spring_length(cfg, sp, lo)) / (2.0 * delta);
    return k;
  } catch (const Error& e) {
    throw Error(Errc::NearSingularity, "closure fails within " + std::to_string(delta) + " rad of theta1=" +
                                           std::to_string(theta1.deg()) + " deg: " + e.what());
  }
}

/// Power terms of the balance, all in W.
struct PowerBalance {
  double p_k1 = 0.0;
  double p_k2 = 0.0;
  double p_di = 0.0;
  double total() const { return p_k1 + p_k2 + p_di; }
};

inline PowerBalance power_balance(const FingerConfig& cfg, const SpringParams& sp, const ForceQuery& q, double f_n) {
  const double w1 = Angle::deg(q.omega1_deg_s).rad();
  const auto k = derivatives(cfg, sp, q.theta1);
  const double dx1 = spring_length(cfg, sp, q.theta1) - spring_free_length(cfg, sp);
  PowerBalance p;
  // N*mm/s -> W
  p.p_k1 = sp.k1 * spring_deflection(cfg, sp, q.theta1) * w1 * 1e-3;
  p.p_k2 = sp.k2 * dx1 * (w1 * k.h_prime) * 1e-3;
  p.p_di = (f_n * (w1 * k.f_prime) + f_n * q.r * (w1 * k.g_prime)) * 1e-3;
  return p;
}

/// Normal grasp force from the power balance, N.
inline double grasp_force(const FingerConfig& cfg, const SpringParams& sp, const ForceQuery& q) {
  if (!(q.omega1_deg_s > 0.0)) throw Error(Errc::InvalidArgument, "omega1 must be positive");
  const double w1 = Angle::deg(q.omega1_deg_s).rad();
  const auto k = derivatives(cfg, sp, q.theta1);
  const double den = k.f_prime + q.r * k.g_prime;
  if (!(std::abs(den) > kEpsForce)) {
    throw Error(Errc::TransmissionSingularity, "f' + r g' vanishes at theta1=" + std::to_string(q.theta1.deg()));
  }
  const double dx1 = spring_length(cfg, sp, q.theta1) - spring_free_length(cfg, sp);
  const double num = q.p_press * 1e3 / w1 - sp.k1 * spring_deflection(cfg, sp, q.theta1) - sp.k2 * dx1 * k.h_prime;
  return num / den;
}

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 1;

  /// Node i; a doubled grid (2n-1 nodes) reproduces these values bit for bit.
  double at(std::size_t i) const {
    if (n <= 1) return lo;
    const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
    return lo + (hi - lo) * frac;
  }
  GridAxis refined() const { return {lo, hi, n <= 1 ? 1 : 2 * n - 1}; }
};

/// F_N over (P_press, r); singular nodes are empty. Row-major in r.
struct ForceSurface {
  Angle theta1;
  double omega1_deg_s = 10.0;
  GridAxis p_axis;
  GridAxis r_axis;
  std::vector<std::optional<double>> values;

  const std::optional<double>& at(std::size_t ip, std::size_t ir) const { return values[ir * p_axis.n + ip]; }
};

inline ForceSurface force_surface(const FingerConfig& cfg, const SpringParams& sp, Angle theta1, double omega1_deg_s,
                                  GridAxis p_axis, GridAxis r_axis) {
  if (p_axis.n == 0 || r_axis.n == 0) throw Error(Errc::InvalidArgument, "force grid must have at least one node");
  ForceSurface s{theta1, omega1_deg_s, p_axis, r_axis, {}};
  s.values.resize(p_axis.n * r_axis.n);
  for (std::size_t ir = 0; ir < r_axis.n; ++ir) {
    for (std::size_t ip = 0; ip < p_axis.n; ++ip) {
      try {
        s.values[ir * p_axis.n + ip] = grasp_force(cfg, sp, {theta1, r_axis.at(ir), p_axis.at(ip), omega1_deg_s});
      } catch (const Error& e) {
        if (e.code() != Errc::TransmissionSingularity) throw;
      }
    }
  }
  return s;
}

inline void write_csv(std::ostream& os, const ForceSurface& s) {
  os << "P_press_W,r_mm,F_N_N\n";
  for (std::size_t ir = 0; ir < s.r_axis.n; ++ir) {
    for (std::size_t ip = 0; ip < s.p_axis.n; ++ip) {
      os << detail::format6(s.p_axis.at(ip)) << ',' << detail::format6(s.r_axis.at(ir)) << ',';
      const auto& v = s.at(ip, ir);
      if (v) os << detail::format6(*v);
      else os << "singular";
      os << '\n';
    }
  }
}

inline void write_svg(std::ostream& os, const ForceSurface& s, std::optional<std::string> stamp = std::nullopt) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.p_axis.n; ++i) xs.push_back(s.p_axis.at(i));
  for (std::size_t j = 0; j < s.r_axis.n; ++j) ys.push_back(s.r_axis.at(j));
  char title[96];
  std::snprintf(title, sizeof title, "Grasp force F_N (N) at theta1 = %.2f deg", s.theta1.deg());
  svg::heatmap(os, xs, ys, s.values, {title, "P_press (W)", "r (mm)", false, std::move(stamp)});
}

}  // namespace hockens
