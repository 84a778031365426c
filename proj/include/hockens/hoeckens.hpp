#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hockens/error.hpp"
#include "hockens/geometry.hpp"

namespace hockens {

/// Offset Hoeckens stage: crank AB about fixed pivot A, rod BD sliding
/// through a chute at fixed pivot C.
struct HoeckensParams {
  double unit_length = 30.0;  // l
  double l_ab = 30.0;
  double l_ac = 45.0;
  double l_bd = 180.0;
  Point2 a{0.0, 0.0};
  Point2 c{45.0, 0.0};

  /// l_AB = l, l_AC = 1.5 l, l_BD = 6 l with C on the +x base axis.
  static HoeckensParams paper_proportions(double l) {
    HoeckensParams p;
    p.unit_length = l;
    p.l_ab = l;
    p.l_ac = 1.5 * l;
    p.l_bd = 6.0 * l;
    p.a = {0.0, 0.0};
    p.c = {1.5 * l, 0.0};
    return p;
  }

  /// Throws InvalidArgument on non-positive lengths or a C pivot not at l_AC
  /// from A; optionally enforces the 1 : 1.5 : 6 proportions.
  void validate(bool paper_proportions_flag = false) const {
    if (!(unit_length > 0.0 && l_ab > 0.0 && l_ac > 0.0 && l_bd > 0.0)) {
      throw Error(Errc::InvalidArgument, "Hoeckens lengths must be positive");
    }
    if (std::abs(distance(a, c) - l_ac) > 1e-9 * std::max(1.0, l_ac)) {
      throw Error(Errc::InvalidArgument, "|C - A| must equal l_AC");
    }
    if (paper_proportions_flag) {
      const double tol = 1e-12 * unit_length;
      if (std::abs(l_ab - unit_length) > tol || std::abs(l_ac - 1.5 * unit_length) > tol ||
          std::abs(l_bd - 6.0 * unit_length) > tol) {
        throw Error(Errc::InvalidArgument, "lengths do not follow l : 1.5l : 6l");
      }
    }
  }
};

struct HoeckensState {
  Angle theta1;
  Angle theta2;  // direction of B->C (and B->D), (-180°, 180°]
  double l_bc = 0.0;
  Point2 b;
  Point2 d;
};

inline HoeckensState solve(const HoeckensParams& p, Angle theta1) {
  HoeckensState s;
  s.theta1 = theta1;
  s.b = p.a + p.l_ab * Point2{std::cos(theta1.rad()), std::sin(theta1.rad())};
  const Point2 bc = p.c - s.b;
  s.l_bc = bc.norm();
  if (s.l_bc < kEpsGeo) {
    throw Error(Errc::SingularConfiguration, "B coincides with C at theta1=" + std::to_string(theta1.deg()));
  }
  if (s.l_bc >= p.l_bd) {
    throw Error(Errc::RodTooShort, "rod BD does not reach past C at theta1=" + std::to_string(theta1.deg()));
  }
  const Point2 u = (1.0 / s.l_bc) * bc;
  s.theta2 = Angle::rad(std::atan2(u.y, u.x));
  s.d = p.c + (p.l_bd - s.l_bc) * u;
  return s;
}

namespace detail {

// Samples on a grid that is exact in micro-degrees when the step allows it,
// so grids with commensurate steps produce bit-identical shared angles.
struct DegreeGrid {
  double lo_deg = 0.0;
  double step_deg = 0.0;
  long long lo_udeg = 0;
  long long step_udeg = 0;
  bool exact = false;

  DegreeGrid(double lo, double step) : lo_deg(lo), step_deg(step) {
    const double lu = lo * 1e6, su = step * 1e6;
    if (std::abs(lu - std::llround(lu)) < 1e-6 && std::abs(su - std::llround(su)) < 1e-6 &&
        std::abs(lu) < 1e15 && su < 1e15) {
      lo_udeg = std::llround(lu);
      step_udeg = std::llround(su);
      exact = step_udeg > 0;
    }
  }

  double at(std::size_t k) const {
    if (exact) return static_cast<double>(lo_udeg + static_cast<long long>(k) * step_udeg) / 1e6;
    return lo_deg + static_cast<double>(k) * step_deg;
  }

  std::size_t count(double hi_deg) const {
    if (exact) {
      const double hu = hi_deg * 1e6;
      const long long hi_udeg = std::llround(hu);
      if (std::abs(hu - static_cast<double>(hi_udeg)) < 1e-6) {
        if (hi_udeg < lo_udeg) return 0;
        return static_cast<std::size_t>((hi_udeg - lo_udeg) / step_udeg) + 1;
      }
    }
    if (hi_deg < lo_deg) return 0;
    return static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  }
};

}  // namespace detail

struct TracePoint {
  Angle theta1;
  Point2 d;
};

/// Point-D path sampled at lo, lo+step, ... (floor(range/step)+1 samples).
inline std::vector<TracePoint> trace(const HoeckensParams& p, Angle lo, Angle hi, Angle step) {
  if (!(step.rad() > 0.0)) throw Error(Errc::InvalidArgument, "invalid step");
  const detail::DegreeGrid grid(lo.deg(), step.deg());
  const std::size_t n = grid.count(hi.deg());
  std::vector<TracePoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Angle t = Angle::deg(grid.at(k));
    try {
      out.push_back({t, solve(p, t).d});
    } catch (const Error& e) {
      throw Error(e.code(), std::string("trace sample theta1=") + std::to_string(t.deg()) + " deg: " + e.what());
    }
  }
  return out;
}

/// Total-least-squares line through a point set with its residual statistics.
struct LineFit {
  Point2 point;      // centroid
  Point2 direction;  // unit
  double max_deviation = 0.0;  // max perpendicular distance
  double spread = 0.0;         // peak-to-peak perpendicular residual
};

namespace detail {

struct Moments {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
};

inline LineFit fit_from_moments(const Moments& m, Point2 origin) {
  const double mx = m.sx / m.n, my = m.sy / m.n;
  const double cxx = m.sxx / m.n - mx * mx;
  const double cyy = m.syy / m.n - my * my;
  const double cxy = m.sxy / m.n - mx * my;
  // Principal axis of the 2x2 covariance.
  const double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  LineFit f;
  f.point = origin + Point2{mx, my};
  f.direction = {std::cos(angle), std::sin(angle)};
  return f;
}

inline void residuals(LineFit& f, std::span<const Point2> pts) {
  const Point2 n{-f.direction.y, f.direction.x};
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const Point2& p : pts) {
    const double r = dot(p - f.point, n);
    if (first) {
      lo = hi = r;
      first = false;
    } else {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  f.max_deviation = std::max(std::abs(lo), std::abs(hi));
  f.spread = hi - lo;
}

}  // namespace detail

inline LineFit fit_line(std::span<const Point2> pts) {
  if (pts.size() < 2) throw Error(Errc::InvalidArgument, "line fit needs at least 2 points");
  const Point2 origin = pts.front();
  detail::Moments m;
  for (const Point2& q : pts) {
    const Point2 p = q - origin;
    m.n += 1;
    m.sx += p.x;
    m.sy += p.y;
    m.sxx += p.x * p.x;
    m.syy += p.y * p.y;
    m.sxy += p.x * p.y;
  }
  LineFit f = detail::fit_from_moments(m, origin);
  detail::residuals(f, pts);
  return f;
}

struct LinearBand {
  Angle theta_lo;
  Angle theta_hi;
  double max_deviation = 0.0;  // in units of l
  double spread = 0.0;         // in units of l
  LineFit fit;                 // in mm
  std::size_t samples = 0;
};

namespace detail {

/// Segment tree over a point sequence; each node keeps the upper and lower
/// convex chains of its range so max(n . p) over any window costs O(log^2 n).
class HullTree {
 public:
  explicit HullTree(std::span<const Point2> pts) {
    while (size_ < pts.size()) size_ *= 2;
    nodes_.resize(2 * size_);
    for (std::size_t i = 0; i < pts.size(); ++i) nodes_[size_ + i] = {{pts[i]}, {pts[i]}};
    std::vector<Point2> merged;
    for (std::size_t k = size_ - 1; k >= 1; --k) {
      merged.clear();
      for (const std::size_t c : {2 * k, 2 * k + 1}) {
        merged.insert(merged.end(), nodes_[c].lower.begin(), nodes_[c].lower.end());
        merged.insert(merged.end(), nodes_[c].upper.begin(), nodes_[c].upper.end());
      }
      if (!merged.empty()) build(merged, nodes_[k]);
    }
  }

  /// max over p in [i, j) of dot(p, n).
  double max_dot(std::size_t i, std::size_t j, Point2 n) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = i + size_, r = j + size_; l < r; l >>= 1, r >>= 1) {
      if (l & 1) best = std::max(best, node_max(nodes_[l++], n));
      if (r & 1) best = std::max(best, node_max(nodes_[--r], n));
    }
    return best;
  }

 private:
  struct Node {
    std::vector<Point2> upper, lower;  // both sorted by (x, y)
  };

  static void build(std::vector<Point2>& v, Node& nd) {
    std::sort(v.begin(), v.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    auto turn = [](Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); };
    for (const Point2& p : v) {
      while (nd.lower.size() >= 2 && turn(nd.lower[nd.lower.size() - 2], nd.lower.back(), p) <= 0) nd.lower.pop_back();
      nd.lower.push_back(p);
      while (nd.upper.size() >= 2 && turn(nd.upper[nd.upper.size() - 2], nd.upper.back(), p) >= 0) nd.upper.pop_back();
      nd.upper.push_back(p);
    }
  }

  // Edge directions along a convex chain turn one way through less than a
  // half turn, so dot(edge, n) changes sign at most once.
  static double chain_max(const std::vector<Point2>& c, Point2 n) {
    double best = std::max(dot(c.front(), n), dot(c.back(), n));
    if (c.size() < 3 || dot(c[1] - c[0], n) <= 0) return best;
    std::size_t a = 0, b = c.size() - 1;
    while (b - a > 1) {
      const std::size_t m = (a + b) / 2;
      (dot(c[m + 1] - c[m], n) > 0 ? a : b) = m;
    }
    return std::max(best, dot(c[b], n));
  }

  static double node_max(const Node& nd, Point2 n) { return std::max(chain_max(nd.upper, n), chain_max(nd.lower, n)); }

  std::size_t size_ = 1;
  std::vector<Node> nodes_;
};

}  // namespace detail

/// Widest contiguous theta1 interval of the sampled D path whose max
/// perpendicular distance from its own TLS line is within `budget` (in units of l).
/// Ties go to the earliest start.
inline LinearBand linear_band(const HoeckensParams& p, Angle lo, Angle hi, Angle step, double budget) {
  if (!(step.rad() > 0.0)) throw Error(Errc::InvalidArgument, "invalid step");
  if (!(budget >= 0.0)) throw Error(Errc::InvalidArgument, "deviation budget must be non-negative");
  const auto tr = trace(p, lo, hi, step);
  const std::size_t n = tr.size();
  const double limit = budget * p.unit_length;

  // Work relative to the centroid to keep the moment sums well conditioned.
  Point2 origin{};
  for (const auto& t : tr) origin = origin + (1.0 / static_cast<double>(n)) * t.d;
  std::vector<Point2> pts;
  pts.reserve(n);
  for (const auto& t : tr) pts.push_back(t.d - origin);
  std::vector<detail::Moments> prefix(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 q = pts[i];
    detail::Moments m = prefix[i];
    m.n += 1;
    m.sx += q.x;
    m.sy += q.y;
    m.sxx += q.x * q.x;
    m.syy += q.y * q.y;
    m.sxy += q.x * q.y;
    prefix[i + 1] = m;
  }
  auto moments = [&](std::size_t i, std::size_t len) {
    const detail::Moments& a = prefix[i];
    const detail::Moments& b = prefix[i + len];
    return detail::Moments{b.n - a.n, b.sx - a.sx, b.sy - a.sy, b.sxx - a.sxx, b.syy - a.syy, b.sxy - a.sxy};
  };

  // The RMS residual about the TLS line never exceeds the max residual, so
  // windows whose smallest covariance eigenvalue exceeds limit^2 are skipped
  // without touching their points. Scaled by n^2 to avoid divisions; the
  // small slack keeps rounding from rejecting a borderline window.
  auto rms_exceeds = [&](const detail::Moments& m) {
    const double a = m.n * m.sxx - m.sx * m.sx;
    const double b = m.n * m.syy - m.sy * m.sy;
    const double c = m.n * m.sxy - m.sx * m.sy;
    const double t = 0.5 * (a + b) - m.n * m.n * limit * limit * (1.0 + 1e-6);
    return t > 0.0 && t * t > 0.25 * (a - b) * (a - b) + c * c;
  };

  const detail::HullTree hull(pts);
  auto deviation = [&](std::size_t i, std::size_t len, const detail::Moments& m) {
    const LineFit f = detail::fit_from_moments(m, Point2{});
    const Point2 nrm{-f.direction.y, f.direction.x};
    const double off = dot(f.point, nrm);
    // Endpoints first: long windows usually fail there.
    const double ends = std::max(std::abs(dot(pts[i], nrm) - off), std::abs(dot(pts[i + len - 1], nrm) - off));
    if (ends > limit) return ends;
    const double top = hull.max_dot(i, i + len, nrm) - off;
    const double bottom = hull.max_dot(i, i + len, Point2{-nrm.x, -nrm.y}) + off;
    return std::max(top, bottom);
  };

  std::size_t best_i = 0, best_len = 0;
  for (std::size_t len = n; len >= 3 && best_len == 0; --len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      const detail::Moments m = moments(i, len);
      if (rms_exceeds(m)) continue;
      if (deviation(i, len, m) <= limit) {
        best_i = i;
        best_len = len;
        break;
      }
    }
  }
  if (best_len < 3) throw Error(Errc::EmptyBand, "no interval of at least 3 samples meets the deviation budget");

  LinearBand band;
  band.theta_lo = tr[best_i].theta1;
  band.theta_hi = tr[best_i + best_len - 1].theta1;
  std::vector<Point2> window;
  window.reserve(best_len);
  for (std::size_t k = best_i; k < best_i + best_len; ++k) window.push_back(tr[k].d);
  band.fit = fit_line(window);
  band.max_deviation = band.fit.max_deviation / p.unit_length;
  band.spread = band.fit.spread / p.unit_length;
  band.samples = best_len;
  return band;
}

}  // namespace hockens
