#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "hockens/error.hpp"

namespace hockens {

/// Absolute tolerance (mm) for degeneracy tests.
inline constexpr double kEpsGeo = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Counter-clockwise rotation of p by `rad`.
inline Point2 rotate(Point2 p, double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Plane angle. Stored in radians; degrees at every external interface.
class Angle {
 public:
  constexpr Angle() = default;

  static constexpr Angle rad(double v) { return Angle(v); }
  static constexpr Angle deg(double v) { return Angle(v * std::numbers::pi / 180.0); }

  constexpr double rad() const { return rad_; }
  constexpr double deg() const { return rad_ * 180.0 / std::numbers::pi; }

  /// Equivalent angle in (-pi, pi].
  Angle wrapped() const {
    double a = std::remainder(rad_, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return Angle(a);
  }

  friend constexpr Angle operator+(Angle a, Angle b) { return Angle(a.rad_ + b.rad_); }
  friend constexpr Angle operator-(Angle a, Angle b) { return Angle(a.rad_ - b.rad_); }
  friend constexpr Angle operator*(double s, Angle a) { return Angle(s * a.rad_); }
  friend constexpr auto operator<=>(Angle, Angle) = default;

 private:
  constexpr explicit Angle(double r) : rad_(r) {}
  double rad_ = 0.0;
};

struct CirclePair {
  Point2 center1;
  double r1 = 0.0;
  Point2 center2;
  double r2 = 0.0;
};

/// Zero, one (tangent) or two points. Two-point results are ordered by
/// ascending y, ties by ascending x.
struct IntersectionResult {
  std::array<Point2, 2> points{};
  int count = 0;

  bool tangent() const { return count == 1; }
  std::span<const Point2> view() const { return {points.data(), static_cast<std::size_t>(count)}; }
  /// Branch with the smaller y (the assembly branch of the push four-bar).
  Point2 lower() const { return points[0]; }
};

/// Intersection of two circles. Throws Error{Disjoint|Contained|CoincidentCenters}.
inline IntersectionResult circle_intersection(const CirclePair& pair) {
  if (!(pair.r1 > 0.0) || !(pair.r2 > 0.0)) {
    throw Error(Errc::InvalidArgument, "circle radii must be positive");
  }
  const Point2 delta = pair.center2 - pair.center1;
  const double d = delta.norm();
  if (d < kEpsGeo) throw Error(Errc::CoincidentCenters, "circle centers coincide");
  if (d > pair.r1 + pair.r2 + kEpsGeo) throw Error(Errc::Disjoint, "circles are disjoint");
  if (d < std::abs(pair.r1 - pair.r2) - kEpsGeo) throw Error(Errc::Contained, "one circle contains the other");

  // a: distance from center1 to the chord midpoint along the center line.
  const double a = (pair.r1 * pair.r1 - pair.r2 * pair.r2 + d * d) / (2.0 * d);
  const double h2 = pair.r1 * pair.r1 - a * a;
  const Point2 u = (1.0 / d) * delta;
  const Point2 mid = pair.center1 + a * u;

  IntersectionResult out;
  // Tangency: the half-chord is below the degeneracy tolerance.
  if (h2 <= kEpsGeo * kEpsGeo) {
    out.points[0] = mid;
    out.count = 1;
    return out;
  }
  const double h = std::sqrt(h2);
  const Point2 n{-u.y, u.x};
  Point2 p = mid + h * n;
  Point2 q = mid - h * n;
  if (q.y < p.y || (q.y == p.y && q.x < p.x)) std::swap(p, q);
  out.points = {p, q};
  out.count = 2;
  return out;
}

/// Orientation of segment G->D measured from +y toward +x, in (-180°, 180°].
inline Angle push_angle(Point2 g, Point2 d) {
  const Point2 v = d - g;
  if (v.norm() < kEpsGeo) throw Error(Errc::DegenerateSegment, "push link has zero length");
  double a = std::atan2(v.x, v.y);
  if (a == -std::numbers::pi) a = std::numbers::pi;
  return Angle::rad(a);
}

/// Unsigned polygon area; the polygon closes implicitly from last to first vertex.
inline double shoelace_area(std::span<const Point2> polygon) {
  if (polygon.size() < 3) throw Error(Errc::TooFewVertices, "polygon needs at least 3 vertices");
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2& p = polygon[i];
    const Point2& q = polygon[(i + 1) % polygon.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(twice);
}

}  // namespace hockens
