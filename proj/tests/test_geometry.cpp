#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hockens/geometry.hpp"
#include "hockens/hoeckens.hpp"

using namespace hockens;

namespace {

double residual(Point2 p, Point2 c, double r) {
  const Point2 v = p - c;
  return std::abs(v.x * v.x + v.y * v.y - r * r);
}

Errc classify_or(const CirclePair& cp, Errc none) {
  try {
    circle_intersection(cp);
    return none;
  } catch (const Error& e) {
    return e.code();
  }
}

}  // namespace

TEST(CircleIntersection, TangentCircles) {
  const auto r = circle_intersection({{0, 0}, 1, {2, 0}, 1});
  ASSERT_TRUE(r.tangent());
  EXPECT_NEAR(r.points[0].x, 1.0, 1e-12);
  EXPECT_NEAR(r.points[0].y, 0.0, 1e-12);
}

TEST(CircleIntersection, InternalTangency) {
  const auto r = circle_intersection({{0, 0}, 3, {1, 0}, 2});
  ASSERT_TRUE(r.tangent());
  EXPECT_NEAR(r.points[0].x, 3.0, 1e-12);
}

TEST(CircleIntersection, ErrorKinds) {
  EXPECT_EQ(classify_or({{0, 0}, 1, {3, 0}, 1}, Errc::Config), Errc::Disjoint);
  EXPECT_EQ(classify_or({{0, 0}, 5, {1, 0}, 1}, Errc::Config), Errc::Contained);
  EXPECT_EQ(classify_or({{1, 1}, 5, {1, 1}, 1}, Errc::Config), Errc::CoincidentCenters);
  EXPECT_EQ(classify_or({{0, 0}, 0, {1, 0}, 1}, Errc::Config), Errc::InvalidArgument);
}

TEST(CircleIntersection, OrderedBySmallerY) {
  const auto r = circle_intersection({{0, 0}, 5, {6, 0}, 5});
  ASSERT_EQ(r.count, 2);
  EXPECT_LT(r.points[0].y, r.points[1].y);
  EXPECT_EQ(r.lower(), r.points[0]);
  // Equal y: smaller x first.
  const auto s = circle_intersection({{0, 0}, 5, {0, 6}, 5});
  ASSERT_EQ(s.count, 2);
  EXPECT_DOUBLE_EQ(s.points[0].y, s.points[1].y);
  EXPECT_LT(s.points[0].x, s.points[1].x);
}

TEST(CircleIntersection, ChordFormulaOnHoeckensTrace) {
  const auto p = HoeckensParams::paper_proportions(30.0);
  for (const auto& t : trace(p, Angle::deg(68.51), Angle::deg(156.56), Angle::deg(5.0))) {
    const double lag = 125.0, ldg = 50.0;
    const double d = t.d.norm();
    const double a = (lag * lag - ldg * ldg + d * d) / (2.0 * d);
    const double h = std::sqrt(lag * lag - a * a);
    const Point2 u = (1.0 / d) * t.d, n{-u.y, u.x};
    const Point2 g1 = a * u + h * n, g2 = a * u - h * n;
    const auto r = circle_intersection({{0, 0}, lag, t.d, ldg});
    ASSERT_EQ(r.count, 2);
    const Point2 lo = g1.y < g2.y ? g1 : g2, hi = g1.y < g2.y ? g2 : g1;
    EXPECT_NEAR(distance(r.points[0], lo), 0.0, 1e-9);
    EXPECT_NEAR(distance(r.points[1], hi), 0.0, 1e-9);
  }
}

TEST(CircleIntersection, RandomPairsSubstitutionResidual) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pos(-200.0, 200.0), rad(1.0, 200.0);
  int checked = 0;
  while (checked < 1000) {
    const CirclePair cp{{pos(rng), pos(rng)}, rad(rng), {pos(rng), pos(rng)}, rad(rng)};
    const double d = distance(cp.center1, cp.center2);
    if (d > cp.r1 + cp.r2 - 1e-6 || d < std::abs(cp.r1 - cp.r2) + 1e-6) continue;
    const auto r = circle_intersection(cp);
    ASSERT_EQ(r.count, 2);
    for (const Point2& p : r.view()) {
      EXPECT_LT(residual(p, cp.center1, cp.r1), 1e-9);
      EXPECT_LT(residual(p, cp.center2, cp.r2), 1e-9);
    }
    ++checked;
  }
}

TEST(CircleIntersection, ClassificationMatchesPredicates) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-50.0, 50.0), rad(0.5, 60.0);
  for (int k = 0; k < 5000; ++k) {
    const CirclePair cp{{pos(rng), pos(rng)}, rad(rng), {pos(rng), pos(rng)}, rad(rng)};
    const double d = distance(cp.center1, cp.center2);
    Errc expected = Errc::Config;  // stands for "intersects"
    if (d < kEpsGeo) expected = Errc::CoincidentCenters;
    else if (d > cp.r1 + cp.r2 + kEpsGeo) expected = Errc::Disjoint;
    else if (d < std::abs(cp.r1 - cp.r2) - kEpsGeo) expected = Errc::Contained;
    EXPECT_EQ(classify_or(cp, Errc::Config), expected);
  }
  // Integer-exact tangencies, external and internal.
  for (int a = 1; a <= 20; ++a) {
    for (int b = 1; b <= 20; ++b) {
      EXPECT_TRUE(circle_intersection({{0, 0}, double(a), {double(a + b), 0}, double(b)}).tangent());
      if (a != b) {
        EXPECT_TRUE(circle_intersection({{0, 0}, double(a), {double(std::abs(a - b)), 0}, double(b)}).tangent());
      }
      EXPECT_EQ(classify_or({{0, 0}, double(a), {a + b + 1e-6, 0}, double(b)}, Errc::Config), Errc::Disjoint);
    }
  }
}

TEST(CircleIntersection, SwapSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-100.0, 100.0), rad(1.0, 120.0);
  int checked = 0;
  while (checked < 500) {
    const CirclePair cp{{pos(rng), pos(rng)}, rad(rng), {pos(rng), pos(rng)}, rad(rng)};
    const double d = distance(cp.center1, cp.center2);
    if (d > cp.r1 + cp.r2 - 1e-6 || d < std::abs(cp.r1 - cp.r2) + 1e-6) continue;
    const auto a = circle_intersection(cp);
    const auto b = circle_intersection({cp.center2, cp.r2, cp.center1, cp.r1});
    ASSERT_EQ(a.count, b.count);
    for (int i = 0; i < a.count; ++i) EXPECT_LT(distance(a.points[i], b.points[i]), 1e-9);
    ++checked;
  }
}

TEST(PushAngle, Axes) {
  EXPECT_DOUBLE_EQ(push_angle({0, 0}, {0, 10}).deg(), 0.0);
  EXPECT_DOUBLE_EQ(push_angle({0, 0}, {10, 0}).deg(), 90.0);
  EXPECT_DOUBLE_EQ(push_angle({0, 0}, {0, -10}).deg(), 180.0);
  EXPECT_DOUBLE_EQ(push_angle({0, 0}, {-10, 0}).deg(), -90.0);
}

TEST(PushAngle, DegenerateSegment) {
  try {
    push_angle({1, 2}, {1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateSegment);
  }
}

TEST(PushAngle, TranslationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const Point2 g{u(rng), u(rng)}, d{u(rng), u(rng)}, s{u(rng), u(rng)};
    EXPECT_NEAR(push_angle(g, d).rad(), push_angle(g + s, d + s).rad(), 1e-12);
  }
}

TEST(Shoelace, UnitSquare) {
  std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_DOUBLE_EQ(shoelace_area(sq), 1.0);
  std::reverse(sq.begin(), sq.end());
  EXPECT_DOUBLE_EQ(shoelace_area(sq), 1.0);
}

TEST(Shoelace, TooFewVertices) {
  const std::vector<Point2> two{{0, 0}, {1, 0}};
  EXPECT_THROW(shoelace_area(two), Error);
}

TEST(Shoelace, ConvexPolygonsMatchFanTriangulation) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi), rad(1.0, 100.0), off(-50.0, 50.0);
  std::uniform_int_distribution<int> nv(3, 40);
  for (int k = 0; k < 50; ++k) {
    // Points on an ellipse in angular order form a convex polygon.
    const int n = nv(rng);
    const double ax = rad(rng), by = rad(rng);
    const Point2 c{off(rng), off(rng)};
    std::vector<double> th(n);
    for (auto& t : th) t = ang(rng);
    std::sort(th.begin(), th.end());
    std::vector<Point2> poly;
    for (double t : th) poly.push_back(c + Point2{ax * std::cos(t), by * std::sin(t)});

    double fan = 0.0;
    for (int i = 1; i + 1 < n; ++i) fan += 0.5 * std::abs(cross(poly[i] - poly[0], poly[i + 1] - poly[0]));
    const double area = shoelace_area(poly);
    EXPECT_NEAR(area, fan, 1e-9 * fan);

    // Cyclic rotation and reversal leave the area unchanged.
    std::vector<Point2> rot = poly;
    std::rotate(rot.begin(), rot.begin() + n / 2, rot.end());
    EXPECT_NEAR(shoelace_area(rot), area, 1e-9 * area);
    std::reverse(rot.begin(), rot.end());
    EXPECT_NEAR(shoelace_area(rot), area, 1e-9 * area);
  }
}

TEST(AngleType, DegreesRoundTripAndWrap) {
  EXPECT_NEAR(Angle::deg(123.456).deg(), 123.456, 1e-12);
  EXPECT_NEAR(Angle::deg(270.0).wrapped().deg(), -90.0, 1e-12);
  EXPECT_NEAR(Angle::deg(-180.0).wrapped().deg(), 180.0, 1e-12);
  EXPECT_LT(Angle::deg(10), Angle::deg(20));
}
