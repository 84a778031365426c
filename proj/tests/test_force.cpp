#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hockens/config.hpp"
#include "hockens/force.hpp"
#include "hockens/optimize.hpp"

using namespace hockens;

namespace {

const FingerConfig kCfg{};
const SpringParams kSprings{};
const ForceSettings kGrid{};

template <class F>
double stencil4(F f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Derivatives, AgreeWithFourthOrderStencil) {
  for (double deg = 70.0; deg <= 155.0; deg += 5.0) {
    const double t = Angle::deg(deg).rad();
    const auto k = derivatives(kCfg, kSprings, Angle::rad(t));
    const double h = 1e-3;
    const double dx = stencil4([&](double x) { return solve(kCfg.hoeckens, Angle::rad(x)).d.x; }, t, h);
    const double dy = stencil4([&](double x) { return solve(kCfg.hoeckens, Angle::rad(x)).d.y; }, t, h);
    EXPECT_LT(rel(k.f_prime, std::hypot(dx, dy)), 1e-6) << deg;
    EXPECT_LT(rel(k.g_prime, stencil4([&](double x) { return push_rotation(kCfg, Angle::rad(x)); }, t, h)), 1e-6)
        << deg;
    EXPECT_LT(rel(k.h_prime, stencil4([&](double x) { return spring_length(kCfg, kSprings, Angle::rad(x)); }, t, h)),
              1e-6)
        << deg;
  }
}

TEST(Derivatives, VanishAtPushAngleExtremum) {
  // Golden-section search for the push-angle minimum past the stroke.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [](double t) { return -push_rotation(kCfg, Angle::rad(t)); };
  double a = Angle::deg(215.0).rad(), b = Angle::deg(260.0).rad();
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (g(c) < g(d)) b = d;
    else a = c;
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  const double t = 0.5 * (a + b);
  ASSERT_GT(t, Angle::deg(216.0).rad());
  ASSERT_LT(t, Angle::deg(259.0).rad());
  EXPECT_NEAR(derivatives(kCfg, kSprings, Angle::rad(t)).g_prime, 0.0, 1e-6);
}

TEST(Derivatives, IntegralOfGPrimeIsPushSweep) {
  const double h = Angle::deg(0.01).rad();
  const double t0 = kCfg.stroke_start.rad(), t1 = kCfg.stroke_end.rad();
  const int n = static_cast<int>(std::ceil((t1 - t0) / h));
  const double step = (t1 - t0) / n;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    integral += w * step * derivatives(kCfg, kSprings, Angle::rad(t0 + i * step)).g_prime;
  }
  const auto tr = d_trace(kCfg.hoeckens, kCfg.stroke_start, kCfg.stroke_end, Angle::deg(0.01));
  const double sweep = delta_theta_max(kCfg.l_ag, kCfg.l_gd, tr).rad();
  EXPECT_NEAR(std::abs(integral), sweep, 0.005 * sweep);
  EXPECT_NEAR(Angle::rad(std::abs(integral)).deg(), 59.82, 0.5);
}

TEST(Derivatives, NearSingularity) {
  FingerConfig c = kCfg;
  c.hoeckens.l_ab = c.hoeckens.l_ac;  // B meets C at theta1 = 0
  try {
    derivatives(c, kSprings, Angle::rad(kDerivativeStep));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NearSingularity);
  }
}

TEST(GraspForce, SpringlessPointContact) {
  SpringParams none = kSprings;
  none.k1 = 0.0;
  none.k2 = 0.0;
  for (double deg : {80.0, 100.0, 120.0, 150.0}) {
    const ForceQuery q{Angle::deg(deg), 0.0, 2.5, 10.0};
    const double w = Angle::deg(10.0).rad();
    const double f = derivatives(kCfg, none, q.theta1).f_prime;
    EXPECT_NEAR(grasp_force(kCfg, none, q), 2.5e3 / (w * f), 1e-9);
  }
}

TEST(GraspForce, PowerBalanceCloses) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> th(kCfg.stroke_start.deg(), kCfg.stroke_end.deg()), r(0.0, 55.0),
      p(0.5, 20.0), w(1.0, 30.0);
  for (int k = 0; k < 1000; ++k) {
    const ForceQuery q{Angle::deg(th(rng)), r(rng), p(rng), w(rng)};
    const double f = grasp_force(kCfg, kSprings, q);
    ASSERT_TRUE(std::isfinite(f));
    const PowerBalance pb = power_balance(kCfg, kSprings, q, f);
    ASSERT_LT(rel(pb.total(), q.p_press), 1e-9) << k;
  }
}

TEST(GraspForce, TransmissionSingularity) {
  const Angle t = Angle::deg(100.0);
  const auto k = derivatives(kCfg, kSprings, t);
  const double r_star = -k.f_prime / k.g_prime;
  try {
    grasp_force(kCfg, kSprings, {t, r_star, 1.0, 10.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TransmissionSingularity);
  }
  const ForceSurface s = force_surface(kCfg, kSprings, t, 10.0, {1.0, 1.0, 1}, {r_star, r_star, 1});
  EXPECT_FALSE(s.values[0].has_value());
  std::ostringstream os;
  write_csv(os, s);
  EXPECT_NE(os.str().find("singular"), std::string::npos);
}

TEST(GraspForce, InvalidOmega) {
  EXPECT_THROW(grasp_force(kCfg, kSprings, {Angle::deg(100), 0.0, 1.0, 0.0}), Error);
}

TEST(GraspForce, SpringPowerSmallAtMidStroke) {
  const ForceQuery q{Angle::deg(112.5), 20.0, 1.0, 10.0};
  const PowerBalance pb = power_balance(kCfg, kSprings, q, grasp_force(kCfg, kSprings, q));
  EXPECT_LT(std::abs(pb.p_k1 + pb.p_k2), 0.2 * q.p_press);
}

TEST(ForceSurface, MonotoneOverDefaultGrid) {
  for (double deg : kGrid.theta1_deg) {
    const ForceSurface s = force_surface(kCfg, kSprings, Angle::deg(deg), kGrid.omega1_deg_s, kGrid.p_axis, kGrid.r_axis);
    for (std::size_t ir = 0; ir < s.r_axis.n; ++ir) {
      for (std::size_t ip = 0; ip < s.p_axis.n; ++ip) {
        ASSERT_TRUE(s.at(ip, ir).has_value());
        if (ip + 1 < s.p_axis.n) {
          ASSERT_GT(*s.at(ip + 1, ir), *s.at(ip, ir));
        }
        if (ir + 1 < s.r_axis.n) {
          ASSERT_LT(*s.at(ip, ir + 1), *s.at(ip, ir));
        }
      }
    }
  }
}

TEST(ForceSurface, LateStrokeDominatesEarlyStroke) {
  const auto a = force_surface(kCfg, kSprings, Angle::deg(80.0), 10.0, kGrid.p_axis, kGrid.r_axis);
  const auto b = force_surface(kCfg, kSprings, Angle::deg(120.0), 10.0, kGrid.p_axis, kGrid.r_axis);
  for (std::size_t k = 0; k < a.values.size(); ++k) ASSERT_GT(*b.values[k], *a.values[k]);
}

TEST(ForceSurface, DominanceNeedsOffsetContact) {
  // With contact at D itself the faster D motion at 120 deg wins; the ordering
  // flips a few millimetres out along the phalange (about 5 mm at 1 W, 4 mm at
  // 10 W), inside the default r range's lower bound.
  EXPECT_LT(derivatives(kCfg, kSprings, Angle::deg(80.0)).f_prime, derivatives(kCfg, kSprings, Angle::deg(120.0)).f_prime);
  for (std::size_t ip = 0; ip < kGrid.p_axis.n; ++ip) {
    const double p = kGrid.p_axis.at(ip);
    const auto f = [&](double deg, double r) { return grasp_force(kCfg, kSprings, {Angle::deg(deg), r, p, 10.0}); };
    EXPECT_LT(f(120.0, 0.0), f(80.0, 0.0)) << p;
    EXPECT_GT(f(120.0, kGrid.r_axis.lo), f(80.0, kGrid.r_axis.lo)) << p;
  }
}

TEST(ForceSurface, ShapesCorrelate) {
  const auto a = force_surface(kCfg, kSprings, Angle::deg(80.0), 10.0, kGrid.p_axis, kGrid.r_axis);
  const auto b = force_surface(kCfg, kSprings, Angle::deg(120.0), 10.0, kGrid.p_axis, kGrid.r_axis);
  const std::size_t n = a.values.size();
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += *a.values[k];
    mb += *b.values[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sab += (*a.values[k] - ma) * (*b.values[k] - mb);
    saa += (*a.values[k] - ma) * (*a.values[k] - ma);
    sbb += (*b.values[k] - mb) * (*b.values[k] - mb);
  }
  EXPECT_GT(sab / std::sqrt(saa * sbb), 0.95);
}

TEST(ForceSurface, SingleNode) {
  const ForceSurface s = force_surface(kCfg, kSprings, Angle::deg(100.0), 10.0, {3.0, 3.0, 1}, {20.0, 20.0, 1});
  ASSERT_EQ(s.values.size(), 1u);
  EXPECT_EQ(*s.values[0], grasp_force(kCfg, kSprings, {Angle::deg(100.0), 20.0, 3.0, 10.0}));
}

TEST(ForceSurface, DoubledGridNests) {
  const GridAxis p{1.0, 10.0, 7}, r{10.0, 55.0, 5};
  const auto coarse = force_surface(kCfg, kSprings, Angle::deg(80.0), 10.0, p, r);
  const auto fine = force_surface(kCfg, kSprings, Angle::deg(80.0), 10.0, p.refined(), r.refined());
  ASSERT_EQ(fine.p_axis.n, 13u);
  for (std::size_t ir = 0; ir < r.n; ++ir) {
    for (std::size_t ip = 0; ip < p.n; ++ip) {
      EXPECT_EQ(p.at(ip), fine.p_axis.at(2 * ip));
      EXPECT_EQ(*coarse.at(ip, ir), *fine.at(2 * ip, 2 * ir));
    }
  }
}

TEST(ForceSurface, CsvHeader) {
  std::ostringstream os;
  write_csv(os, force_surface(kCfg, kSprings, Angle::deg(80.0), 10.0, {1, 2, 2}, {10, 20, 2}));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "P_press_W,r_mm,F_N_N");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Springs, DeflectionAndValidation) {
  EXPECT_NEAR(spring_deflection(kCfg, kSprings, kCfg.stroke_start), Angle::deg(40.0).rad(), 1e-15);
  EXPECT_NEAR(spring_length(kCfg, kSprings, kCfg.stroke_start) - spring_free_length(kCfg, kSprings), 2.0, 1e-12);
  SpringParams bad = kSprings;
  bad.k1 = -1.0;
  EXPECT_THROW(bad.validate(), Error);
}
