#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/contour.hpp"
#include "pulsestab/error.hpp"

using namespace pulsestab;

TEST_CASE("semicircle geometry") {
  const SpectralContour c = build_semicircle(1.0, 1e-3, 64);
  CHECK(c.closed);
  CHECK(std::abs(c.points.front() - c.points.back()) == 0.0);
  auto hits = [&](cplx z) {
    for (const cplx& p : c.points)
      if (std::abs(p - z) < 1e-14) return true;
    return false;
  };
  CHECK(hits(cplx(0.0, 1.0)));
  CHECK(hits(cplx(0.0, -1.0)));
  CHECK(hits(cplx(0.0, 1e-3)));
  for (const cplx& p : c.points) {
    CHECK(p.real() >= -1e-14);
    CHECK(std::abs(p) <= 1.0 + 1e-14);
    CHECK(std::abs(p) >= 1e-3 - 1e-14);
  }
  CHECK(build_semicircle(1.0, 1e-3, 128).size() > c.size());
  CHECK(build_semicircle(308.0, 1e-3).descriptor.R == 308.0);
}

TEST_CASE("winding numbers") {
  SUBCASE("Jin-Xin: one unstable eigenvalue") {
    EvansSystem sys(fixtures::jinxin_profile());
    const SpectralContour c = build_semicircle(1.0, 1e-3);
    const WindingResult w = adaptive_winding(sys, c);
    CHECK(w.winding == 1);
    CHECK(w.max_rel_step <= 0.2);
    CHECK(adaptive_winding(sys, c.reversed()).winding == -1);
  }
  SUBCASE("St. Venant (1,1): one unstable eigenvalue") {
    EvansSystem sys(fixtures::profile_11());
    CHECK(adaptive_winding(sys, build_semicircle(1.0, 1e-3)).winding == 1);
  }
  SUBCASE("zero inside a small circle around the real root") {
    EvansSystem sys(fixtures::jinxin_profile());
    CHECK(adaptive_winding(sys, build_circle(0.392, 0.05)).winding == 1);
    CHECK(adaptive_winding(sys, build_circle(0.7, 0.05)).winding == 0);
  }
  SUBCASE("mesh cap") {
    EvansSystem sys(fixtures::roll_profile());
    WindingOptions o;
    o.max_points = 100;
    CHECK_THROWS_AS(adaptive_winding(sys, build_semicircle(308.0, 1e-3, 16), o), UnreliableResult);
  }
}

TEST_CASE("real-axis scans") {
  SUBCASE("Jin-Xin") {
    const RealAxisScan s = real_axis_scan(EvansSystem(fixtures::jinxin_profile()), 1e-3, 1.0, 50);
    REQUIRE(s.roots.size() == 1);
    CHECK(s.roots[0].root > 0.0);
    CHECK(s.roots[0].root < 1.0);
    CHECK(s.roots[0].hi - s.roots[0].lo <= 1e-8);
  }
  SUBCASE("St. Venant (1,1)") {
    const RealAxisScan s = real_axis_scan(EvansSystem(fixtures::profile_11()), 1e-4, 100.0, 120, GridSpacing::Log);
    CHECK(s.roots.size() == 1);
  }
  SUBCASE("St. Venant F = 9") {
    const RealAxisScan s = real_axis_scan(EvansSystem(fixtures::roll_profile()), 1e-3, 308.0, 200, GridSpacing::Log);
    CHECK(s.roots.empty());
  }
}
