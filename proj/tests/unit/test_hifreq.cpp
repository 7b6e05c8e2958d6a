#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/error.hpp"
#include "pulsestab/hifreq.hpp"

using namespace pulsestab;
using doctest::Approx;

namespace {

ProfilePoint rest_point(const ModelSpec& m, double tau0) {
  ProfilePoint pt;
  pt.tau = tau0;
  pt.u = 1.0;
  pt.alpha = 1.0 / (m.F * tau0 * tau0 * tau0);
  return pt;
}

HfCoefficients scaled(HfCoefficients a, double s) {
  a.a0 *= s, a.a_half *= s, a.a1 *= s, a.a_3half *= s, a.a2 *= s, a.a_5quarter *= s, a.a3 *= s;
  return a;
}

}  // namespace

TEST_CASE("blocks at a constant state") {
  const ModelSpec m = fixtures::roll_model();
  const WaveParams w{fixtures::c_roll, 1.0 + fixtures::c_roll};
  const ThetaPoint p = theta_point(m, w, rest_point(m, 1.0));
  CHECK(p.mm[0] == Approx(-w.c / (2.0 * m.nu)).epsilon(1e-14));
  CHECK(p.pm[0](0) == Approx(1.0 / m.nu).epsilon(1e-14));
  CHECK(p.theta == Approx(-1.0 / (m.F * m.nu)));
  CHECK(p.mu * p.theta_tilde == Approx(1.0 / m.nu));
  CHECK_THROWS_AS(theta_point(fixtures::jinxin_model(), {1.0, 2.0}, rest_point(m, 1.0)), ValidationError);
}

TEST_CASE("blocks along the profile") {
  const auto prof = fixtures::roll_profile();
  const ThetaBlocks b = theta_blocks(*prof);
  REQUIRE(b.points.size() == prof->size());
  for (std::size_t i = 0; i < b.points.size(); i += 97) {
    const double t = prof->tau[i];
    CHECK(b.points[i].pm[0](0) == Approx(t * t / prof->model.nu).epsilon(1e-13));
  }
}

TEST_CASE("coefficient scaling") {
  ThetaPoint zero;
  for (auto& m : zero.pp) m.setZero();
  for (auto& v : zero.pm) v.setZero();
  for (auto& v : zero.mp) v.setZero();
  zero.tau = 1.0;
  const HfCoefficients z = hf_coefficients_at(zero, 0.1);
  CHECK(z.a0 + z.a_half + z.a1 + z.a_3half + z.a2 + z.a_5quarter + z.a3 == 0.0);

  const auto prof = fixtures::roll_profile();
  ThetaPoint p = theta_blocks(*prof).points[prof->size() / 2];
  const HfCoefficients a = hf_coefficients_at(p, prof->model.nu);
  for (auto& m : p.pp) m *= 2.0;
  for (auto& v : p.pm) v *= 2.0;
  for (auto& v : p.mp) v *= 2.0;
  for (auto& v : p.mm) v *= 2.0;
  const HfCoefficients d = hf_coefficients_at(p, prof->model.nu);
  CHECK(d.a0 == Approx(2.0 * a.a0));
  CHECK(d.a1 <= 2.0 * a.a1 * (1 + 1e-12));
  CHECK(d.a2 <= 2.0 * a.a2 * (1 + 1e-12));
  CHECK(d.a3 == Approx(2.0 * a.a3));
}

TEST_CASE("radius polynomial") {
  HfCoefficients a;
  a.a0 = 1.0;
  const HfBound b = hf_radius(a);
  CHECK(b.R == Approx(1.0).epsilon(1e-10));
  CHECK(b.radius == Approx(1.0).epsilon(1e-9));

  HfCoefficients base{0.5, 0.2, 0.3, 0.1, 0.4, 0.05, 0.6};
  const double R0 = hf_radius(base).R;
  CHECK(std::abs(hf_polynomial(base, R0)) <= 1e-9 * std::pow(R0, 8));
  double* fields[] = {&base.a0, &base.a_half, &base.a1, &base.a_3half, &base.a2, &base.a_5quarter, &base.a3};
  for (double* f : fields) {
    const double keep = *f;
    *f += 0.5;
    CHECK(hf_radius(base).R >= R0);
    *f = keep;
  }
  CHECK(hf_radius(scaled(base, 3.0)).R > R0);
  base.a2 = -1.0;
  CHECK_THROWS_AS(hf_radius(base), ValidationError);
}

TEST_CASE("relaxed bounds dominate the exact root") {
  const HfCoefficients a{0.5, 0.2, 0.3, 0.1, 0.4, 0.05, 0.6};
  const HfBound b = hf_radius(a);
  CHECK(b.relaxed_quartic >= b.R * b.R * (1 - 1e-9));
  CHECK(b.relaxed_quadratic >= b.relaxed_quartic * (1 - 1e-9));
}

TEST_CASE("F = 9 exclusion radius") {
  const auto prof = fixtures::roll_profile();
  const HfBound b = hf_radius(hf_coefficients(theta_blocks(*prof), *prof));
  CHECK(std::abs(b.radius - 308.0) <= 30.8);
  CHECK(b.residual <= 1e-8);
}
