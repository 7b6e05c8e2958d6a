#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/error.hpp"
#include "pulsestab/model.hpp"

using namespace pulsestab;
using doctest::Approx;

namespace {

// closest root of the pair to target
double root_distance(const DispersionSample& s, cplx target) {
  return std::min(std::abs(s.roots[0] - target), std::abs(s.roots[1] - target));
}

}  // namespace

TEST_CASE("equilibrium velocity zeroes the source") {
  const ModelSpec sv = ModelSpec::st_venant(9.0, 0.1, 2.0, 0.0);
  CHECK(equilibrium_velocity(sv, 1.0) == Approx(1.0).epsilon(1e-15));
  CHECK(equilibrium_velocity(sv, 4.0) == Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(source(sv, 4.0, equilibrium_velocity(sv, 4.0))) < 1e-15);
  const ModelSpec jx = ModelSpec::jin_xin(1.0, 0.5);
  CHECK(equilibrium_velocity(jx, 4.0) == Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(source(jx, 4.0, 0.5)) < 1e-15);
  CHECK_THROWS_AS(equilibrium_velocity(sv, 0.0), DomainError);
}

TEST_CASE("characteristic speeds") {
  CHECK(char_speed(ModelSpec::st_venant(9.0, 0.1, 2.0, 0.0), 1.0) == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(char_speed(ModelSpec::st_venant(4.0, 0.1, 2.0, 0.0), 1.0) == Approx(0.5).epsilon(1e-15));
  CHECK(char_speed(ModelSpec::jin_xin(1.0, 0.5), 3.7) == Approx(1.0));
  CHECK(equilibrium_char(ModelSpec::st_venant(9.0, 0.1, 2.0, 0.0), 1.0) == Approx(0.5).epsilon(1e-15));
  CHECK(equilibrium_char(ModelSpec::st_venant(0.222, 20.0, 1.0, 1.0), 1.0) == Approx(2.0).epsilon(1e-15));
  CHECK(equilibrium_char(ModelSpec::jin_xin(1.0, 0.5), 1.0) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("subcharacteristic condition") {
  CHECK_FALSE(subcharacteristic_ok(ModelSpec::st_venant(9.0, 0.1, 2.0, 0.0), 1.0));
  CHECK(subcharacteristic_ok(ModelSpec::st_venant(4.0, 0.1, 2.0, 0.0), 1.0));
  CHECK_FALSE(subcharacteristic_ok(ModelSpec::st_venant(4.0 + 1e-6, 0.1, 2.0, 0.0), 1.0));
  CHECK(subcharacteristic_ok(ModelSpec::st_venant(0.222, 20.0, 1.0, 1.0), 1.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ModelSpec::st_venant(-1.0, 0.1, 2.0, 0.0), DomainError);
  CHECK_THROWS_AS(ModelSpec::st_venant(9.0, 0.0, 2.0, 0.0), DomainError);
  CHECK_THROWS_AS(ModelSpec::jin_xin(0.0, 0.5), DomainError);
}

TEST_CASE("dispersion roots") {
  const ModelSpec m = fixtures::roll_model();
  const WaveParams w{fixtures::c_roll, 1.0 + fixtures::c_roll};
  const EquilibriumInfo eq = make_equilibrium(m, w, 1.0);

  SUBCASE("k = 0 gives 0 and -r/u0") {
    const DispersionSample s = dispersion_roots(m, w, eq, 0.0);
    CHECK(root_distance(s, 0.0) < 1e-14);
    CHECK(root_distance(s, -2.0) < 1e-14);
  }
  SUBCASE("conjugate symmetry in k") {
    for (double k : {0.3, 1.7, 12.0}) {
      const DispersionSample a = dispersion_roots(m, w, eq, k), b = dispersion_roots(m, w, eq, -k);
      for (const cplx& r : a.roots) CHECK(root_distance(b, std::conj(r)) < 1e-12 * std::max(1.0, std::abs(r)));
    }
  }
  SUBCASE("roots solve the quadratic") {
    for (double k : {0.0, 0.5, 3.0, 40.0}) {
      const DispersionSample s = dispersion_roots(m, w, eq, k);
      for (const cplx& r : s.roots) CHECK(dispersion_residual(m, w, eq, k, r) < 1e-12);
    }
  }
  SUBCASE("Hopf frequency at c = cs gives a zero root") {
    const double cs = 1.0 / 3.0;
    const WaveParams wh{cs, 1.0 + cs};
    const EquilibriumInfo eh = make_equilibrium(m, wh, 1.0);
    const double kH = hopf_frequency(m, eh);
    CHECK(kH == Approx(std::sqrt(10.0)).epsilon(1e-12));
    CHECK(root_distance(dispersion_roots(m, wh, eh, kH), 0.0) < 1e-8);
  }
}

TEST_CASE("Hopf frequency and conditions") {
  const ModelSpec f4 = ModelSpec::st_venant(4.0, 0.1, 2.0, 0.0);
  const EquilibriumInfo e4 = make_equilibrium(f4, {0.5, 1.5}, 1.0);
  CHECK(hopf_frequency(f4, e4) == Approx(0.0));
  const ModelSpec f1 = ModelSpec::st_venant(1.0, 0.1, 2.0, 0.0);
  CHECK_THROWS_AS(hopf_frequency(f1, make_equilibrium(f1, {0.5, 1.5}, 1.0)), Error);

  const ModelSpec m = fixtures::roll_model();
  const WaveParams wh{1.0 / 3.0, 4.0 / 3.0};
  CHECK(hopf_conditions(m, wh, make_equilibrium(m, wh, 1.0)));
  const WaveParams wc{0.78, 1.78};
  CHECK_FALSE(hopf_conditions(m, wc, make_equilibrium(m, wc, 1.0)));
  CHECK_FALSE(hopf_conditions(f4, {0.5, 1.5}, e4));
}

TEST_CASE("essential spectrum of the endstates") {
  std::vector<double> k;
  for (int i = -2000; i <= 2000; ++i) k.push_back(0.01 * i);

  const ModelSpec m11 = fixtures::model_11();
  const WaveParams w11{fixtures::c_11, 1.0 + fixtures::c_11};
  const EssentialSpectrum s11 = essential_spectrum_curve(m11, w11, make_equilibrium(m11, w11, 1.0), k);
  CHECK(s11.max_real <= 1e-10);
  CHECK(s11.max_real >= -1e-12);  // attained at k = 0

  const ModelSpec m9 = fixtures::roll_model();
  const WaveParams w9{fixtures::c_roll, 1.0 + fixtures::c_roll};
  CHECK(essential_spectrum_curve(m9, w9, make_equilibrium(m9, w9, 1.0), k).max_real > 0.0);

  const ModelSpec jx = fixtures::jinxin_model();
  CHECK(essential_spectrum_curve(jx, {1.0, 2.0}, make_equilibrium(jx, {1.0, 2.0}, 1.0), k).max_real <= 1e-10);
}

TEST_CASE("equilibrium classification") {
  const ModelSpec m = ModelSpec::st_venant(6.0, 0.1, 2.0, 0.0);
  const auto eqs = find_equilibria(m, {0.78, 1.78});
  REQUIRE(eqs.size() >= 2);
  // enclosed root of 1 - tau (1.78 - 0.78 tau)^2 by bisection
  double lo = 0.3, hi = 0.9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi), u = 1.78 - 0.78 * mid;
    (1.0 - mid * u * u > 0.0 ? lo : hi) = mid;
  }
  bool saddle_at_one = false, enclosed_repellor = false;
  for (const EquilibriumInfo& e : eqs) {
    if (std::abs(e.tau0 - 1.0) < 1e-10) saddle_at_one = e.classification == EquilibriumType::SaddlePoint;
    if (std::abs(e.tau0 - lo) < 1e-10)
      enclosed_repellor = (e.classification == EquilibriumType::RepellorSpiral ||
                           e.classification == EquilibriumType::RepellorReal) &&
                          e.cs > 0.78;
  }
  CHECK(saddle_at_one);
  CHECK(enclosed_repellor);

  const auto jx = find_equilibria(fixtures::jinxin_model(), {1.0, 2.0});
  REQUIRE(jx.size() == 2);
  const double golden = std::pow((std::sqrt(5.0) - 1.0) / 2.0, 2);
  CHECK(jx[0].tau0 == Approx(golden).epsilon(1e-10));
  CHECK(jx[1].tau0 == Approx(1.0).epsilon(1e-12));
}
