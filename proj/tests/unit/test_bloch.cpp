#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/bloch.hpp"
#include "pulsestab/error.hpp"

using namespace pulsestab;

namespace {

std::vector<cplx> in_window(const std::vector<BlochSample>& s, double re, double im) {
  std::vector<cplx> out;
  for (const auto& b : s)
    for (const cplx& e : b.eigenvalues)
      if (std::abs(e.real()) <= re && std::abs(e.imag()) <= im) out.push_back(e);
  return out;
}

// distance from each windowed point to the full other set, both ways
double windowed_hausdorff(const std::vector<BlochSample>& a, const std::vector<BlochSample>& b, double re,
                          double im) {
  auto all = [](const std::vector<BlochSample>& s) {
    std::vector<cplx> out;
    for (const auto& x : s) out.insert(out.end(), x.eigenvalues.begin(), x.eigenvalues.end());
    return out;
  };
  auto one_way = [](const std::vector<cplx>& from, const std::vector<cplx>& to) {
    double h = 0.0;
    for (const cplx& x : from) {
      double m = 1e300;
      for (const cplx& y : to) m = std::min(m, std::abs(x - y));
      h = std::max(h, m);
    }
    return h;
  };
  return std::max(one_way(in_window(a, re, im), all(b)), one_way(in_window(b, re, im), all(a)));
}

// eigenvalues of the constant-coefficient symbol at wavenumber k
std::array<cplx, 2> symbol_roots(const OperatorCoefficients& k0, double c, double k) {
  const cplx ik(0.0, k);
  Eigen::Matrix2cd M;
  M << c * ik, ik, k0.e1 * ik + k0.e0, k0.d2 * ik * ik + k0.d1 * ik + k0.d0;
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(M);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace

TEST_CASE("constant extension") {
  const auto p = fixtures::roll_profile();
  const PeriodicExtension e = constant_extension(p->model, p->wave, p->endstate, 20.0, 200);
  const OperatorCoefficients ref = operator_coefficients(p->model, p->wave, p->at(p->L + 10.0));
  for (const auto& k : e.coeffs) {
    CHECK(std::abs(k.d2 - ref.d2) < 1e-12);
    CHECK(std::abs(k.d1 - ref.d1) < 1e-12);
    CHECK(std::abs(k.d0 - ref.d0) < 1e-12);
    CHECK(std::abs(k.e1 - ref.e1) < 1e-12);
    CHECK(std::abs(k.e0 - ref.e0) < 1e-12);
  }
}

TEST_CASE("Hill's method reproduces the constant-coefficient symbol") {
  for (const auto& p : {fixtures::roll_profile(), fixtures::profile_11()}) {
    const double X = 20.0;
    const int N = 16;
    const PeriodicExtension e = constant_extension(p->model, p->wave, p->endstate, X, 400);
    const auto xi = bloch_grid(X, 8);
    const auto spec = hill_spectrum(e, xi, N);
    double worst = 0.0;
    for (const auto& s : spec) {
      REQUIRE(s.eigenvalues.size() == static_cast<std::size_t>(2 * (2 * N + 1)));
      for (int m = -N; m <= N; ++m) {
        const double k = s.xi + 2.0 * std::numbers::pi * m / X;
        for (const cplx& r : symbol_roots(e.coeffs[0], e.c, k)) {
          double best = 1e300;
          for (const cplx& l : s.eigenvalues) best = std::min(best, std::abs(l - r));
          worst = std::max(worst, best / std::max(1.0, std::abs(r)));
        }
      }
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("periodic extension of the F = 9 profile") {
  const auto p = fixtures::roll_profile();
  const PeriodicExtension e = periodic_extension(*p);
  CHECK(e.seam_jump <= 1e-6);
  CHECK(e.X > 0.0);
  CHECK(e.X <= 2.0 * p->L);

  SUBCASE("translational eigenvalue at xi = 0") {
    const std::vector<double> xi{0.0};
    const auto s = hill_spectrum(e, xi, 32);
    double m = 1e300;
    for (const cplx& l : s[0].eigenvalues) m = std::min(m, std::abs(l));
    CHECK(m <= 1e-3);
  }
  SUBCASE("truncation N = 32 against N = 48") {
    const auto xi = bloch_grid(e.X, 16);
    CHECK(windowed_hausdorff(hill_spectrum(e, xi, 32), hill_spectrum(e, xi, 48), 1.0, 2.0) <= 1e-4);
  }
  SUBCASE("two copies fold onto the single-pulse Bloch grid") {
    ExtensionOptions o;
    o.copies = 2;
    const PeriodicExtension e2 = periodic_extension(*p, o);
    CHECK(e2.X == doctest::Approx(2.0 * e.X));
    const auto xi2 = bloch_grid(e2.X, 8);
    std::vector<double> xi1;
    for (double x : xi2) {
      xi1.push_back(x);
      xi1.push_back(x + std::numbers::pi / e.X);
    }
    CHECK(windowed_hausdorff(hill_spectrum(e2, xi2, 80), hill_spectrum(e, xi1, 40), 1.0, 10.0) <= 1e-3);
  }
  SUBCASE("bad options") {
    ExtensionOptions o;
    o.period = 0.5 * e.X;
    CHECK_THROWS_AS(periodic_extension(*p, o), ValidationError);
    o = {};
    o.copies = 0;
    CHECK_THROWS_AS(periodic_extension(*p, o), ValidationError);
  }
}

TEST_CASE("essential spectrum verdicts") {
  std::vector<double> k;
  for (int i = 0; i <= 2000; ++i) k.push_back(0.01 * i);
  auto verdict = [&](const std::shared_ptr<const ProfileSolution>& p) {
    return essential_spectrum_of_wave(p->model, p->wave, p->endstate, k).stable;
  };
  CHECK_FALSE(verdict(fixtures::roll_profile()));
  CHECK(verdict(fixtures::profile_11()));
  CHECK(verdict(fixtures::jinxin_profile()));
}
