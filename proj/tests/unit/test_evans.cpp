#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/error.hpp"
#include "pulsestab/evans.hpp"

using namespace pulsestab;
using doctest::Approx;

namespace {

// translational mode (tau', u', tau^-2 u'') of a St. Venant profile, u = q - c tau
Eigen::Vector3d mode_sv(const ProfileSolution& p, double x) {
  const ProfilePoint q = p.at(x);
  const double c = p.wave.c;
  return {q.dtau, -c * q.dtau, -c * q.ddtau / (q.tau * q.tau)};
}

}  // namespace

TEST_CASE("evans matrix structure") {
  const auto p = fixtures::roll_profile();
  EvansSystem sys(p);
  const cplx lam(0.3, 2.0);
  for (double x : {-5.0, 0.0, 3.0}) CHECK(std::abs(sys.matrix_at(x, lam)(0, 0) - lam / p->wave.c) < 1e-14);

  SUBCASE("translational mode at lambda = 0") {
    const double h = 1e-3;
    for (double x : {-4.0, -1.0, 0.5, 2.0}) {
      const Eigen::Vector3d v = mode_sv(*p, x);
      const Eigen::Vector3d vp = (mode_sv(*p, x + h) - mode_sv(*p, x - h)) / (2 * h);
      const Eigen::Vector3cd lhs = sys.matrix_at(x, 0.0) * v.cast<cplx>();
      CHECK((lhs - vp.cast<cplx>()).norm() <= 1e-4 * std::max(1.0, vp.norm()));
    }
  }
  SUBCASE("tails approach the limiting matrix") {
    for (double x : {-p->L, p->L}) {
      const Mat3c d = sys.matrix_at(x, lam) - sys.limiting(lam).A0;
      CHECK(d.norm() <= 1e-6 * sys.limiting(lam).A0.norm());
    }
  }
}

TEST_CASE("limiting matrix splitting") {
  const auto p = fixtures::roll_profile();
  const LimitingMatrix big = limiting_matrix(p->model, p->wave, p->endstate, 400.0);
  CHECK(big.report.unstable_dim == 2);
  CHECK(big.report.stable_dim == 1);
  CHECK(limiting_matrix(p->model, p->wave, p->endstate, 1.0).report.status == SplittingStatus::Consistent);

  const LimitingMatrix zero = limiting_matrix(p->model, p->wave, p->endstate, 0.0);
  int zeros = 0;
  for (const cplx& mu : zero.report.eigenvalues) zeros += std::abs(mu) < 1e-10;
  CHECK(zeros == 1);
  CHECK(zero.report.gap > 1e-3);
}

TEST_CASE("eigenvector determinant at lambda = 0") {
  // det of the eigenvectors (first entry 1) of the zero, mu_+ and mu_- modes equals
  // c (mu_- - mu_+) (c - df*) / tau0^2 for the St. Venant endstate
  for (const auto& p : {fixtures::roll_profile(), fixtures::profile_11()}) {
    const LimitingMatrix lim = limiting_matrix(p->model, p->wave, p->endstate, 0.0);
    Eigen::ComplexEigenSolver<Mat3c> es(lim.A0);
    Mat3c V;
    cplx mu_minus, mu_plus;
    int col_zero = -1, col_p = -1, col_m = -1;
    for (int k = 0; k < 3; ++k) {
      const cplx mu = es.eigenvalues()(k);
      if (std::abs(mu) < 1e-10)
        col_zero = k;
      else if (mu.real() > 0)
        col_p = k, mu_plus = mu;
      else
        col_m = k, mu_minus = mu;
    }
    REQUIRE(col_zero >= 0);
    REQUIRE(col_p >= 0);
    REQUIRE(col_m >= 0);
    V.col(0) = es.eigenvectors().col(col_zero) / es.eigenvectors()(0, col_zero);
    V.col(1) = es.eigenvectors().col(col_p) / es.eigenvectors()(0, col_p);
    V.col(2) = es.eigenvectors().col(col_m) / es.eigenvectors()(0, col_m);
    const double c = p->wave.c, t0 = p->endstate.tau0;
    const double dfs = equilibrium_char(p->model, t0);
    const cplx expected = c * (mu_minus - mu_plus) * (c - dfs) / (t0 * t0);
    CHECK(std::abs(V.determinant() - expected) <= 1e-10 * std::abs(expected));
  }
}

TEST_CASE("Kato continuation") {
  const auto p = fixtures::roll_profile();
  std::vector<cplx> loop;
  const int n = 200;
  for (int k = 0; k <= n; ++k) loop.push_back(2.0 + 1.5 * std::polar(1.0, 2 * std::numbers::pi * k / n));
  for (int side : {-1, +1}) {
    const auto bases = kato_basis(p->model, p->wave, p->endstate, loop, side);
    REQUIRE(bases.size() == loop.size());
    const EvansBasis start = spectral_basis(limiting_matrix(p->model, p->wave, p->endstate, loop.front()));
    if (side < 0)
      CHECK((bases.front() - Eigen::MatrixXcd(start.minus)).norm() == 0.0);
    else
      CHECK((bases.front() - Eigen::MatrixXcd(start.plus)).norm() == 0.0);
    CHECK((bases.back() - bases.front()).norm() <= 1e-6);
    // every basis spans the invariant subspace of its point
    for (std::size_t k = 0; k < loop.size(); k += 37) {
      const Mat3c P = splitting_projector(limiting_matrix(p->model, p->wave, p->endstate, loop[k]), side);
      CHECK((P * bases[k] - bases[k]).norm() <= 1e-8 * bases[k].norm());
    }
  }
}

TEST_CASE("Evans function invariants") {
  for (const auto& p : {fixtures::roll_profile(), fixtures::profile_11(), fixtures::jinxin_profile()}) {
    EvansSystem sys(p);
    const double scale = std::max({std::abs(evans_eval(sys, 0.1).D), std::abs(evans_eval(sys, 0.5).D),
                                   std::abs(evans_eval(sys, 1.0).D)});
    CHECK(std::abs(evans_eval(sys, 0.0).D) <= 1e-6 * scale);

    const cplx lam(0.4, 1.3);
    const cplx a = evans_eval(sys, lam).D, b = evans_eval(sys, std::conj(lam)).D;
    CHECK(std::abs(b - std::conj(a)) <= 1e-9 * std::abs(a));

    CHECK(evans_eval(sys, 200.0).mantissa.real() > 0.0);
  }
}

TEST_CASE("Evans function does not depend on the initializing basis") {
  const auto p = fixtures::roll_profile();
  EvansSystem sys(p);
  const cplx lam(1.0, 3.0);
  const EvansBasis base = spectral_basis(sys.limiting(lam));
  Eigen::Matrix2cd G;
  G << cplx(2.0, 1.0), cplx(0.3, 0.0), cplx(-1.0, 0.5), cplx(0.7, -0.2);
  EvansBasis other{base.minus * G, base.plus * cplx(0.0, -3.0), "mixed"};
  const cplx d0 = evans_eval(sys, lam, base).D, d1 = evans_eval(sys, lam, other).D;
  CHECK(std::abs(d0 - d1) <= 1e-8 * std::abs(d0));
}

TEST_CASE("L-doubling robustness") {
  const auto p = fixtures::profile_11();
  ProfileOptions o;
  o.L_min = 2 * p->L;
  EvansSystem a(p), b(std::make_shared<const ProfileSolution>(solve_homoclinic(p->model, p->wave, o)));
  for (double lam : {0.1, 1.0, 10.0}) {
    const cplx da = evans_eval(a, lam).D, db = evans_eval(b, lam).D;
    CHECK(std::abs(da - db) <= 1e-5 * std::abs(da));
  }
}

TEST_CASE("derivative sign and stability index") {
  EvansSystem roll(fixtures::roll_profile()), s11(fixtures::profile_11()), jx(fixtures::jinxin_profile());
  CHECK(evans_derivative_sign_at_zero(roll).sign > 0);
  CHECK(evans_derivative_sign_at_zero(s11).sign < 0);
  CHECK(evans_derivative_sign_at_zero(jx).sign < 0);
  CHECK(stability_index(roll, 300.0).parity == StabilityIndex::EvenUnstableCount);
  CHECK(stability_index(s11, 100.0).parity == StabilityIndex::OddUnstableCount);
  CHECK(stability_index(jx, 50.0).parity == StabilityIndex::OddUnstableCount);
}
