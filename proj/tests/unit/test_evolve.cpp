#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pulsestab/error.hpp"
#include "pulsestab/evolve.hpp"

using namespace pulsestab;

namespace {

// profile sampled on [a, b] with spacing h, plus a small bump in tau
EvolutionState sample(const ProfileSolution& p, double a, double b, double h, double bump = 0.0) {
  EvolutionState s;
  s.dx = h;
  s.x0 = a;
  s.frame_speed = p.wave.c;
  const auto n = static_cast<std::size_t>(std::llround((b - a) / h)) + 1;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.x(j);
    const ProfilePoint q = p.at(x);
    s.tau.push_back(q.tau + bump * std::exp(-(x - 3.0) * (x - 3.0)));
    s.u.push_back(q.u);
  }
  return s;
}

EvolutionState advance(EvolutionState s, double dt, int steps, const ModelSpec& m) {
  for (int k = 0; k < steps; ++k) s = cn_step(s, dt, m);
  return s;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point") {
  const ModelSpec m = fixtures::roll_model();
  EvolutionState s;
  s.dx = 0.1;
  s.frame_speed = fixtures::c_roll;
  s.tau.assign(101, 1.0);
  s.u.assign(101, 1.0);
  StepReport r;
  const EvolutionState next = cn_step(s, 0.05, m, {}, &r);
  double d = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) d = std::max({d, std::abs(next.tau[j] - 1.0), std::abs(next.u[j] - 1.0)});
  CHECK(d <= 1e-12);
  CHECK(cn_residual(s, next, 0.05, m) <= 1e-12);
}

TEST_CASE("mass balance") {
  const auto p = fixtures::roll_profile();
  EvolutionState s = sample(*p, -15.0, 15.0, 0.05, 0.01);
  for (int k = 0; k < 40; ++k) {
    StepReport r;
    EvolutionState next = cn_step(s, 0.05, p->model, {}, &r);
    CHECK(r.iterations <= 10);
    CHECK(r.residual <= 1e-10);
    CHECK(std::abs(r.mass_change - r.boundary_flux) <= 1e-10 * 30.0 + 1e-13);
    CHECK(cn_residual(s, next, 0.05, p->model) <= 1e-10);
    s = std::move(next);
  }
}

TEST_CASE("discrete profile stays put") {
  const auto p = fixtures::roll_profile();
  EvolutionState s = sample(*p, -40.0, 25.0, 0.05);
  s = advance(std::move(s), 0.05, 1000, p->model);
  std::vector<double> x(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) x[j] = s.x(j);
  CHECK(translate_distance(*p, x, s.tau).first <= 1e-3);
}

TEST_CASE("second-order refinement") {
  const auto p = fixtures::roll_profile();
  const double T = 0.8;
  std::vector<EvolutionState> runs;
  for (double h : {0.2, 0.1, 0.05}) {
    const int steps = static_cast<int>(std::llround(T / h));
    runs.push_back(advance(sample(*p, -10.0, 10.0, h, 0.02), h, steps, p->model));
  }
  // compare on the coarse nodes
  auto diff = [](const EvolutionState& coarse, const EvolutionState& fine) {
    const std::size_t stride = (fine.size() - 1) / (coarse.size() - 1);
    double d = 0.0;
    for (std::size_t j = 0; j < coarse.size(); j += 2)
      d = std::max({d, std::abs(coarse.tau[j] - fine.tau[stride * j]), std::abs(coarse.u[j] - fine.u[stride * j])});
    return d;
  };
  const double e1 = diff(runs[0], runs[1]), e2 = diff(runs[1], runs[2]);
  CHECK(std::log2(e1 / e2) >= 1.5);
}

TEST_CASE("input validation and failures") {
  const auto p = fixtures::roll_profile();
  ExperimentConfig c;
  c.T = 1.0;
  c.perturbation.amplitude = 0.2;
  CHECK_THROWS_AS(run_experiment(*p, c), ValidationError);
  c.perturbation.amplitude = 0.01;
  c.dt = 0.0;
  CHECK_THROWS_AS(run_experiment(*p, c), ValidationError);
  c.dt = 0.05;
  c.x_max = c.x_min;
  CHECK_THROWS_AS(run_experiment(*p, c), ValidationError);
  CHECK_THROWS_AS(run_experiment(*fixtures::jinxin_profile(), ExperimentConfig{}), ValidationError);

  EvolutionState s = sample(*p, -5.0, 5.0, 0.1);
  s.tau[30] = -0.1;
  CHECK_THROWS_AS(cn_step(s, 0.05, p->model), NumericalError);
}

TEST_CASE("stable pulse: wake decays") {
  const auto p = fixtures::profile_11();
  ExperimentConfig c;
  c.x_min = -800.0;
  c.x_max = 400.0;
  c.dx = c.dt = 0.5;
  c.T = 200.0;
  c.snapshot_every = 5.0;
  c.perturbation = {0.01, 50.0, 5.0};
  const ExperimentResult r = run_experiment(*p, c);
  CHECK_FALSE(r.truncated);
  REQUIRE(r.diagnostics.fit_valid);
  CHECK(r.diagnostics.fitted_growth_rate < 0.0);
}
