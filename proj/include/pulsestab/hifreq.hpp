#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pulsestab/evans.hpp"
#include "pulsestab/profile.hpp"

namespace pulsestab {

/// Blocks of the tracking system after approximate diagonalization, at one grid point.
/// Index k in each array is the coefficient of lambda^{-k/2}.
struct ThetaPoint {
  std::array<Eigen::Matrix2d, 4> pp;        // Theta_{++}^0..3
  std::array<Eigen::Vector2d, 4> pm;        // Theta_{+-}^0..3
  std::array<Eigen::RowVector2d, 3> mp;     // Theta_{-+}^0..2
  std::array<double, 3> mm{};               // Theta_{--}^0..2
  double theta = 0.0;                       // -alpha / nu
  double mu = 0.0;                          // 1 / (tau sqrt(nu))
  double theta_tilde = 0.0;                 // tau / sqrt(nu)
  double tau = 0.0;
};

struct ThetaBlocks {
  std::vector<double> x;
  std::vector<ThetaPoint> points;
};

/// Blocks at a single profile point (St. Venant only).
ThetaPoint theta_point(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt);

ThetaBlocks theta_blocks(const ProfileSolution& profile);

struct HfCoefficients {
  double a0 = 0.0, a_half = 0.0, a1 = 0.0, a_3half = 0.0, a2 = 0.0, a_5quarter = 0.0, a3 = 0.0;
};

/// Coefficients at one point, prefactor sqrt(2 nu) / tau included.
HfCoefficients hf_coefficients_at(const ThetaPoint& p, double nu);

/// Pointwise coefficients maximized over the grid.
HfCoefficients hf_coefficients(const ThetaBlocks& blocks, const ProfileSolution& profile);

struct HfBound {
  double R = 0.0;       // positive root of the degree-8 polynomial
  double radius = 0.0;  // R^4
  double relaxed_quartic = 0.0;
  double relaxed_quadratic = 0.0;
  double residual = 0.0;  // |p(R)| relative to the largest term
};

/// X^8 - a0 X^6 - a_half X^5 - a1 X^4 - a_3half X^3 - a2 X^2 - a_5quarter X - a3 at X.
double hf_polynomial(const HfCoefficients& a, double X);

HfBound hf_radius(const HfCoefficients& coeffs);

struct ConvergenceEntry {
  double R = 0.0;
  double relative_error = 0.0;
  double c1 = 0.0;  // D ~ c1 exp(c2 sqrt(lambda))
  double c2 = 0.0;
  std::size_t n_points = 0;
  bool valid = false;
};

struct ConvergenceOptions {
  int n_base = 64;            // uniform angles on the upper quarter arc
  EvansOptions evans;
};

/// Fit D on |lambda| = R, Re lambda >= 0 to c1 exp(c2 sqrt(lambda)) by least squares on log D
/// (c1, c2 real) and report the max relative deviation in the log sense, max |log D - log fit|.
std::vector<ConvergenceEntry> hf_convergence_study(const EvansSystem& system, const std::vector<double>& radii,
                                                   const ConvergenceOptions& opts = {});

}  // namespace pulsestab
