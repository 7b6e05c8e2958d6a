#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pulsestab/model.hpp"

namespace pulsestab {

/// Profile quantities at one x.
struct ProfilePoint {
  double tau = 0.0;
  double dtau = 0.0;
  double ddtau = 0.0;
  double u = 0.0;
  double alpha = 0.0;   // St. Venant: tau^{-3}(1/F + 2 c nu tau'); Jin-Xin: cs^2
  double dalpha = 0.0;  // x-derivative of alpha
};

struct ProfileOptions {
  double eps = 1e-6;        // seed distance along the saddle eigenvector
  double tail_tol = 1e-8;   // required |tau(+-L) - tau0|
  double L_min = 0.0;       // lower bound for the half-length
  double dx = 0.01;         // grid spacing
  double match_tol = 1e-4;  // accepted |d| for a homoclinic
  double rtol = 1e-12;
  double atol = 1e-15;
  double x_max = 400.0;     // shooting length budget per branch
  std::optional<double> endstate_hint;
};

/// Discretized homoclinic orbit on a uniform grid over [-L, L], extremum at x = 0.
struct ProfileSolution {
  ModelSpec model;
  WaveParams wave;
  EquilibriumInfo endstate;
  std::vector<double> grid, tau, dtau, ddtau, u, alpha, dalpha;
  double L = 0.0;
  double dx = 0.0;
  double truncation_error = 0.0;
  double separation = 0.0;  // measured d at construction (0 for quadrature profiles)
  double eps = 0.0;
  double tail_tol = 0.0;

  std::size_t size() const { return grid.size(); }
  ProfilePoint node(std::size_t i) const;
  /// Quintic Hermite interpolation of tau from (tau, tau', tau''); endstate outside [-L, L].
  ProfilePoint at(double x) const;
  /// max |tau - tau0|
  double amplitude() const;
};

/// Derived quantities at (tau, tau') from the profile equation.
ProfilePoint profile_point(const ModelSpec& model, const WaveParams& wave, double tau, double dtau);

/// Build a profile from (x, tau, dtau) arrays on a uniform grid; derived fields are recomputed.
ProfileSolution make_profile(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& endstate,
                             std::vector<double> x, std::vector<double> tau, std::vector<double> dtau);

std::array<double, 2> profile_vector_field(const ModelSpec& model, const WaveParams& wave,
                                           const std::array<double, 2>& state);

/// Equilibria of the profile ODE (zeros of g(tau, q - c tau)), sorted by tau.
std::vector<EquilibriumInfo> find_equilibria(const ModelSpec& model, const WaveParams& wave);

struct SeparationResult {
  double value = 0.0;
  std::array<double, 2> section_point{};  // unstable-branch state at the section tau' = 0
  int orientation = 1;                    // d = det(U_x, U+ - U-) at the section
  double tau_minus = 0.0;                 // unstable branch at the section
  double tau_plus = 0.0;                  // stable branch at the section
  double length_minus = 0.0;              // x-length from seed to section, unstable branch
  double length_plus = 0.0;               // same for the stable branch
  EquilibriumInfo saddle;
  int direction = 0;                      // side of the saddle the loop lies on (+1 / -1)
};

SeparationResult separation(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts = {});

/// How q follows c when differentiating d in c. FixedEndstate keeps the saddle (tau0, u0)
/// an equilibrium, q = u0 + c tau0; this is the derivative entering sgn D'(0) = -sgn d_c.
enum class SpeedDerivativeMode { FixedEndstate, FixedQ };

double separation_speed_derivative(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts = {},
                                   SpeedDerivativeMode mode = SpeedDerivativeMode::FixedEndstate);

ProfileSolution solve_homoclinic(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts = {});

using QRule = std::function<double(double)>;

/// Root of c -> d(c, q(c)) inside the bracket.
double find_homoclinic_speed(const ModelSpec& model, const QRule& q_rule, double c_lo, double c_hi,
                             const ProfileOptions& opts = {});

// Jin-Xin Hamiltonian structure: (c/2) tau'^2 + V(tau) = H with V = F(tau) - c tau^2/2 + q tau, F' = f.
struct HamiltonianState {
  double H = 0.0;
  double V = 0.0;
};

double jinxin_potential(const ModelSpec& model, const WaveParams& wave, double tau);
HamiltonianState hamiltonian(const ModelSpec& model, const WaveParams& wave, const std::array<double, 2>& state);

/// Profile from the quadrature (c = cs), n grid points (n = 0: use opts.dx).
ProfileSolution jinxin_quadrature(const ModelSpec& model, double q, double H, std::size_t n,
                                  const ProfileOptions& opts = {});

struct OrbitSegment {
  std::vector<double> x, tau, dtau;
};

/// Sample the profile ODE trajectory from state0 over [0, length] at n uniform points.
OrbitSegment integrate_orbit(const ModelSpec& model, const WaveParams& wave, const std::array<double, 2>& state0,
                             double length, std::size_t n);

/// max |H' + (c^2 - cs^2) tau'^2| over the segment, H' by fourth-order differences.
double hamiltonian_decay_check(const ModelSpec& model, const WaveParams& wave, const OrbitSegment& segment);

}  // namespace pulsestab
