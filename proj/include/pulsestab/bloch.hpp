#pragma once

#include <span>
#include <string>
#include <vector>

#include "pulsestab/model.hpp"
#include "pulsestab/profile.hpp"

namespace pulsestab {

// Linearized operator about a profile, co-moving frame:
//   lambda tau = c tau' + u'
//   lambda u   = d2 u'' + d1 u' + d0 u + e1 tau' + e0 tau
struct OperatorCoefficients {
  double d2 = 0.0, d1 = 0.0, d0 = 0.0, e1 = 0.0, e0 = 0.0;
};

OperatorCoefficients operator_coefficients(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt);

/// Profile coefficients on one period [x0, x0 + X), uniform grid.
struct PeriodicExtension {
  double X = 0.0;
  double x0 = 0.0;
  double c = 0.0;
  std::vector<double> x;
  std::vector<OperatorCoefficients> coeffs;
  double paste_tol = 0.0;
  double seam_jump = 0.0;  // max coefficient difference between x0 and x0 + X
  std::string source;
};

struct ExtensionOptions {
  double paste_tol = 1e-6;
  double period = 0.0;   // 0: the truncated support; larger values pad with the endstate
  int copies = 1;        // pulses per period, pasted end to end
  std::size_t n_grid = 0;  // 0: derived from the profile grid spacing
};

/// Truncate where |tau - tau0| first drops below paste_tol on each side of the extremum and paste copies.
PeriodicExtension periodic_extension(const ProfileSolution& profile, const ExtensionOptions& opts = {});

/// Constant state repeated with period X.
PeriodicExtension constant_extension(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                     double X, std::size_t n_grid);

struct BlochSample {
  double xi = 0.0;
  int N = 0;
  std::vector<cplx> eigenvalues;
};

/// Uniform grid of n Bloch parameters in [-pi/X, pi/X).
std::vector<double> bloch_grid(double X, int n);

/// Hill's method: Galerkin truncation to Fourier modes exp(i (xi + 2 pi m / X) x), |m| <= N.
std::vector<BlochSample> hill_spectrum(const PeriodicExtension& ext, std::span<const double> xi_list, int N = 32);

struct EssentialVerdict {
  EssentialSpectrum curve;
  bool stable = false;
};

/// Dispersion curves of the endstate; stable iff max Re <= 1e-10 on the grid.
EssentialVerdict essential_spectrum_of_wave(const ModelSpec& model, const WaveParams& wave,
                                            const EquilibriumInfo& eq, std::span<const double> k_grid);

}  // namespace pulsestab
