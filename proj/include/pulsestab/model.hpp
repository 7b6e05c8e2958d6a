#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace pulsestab {

using cplx = std::complex<double>;

enum class ModelKind { StVenant, JinXin };

/// Which PDE and its physical parameters.
///
/// St. Venant (Lagrangian):  tau_t - u_x = 0,
///   u_t + ((2F)^{-1} tau^{-2})_x = 1 - tau^{s+1} u^r + nu (tau^{-2} u_x)_x.
/// Jin-Xin:  tau_t - u_x = 0,  u_t - cs^2 tau_x = -f(tau) - u + u_xx,  f = -tau^{-p}.
struct ModelSpec {
  ModelKind kind = ModelKind::StVenant;
  double F = 0.0;
  double nu = 0.0;
  double r = 0.0;
  double s = 0.0;
  double cs = 0.0;
  double p = 0.0;

  static ModelSpec st_venant(double F, double nu, double r, double s);
  static ModelSpec jin_xin(double cs, double p);

  /// Throws DomainError when parameters violate the model's ranges.
  void validate() const;
  bool is_st_venant() const { return kind == ModelKind::StVenant; }
};

struct WaveParams {
  double c = 0.0;
  double q = 0.0;
};

// Center marks the degenerate case c(c^2 - cs^2) = 0 (purely imaginary linearization).
enum class EquilibriumType { SaddlePoint, RepellorSpiral, RepellorReal, AttractorSpiral, AttractorReal, Center };

std::string to_string(ModelKind kind);
std::string to_string(EquilibriumType type);

struct EquilibriumInfo {
  double tau0 = 0.0;
  double u0 = 0.0;
  double cs = 0.0;
  double dfstar = 0.0;
  EquilibriumType classification = EquilibriumType::SaddlePoint;
};

struct DispersionSample {
  double k = 0.0;
  std::array<cplx, 2> roots{};
};

// Coefficients of the constant-state linearization in the co-moving frame:
//   tau_t = c tau_x + u_x
//   u_t   = c u_x + pressure tau_x - a0 tau - b0 u + visc u_xx
struct ConstantStateCoefficients {
  double a0 = 0.0;
  double b0 = 0.0;
  double pressure = 0.0;
  double visc = 0.0;
};

double equilibrium_velocity(const ModelSpec& model, double tau);
double char_speed(const ModelSpec& model, double tau);
double equilibrium_char(const ModelSpec& model, double tau);
bool subcharacteristic_ok(const ModelSpec& model, double tau);

/// Source term g(tau, u) and its partial derivatives.
double source(const ModelSpec& model, double tau, double u);
double source_dtau(const ModelSpec& model, double tau, double u);
double source_du(const ModelSpec& model, double tau, double u);

/// Equilibrium data at tau0 for the wave (u0 = q - c tau0), classified by the
/// linearization of the profile ODE.
EquilibriumInfo make_equilibrium(const ModelSpec& model, const WaveParams& wave, double tau0);

ConstantStateCoefficients constant_state_coefficients(const ModelSpec& model, const EquilibriumInfo& eq);

DispersionSample dispersion_roots(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                  double k);

/// Residual |lambda^2 + B lambda + C| / scale of the dispersion polynomial.
double dispersion_residual(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq, double k,
                           cplx lambda);

double hopf_frequency(const ModelSpec& model, const EquilibriumInfo& eq);
bool hopf_conditions(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq);

struct EssentialSpectrum {
  std::vector<DispersionSample> samples;
  double max_real = 0.0;
};

EssentialSpectrum essential_spectrum_curve(const ModelSpec& model, const WaveParams& wave,
                                           const EquilibriumInfo& eq, std::span<const double> k_grid);

}  // namespace pulsestab
