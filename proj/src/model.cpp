#include "pulsestab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pulsestab/error.hpp"

namespace pulsestab {

namespace {

void require_positive_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be positive and finite (vacuum)");
}

bool is_integer(double v) { return std::floor(v) == v; }

// u^r guarded for nonpositive u: only integer exponents are meaningful there.
double pow_u(double u, double r) {
  if (u <= 0.0 && !is_integer(r)) throw DomainError("negative velocity with non-integer friction exponent");
  return std::pow(u, r);
}

// Stable solution of lambda^2 + B lambda + C = 0.
std::array<cplx, 2> solve_quadratic(cplx B, cplx C) {
  const cplx disc = std::sqrt(B * B - 4.0 * C);
  const double sgn = (std::real(std::conj(B) * disc) >= 0.0) ? 1.0 : -1.0;
  const cplx qq = -0.5 * (B + sgn * disc);
  if (qq == cplx(0.0, 0.0)) return {cplx(0.0, 0.0), cplx(0.0, 0.0)};
  return {qq, C / qq};
}

void symbol_coefficients(const WaveParams& wave, const ConstantStateCoefficients& k0, double k, cplx& B,
                         cplx& C) {
  const cplx i(0.0, 1.0);
  const cplx m11 = i * wave.c * k;
  const cplx m12 = i * k;
  const cplx m21 = i * k * k0.pressure - k0.a0;
  const cplx m22 = i * wave.c * k - k0.b0 - k0.visc * k * k;
  B = -(m11 + m22);
  C = m11 * m22 - m12 * m21;
}

}  // namespace

ModelSpec ModelSpec::st_venant(double F, double nu, double r, double s) {
  ModelSpec m;
  m.kind = ModelKind::StVenant;
  m.F = F;
  m.nu = nu;
  m.r = r;
  m.s = s;
  m.validate();
  return m;
}

ModelSpec ModelSpec::jin_xin(double cs, double p) {
  ModelSpec m;
  m.kind = ModelKind::JinXin;
  m.cs = cs;
  m.p = p;
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (kind == ModelKind::StVenant) {
    if (!finite_pos(F)) throw DomainError("F must be positive");
    if (!finite_pos(nu)) throw DomainError("nu must be positive");
    if (!(r >= 1.0 && r <= 2.0)) throw DomainError("friction exponent r must lie in [1,2]");
    if (!(s >= 0.0 && s <= 2.0)) throw DomainError("friction exponent s must lie in [0,2]");
  } else {
    if (!finite_pos(cs)) throw DomainError("cs must be positive");
    if (!finite_pos(p)) throw DomainError("p must be positive");
  }
}

std::string to_string(ModelKind kind) { return kind == ModelKind::StVenant ? "StVenant" : "JinXin"; }

std::string to_string(EquilibriumType type) {
  switch (type) {
    case EquilibriumType::SaddlePoint: return "SaddlePoint";
    case EquilibriumType::RepellorSpiral: return "RepellorSpiral";
    case EquilibriumType::RepellorReal: return "RepellorReal";
    case EquilibriumType::AttractorSpiral: return "AttractorSpiral";
    case EquilibriumType::AttractorReal: return "AttractorReal";
    case EquilibriumType::Center: return "Center";
  }
  return "?";
}

double equilibrium_velocity(const ModelSpec& model, double tau) {
  require_positive_tau(tau);
  if (model.is_st_venant()) return std::pow(tau, -(model.s + 1.0) / model.r);
  return std::pow(tau, -model.p);
}

double char_speed(const ModelSpec& model, double tau) {
  require_positive_tau(tau);
  if (model.is_st_venant()) return std::pow(tau, -1.5) / std::sqrt(model.F);
  return model.cs;
}

double equilibrium_char(const ModelSpec& model, double tau) {
  require_positive_tau(tau);
  if (model.is_st_venant())
    return (model.s + 1.0) / model.r * std::pow(tau, -(model.r + model.s + 1.0) / model.r);
  return model.p * std::pow(tau, -model.p - 1.0);
}

bool subcharacteristic_ok(const ModelSpec& model, double tau) {
  return equilibrium_char(model, tau) <= char_speed(model, tau);
}

double source(const ModelSpec& model, double tau, double u) {
  require_positive_tau(tau);
  if (model.is_st_venant()) return 1.0 - std::pow(tau, model.s + 1.0) * pow_u(u, model.r);
  return std::pow(tau, -model.p) - u;
}

double source_dtau(const ModelSpec& model, double tau, double u) {
  require_positive_tau(tau);
  if (model.is_st_venant()) return -(model.s + 1.0) * std::pow(tau, model.s) * pow_u(u, model.r);
  return -model.p * std::pow(tau, -model.p - 1.0);
}

double source_du(const ModelSpec& model, double tau, double u) {
  require_positive_tau(tau);
  if (model.is_st_venant()) return -model.r * std::pow(tau, model.s + 1.0) * pow_u(u, model.r - 1.0);
  return -1.0;
}

ConstantStateCoefficients constant_state_coefficients(const ModelSpec& model, const EquilibriumInfo& eq) {
  ConstantStateCoefficients k0;
  k0.a0 = -source_dtau(model, eq.tau0, eq.u0);
  k0.b0 = -source_du(model, eq.tau0, eq.u0);
  k0.pressure = eq.cs * eq.cs;
  k0.visc = model.is_st_venant() ? model.nu / (eq.tau0 * eq.tau0) : 1.0;
  return k0;
}

EquilibriumInfo make_equilibrium(const ModelSpec& model, const WaveParams& wave, double tau0) {
  EquilibriumInfo eq;
  eq.tau0 = tau0;
  eq.u0 = equilibrium_velocity(model, tau0);
  eq.cs = char_speed(model, tau0);
  eq.dfstar = equilibrium_char(model, tau0);

  // kappa mu^2 + (c^2 - cs^2) mu + b0 (df* - c) = 0
  const ConstantStateCoefficients k0 = constant_state_coefficients(model, eq);
  const double c = wave.c;
  const double kappa = c * k0.visc;
  const double lin = c * c - eq.cs * eq.cs;
  const double cst = k0.b0 * (eq.dfstar - c);
  const double disc = lin * lin - 4.0 * kappa * cst;
  const double drift = c * (c * c - eq.cs * eq.cs);
  const double tol = 1e-12 * std::max(c * c, eq.cs * eq.cs) * std::abs(c);
  if (c * (eq.dfstar - c) < 0.0) {
    eq.classification = EquilibriumType::SaddlePoint;
  } else if (std::abs(drift) <= tol) {
    eq.classification = EquilibriumType::Center;
  } else if (drift < 0.0) {
    eq.classification = disc < 0.0 ? EquilibriumType::RepellorSpiral : EquilibriumType::RepellorReal;
  } else {
    eq.classification = disc < 0.0 ? EquilibriumType::AttractorSpiral : EquilibriumType::AttractorReal;
  }
  return eq;
}

DispersionSample dispersion_roots(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                  double k) {
  cplx B, C;
  symbol_coefficients(wave, constant_state_coefficients(model, eq), k, B, C);
  DispersionSample out;
  out.k = k;
  out.roots = solve_quadratic(B, C);
  return out;
}

double dispersion_residual(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq, double k,
                           cplx lambda) {
  cplx B, C;
  symbol_coefficients(wave, constant_state_coefficients(model, eq), k, B, C);
  const double scale = std::norm(lambda) + std::abs(B) * std::abs(lambda) + std::abs(C);
  if (scale == 0.0) return 0.0;
  return std::abs(lambda * lambda + B * lambda + C) / scale;
}

double hopf_frequency(const ModelSpec& model, const EquilibriumInfo& eq) {
  if (eq.dfstar < eq.cs) throw DomainError("no Hopf frequency: df* < c_s at the equilibrium");
  const ConstantStateCoefficients k0 = constant_state_coefficients(model, eq);
  const double num = k0.a0 - eq.cs * k0.b0;
  return std::sqrt(std::max(0.0, num / (eq.cs * k0.visc)));
}

bool hopf_conditions(const ModelSpec&, const WaveParams& wave, const EquilibriumInfo& eq) {
  const double tol = 1e-10;
  const bool on_char = std::abs(wave.c - eq.cs) <= tol * std::max(std::abs(wave.c), std::abs(eq.cs));
  const bool strict = (eq.dfstar - eq.cs) > tol * std::abs(eq.cs);
  return on_char && strict;
}

EssentialSpectrum essential_spectrum_curve(const ModelSpec& model, const WaveParams& wave,
                                           const EquilibriumInfo& eq, std::span<const double> k_grid) {
  if (k_grid.empty()) throw DomainError("k grid must not be empty");
  EssentialSpectrum out;
  out.max_real = -std::numeric_limits<double>::infinity();
  out.samples.reserve(k_grid.size());
  for (double k : k_grid) {
    out.samples.push_back(dispersion_roots(model, wave, eq, k));
    for (const cplx& z : out.samples.back().roots) out.max_real = std::max(out.max_real, z.real());
  }
  return out;
}

}  // namespace pulsestab
