#include "pulsestab/bloch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pulsestab/error.hpp"

namespace pulsestab {

OperatorCoefficients operator_coefficients(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt) {
  OperatorCoefficients k;
  const double c = wave.c;
  if (model.is_st_venant()) {
    const double t = pt.tau;
    const double a = (model.s + 1.0) * std::pow(t, model.s) * std::pow(pt.u, model.r);
    const double b = model.r * std::pow(t, model.s + 1.0) * std::pow(pt.u, model.r - 1.0);
    k.d2 = model.nu / (t * t);
    k.d1 = c - 2.0 * model.nu * pt.dtau / (t * t * t);
    k.d0 = -b;
    k.e1 = pt.alpha;
    k.e0 = pt.dalpha - a;
  } else {
    k.d2 = 1.0;
    k.d1 = c;
    k.d0 = -1.0;
    k.e1 = model.cs * model.cs;
    k.e0 = -model.p * std::pow(pt.tau, -model.p - 1.0);
  }
  return k;
}

namespace {

double coeff_jump(const OperatorCoefficients& a, const OperatorCoefficients& b) {
  return std::max({std::abs(a.d2 - b.d2), std::abs(a.d1 - b.d1), std::abs(a.d0 - b.d0), std::abs(a.e1 - b.e1),
                   std::abs(a.e0 - b.e0)});
}

}  // namespace

PeriodicExtension periodic_extension(const ProfileSolution& profile, const ExtensionOptions& opts) {
  if (!(opts.paste_tol > 0.0)) throw ValidationError("paste_tol must be positive");
  if (profile.size() < 3) throw ValidationError("profile too short to extend");
  if (profile.truncation_error > opts.paste_tol) {
    std::ostringstream os;
    os << "profile tails (" << profile.truncation_error << ") not converged to paste_tol " << opts.paste_tol;
    throw NumericalError(os.str());
  }
  const double tau0 = profile.endstate.tau0;
  std::size_t ic = 0;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (std::abs(profile.tau[i] - tau0) > std::abs(profile.tau[ic] - tau0)) ic = i;
  // paste where tau and every coefficient have settled, so the seam jump stays below paste_tol
  const OperatorCoefficients rest = operator_coefficients(profile.model, profile.wave, profile.at(profile.L + 1.0));
  auto settled = [&](std::size_t i) {
    return std::abs(profile.tau[i] - tau0) <= opts.paste_tol &&
           coeff_jump(operator_coefficients(profile.model, profile.wave, profile.node(i)), rest) <= 0.5 * opts.paste_tol;
  };
  std::size_t il = ic, ir = ic;
  while (il > 0 && !settled(il)) --il;
  while (ir + 1 < profile.size() && !settled(ir)) ++ir;
  const double xl = profile.grid[il], xr = profile.grid[ir];
  const double support = xr - xl;

  PeriodicExtension ext;
  ext.X = support;
  if (opts.period > 0.0) {
    if (opts.period < support) {
      std::ostringstream os;
      os << "period " << opts.period << " shorter than the profile support " << support;
      throw ValidationError(os.str());
    }
    ext.X = opts.period;
  }
  if (opts.copies < 1) throw ValidationError("copies must be >= 1");
  const double cell = ext.X;
  ext.X *= opts.copies;
  ext.x0 = xl - 0.5 * (cell - support);
  ext.c = profile.wave.c;
  ext.paste_tol = opts.paste_tol;
  ext.source = profile.model.is_st_venant() ? "st_venant profile" : "jin_xin profile";
  std::size_t n = opts.n_grid;
  if (n == 0) n = static_cast<std::size_t>(std::ceil(ext.X / profile.dx));
  // position inside the single-pulse cell
  auto cell_x = [&](double x) { return ext.x0 + std::fmod(x - ext.x0, cell); };
  if (n < 8) throw ValidationError("extension grid too coarse");
  ext.x.resize(n);
  ext.coeffs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ext.x[j] = ext.x0 + ext.X * static_cast<double>(j) / static_cast<double>(n);
    ext.coeffs[j] = operator_coefficients(profile.model, profile.wave, profile.at(cell_x(ext.x[j])));
  }
  ext.seam_jump = coeff_jump(operator_coefficients(profile.model, profile.wave, profile.at(ext.x0)),
                             operator_coefficients(profile.model, profile.wave, profile.at(ext.x0 + cell)));
  return ext;
}

PeriodicExtension constant_extension(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                     double X, std::size_t n_grid) {
  if (!(X > 0.0)) throw ValidationError("period must be positive");
  if (n_grid < 8) throw ValidationError("extension grid too coarse");
  ProfilePoint pt;
  pt.tau = eq.tau0;
  pt.u = eq.u0;
  pt.alpha = model.is_st_venant() ? 1.0 / (model.F * eq.tau0 * eq.tau0 * eq.tau0) : model.cs * model.cs;
  PeriodicExtension ext;
  ext.X = X;
  ext.c = wave.c;
  ext.paste_tol = 0.0;
  ext.source = "constant state";
  ext.x.resize(n_grid);
  ext.coeffs.assign(n_grid, operator_coefficients(model, wave, pt));
  for (std::size_t j = 0; j < n_grid; ++j) ext.x[j] = X * static_cast<double>(j) / static_cast<double>(n_grid);
  return ext;
}

std::vector<double> bloch_grid(double X, int n) {
  if (!(X > 0.0) || n < 1) throw ValidationError("bloch grid needs X > 0 and n >= 1");
  std::vector<double> xi(n);
  for (int j = 0; j < n; ++j) xi[j] = -std::numbers::pi / X + 2.0 * std::numbers::pi * j / (n * X);
  return xi;
}

std::vector<BlochSample> hill_spectrum(const PeriodicExtension& ext, std::span<const double> xi_list, int N) {
  if (N < 8) throw ValidationError("Hill's method needs N >= 8");
  const int K = 2 * N + 1;
  const std::size_t M = ext.x.size();
  if (M < static_cast<std::size_t>(4 * K)) {
    std::ostringstream os;
    os << "extension grid has " << M << " points; Hill's method with N=" << N << " needs " << 4 * K;
    throw ValidationError(os.str());
  }
  // Fourier coefficients for shifts -2N..2N, in the local coordinate x - x0
  const int J = 2 * N;
  std::array<std::vector<cplx>, 5> hat;
  for (auto& h : hat) h.assign(2 * J + 1, 0.0);
  for (int j = -J; j <= J; ++j) {
    std::array<cplx, 5> acc{};
    for (std::size_t n = 0; n < M; ++n) {
      const double ang = -2.0 * std::numbers::pi * j * static_cast<double>(n) / static_cast<double>(M);
      const cplx w(std::cos(ang), std::sin(ang));
      const OperatorCoefficients& k = ext.coeffs[n];
      acc[0] += k.d2 * w;
      acc[1] += k.d1 * w;
      acc[2] += k.d0 * w;
      acc[3] += k.e1 * w;
      acc[4] += k.e0 * w;
    }
    for (int f = 0; f < 5; ++f) hat[f][j + J] = acc[f] / static_cast<double>(M);
  }

  std::vector<BlochSample> out;
  out.reserve(xi_list.size());
  const cplx I(0.0, 1.0);
  for (double xi : xi_list) {
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(2 * K, 2 * K);
    for (int a = 0; a < K; ++a) {
      const cplx ika = I * (xi + 2.0 * std::numbers::pi * (a - N) / ext.X);
      L(a, a) = ext.c * ika;
      L(a, K + a) = ika;
      for (int b = 0; b < K; ++b) {
        const int s = a - b + J;
        const cplx ikb = I * (xi + 2.0 * std::numbers::pi * (b - N) / ext.X);
        L(K + a, K + b) = hat[0][s] * ikb * ikb + hat[1][s] * ikb + hat[2][s];
        L(K + a, b) = hat[3][s] * ikb + hat[4][s];
      }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L, false);
    if (es.info() != Eigen::Success) {
      std::ostringstream os;
      os << "eigen-solver failed at xi=" << xi;
      throw NumericalError(os.str());
    }
    BlochSample s;
    s.xi = xi;
    s.N = N;
    s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    out.push_back(std::move(s));
  }
  return out;
}

EssentialVerdict essential_spectrum_of_wave(const ModelSpec& model, const WaveParams& wave,
                                            const EquilibriumInfo& eq, std::span<const double> k_grid) {
  EssentialVerdict v;
  v.curve = essential_spectrum_curve(model, wave, eq, k_grid);
  v.stable = v.curve.max_real <= 1e-10;
  return v;
}

}  // namespace pulsestab
