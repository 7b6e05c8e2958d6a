#include "pulsestab/hifreq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/log.hpp"

namespace pulsestab {

namespace {

// largest singular value of a 2x2 matrix
double op_norm(const Eigen::Matrix2d& m) {
  const double f2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
  return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

}  // namespace

ThetaPoint theta_point(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt) {
  if (!model.is_st_venant()) throw ValidationError("high-frequency blocks are defined for St. Venant only");
  const double t = pt.tau;
  if (!(t > 0.0)) throw DomainError("high-frequency blocks need tau > 0");
  const double tp = pt.dtau;
  const double al = pt.alpha;
  const double nu = model.nu;
  const double c = wave.c;
  const double sn = std::sqrt(nu);
  const double nu32 = nu * sn;
  const double U = wave.q - c * t;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  const double A = (model.s + 1.0) * std::pow(t, model.s) * std::pow(U, model.r);
  const double B = model.r * std::pow(t, model.s + 1.0) * std::pow(U, model.r - 1.0);
  const double E = c * al * t3 / (nu * nu);
  const double half_diag = A * t2 / (2.0 * nu) + 0.5 * E;
  const double drift = tp / t - c * t2 / (2.0 * nu);
  const double upper = -2.0 * tp / sn + t3 / nu32 * (al / c + c);
  const double lower = B * t / (2.0 * sn) + 0.5 * al * t3 / nu32;
  const double left = t / (2.0 * sn) * (A + c * al * t2 / nu);
  const double corner = -A * t3 / nu32 - c * al * t4 / (nu * nu * sn);

  ThetaPoint p;
  p.pp[0] << al * t2 / (c * nu), -t2 / nu, -al * t2 / (2.0 * nu), drift;
  p.pp[1] << 0.0, upper, left, lower;
  p.pp[2] << -A * t2 / nu - E, -B * t2 / nu, 0.0, half_diag;
  p.pp[3] << 0.0, corner, 0.0, 0.0;
  p.pm[0] << t2 / nu, tp / (2.0 * t) - c * t2 / (2.0 * nu);
  p.pm[1] << upper, -lower;
  p.pm[2] << B * t2 / nu, half_diag;
  p.pm[3] << corner, 0.0;
  p.mp[0] << al * t2 / (2.0 * nu), drift;
  p.mp[1] << left, lower;
  p.mp[2] << 0.0, half_diag;
  p.mm = {drift, -A * t2 / (2.0 * nu) + 0.5 * E, half_diag};
  p.theta = -al / nu;
  p.mu = 1.0 / (t * sn);
  p.theta_tilde = t / sn;
  p.tau = t;
  return p;
}

ThetaBlocks theta_blocks(const ProfileSolution& profile) {
  ThetaBlocks out;
  out.x = profile.grid;
  out.points.reserve(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i)
    out.points.push_back(theta_point(profile.model, profile.wave, profile.node(i)));
  return out;
}

HfCoefficients hf_coefficients_at(const ThetaPoint& p, double nu) {
  std::array<double, 4> npp{}, npm{};
  std::array<double, 3> nmp{}, nmm{};
  for (int k = 0; k < 4; ++k) {
    npp[k] = op_norm(p.pp[k]);
    npm[k] = p.pm[k].norm();
  }
  for (int k = 0; k < 3; ++k) {
    nmp[k] = p.mp[k].norm();
    nmm[k] = std::abs(p.mm[k]);
  }
  const double k = std::sqrt(2.0 * nu) / p.tau;
  HfCoefficients a;
  a.a0 = k * (nmm[0] + npp[0] + 2.0 * std::sqrt(nmp[0] * npm[0]));
  a.a_half = k * 2.0 * std::sqrt(nmp[0] * npm[1] + nmp[1] * npm[0]);
  a.a1 = k * (nmm[1] + npp[1] + 2.0 * std::sqrt(nmp[1] * npm[1] + nmp[0] * npm[2] + nmp[2] * npm[0]));
  a.a_3half = k * 2.0 * std::sqrt(nmp[0] * npm[3] + nmp[1] * npm[2] + nmp[2] * npm[1]);
  a.a2 = k * (nmm[2] + npp[2] + 2.0 * std::sqrt(nmp[2] * npm[2] + nmp[1] * npm[3]));
  a.a_5quarter = k * 2.0 * std::sqrt(nmp[2] * npm[3]);
  a.a3 = k * npp[3];
  return a;
}

HfCoefficients hf_coefficients(const ThetaBlocks& blocks, const ProfileSolution& profile) {
  HfCoefficients m;
  const double nu = profile.model.nu;
  for (const ThetaPoint& p : blocks.points) {
    const HfCoefficients a = hf_coefficients_at(p, nu);
    m.a0 = std::max(m.a0, a.a0);
    m.a_half = std::max(m.a_half, a.a_half);
    m.a1 = std::max(m.a1, a.a1);
    m.a_3half = std::max(m.a_3half, a.a_3half);
    m.a2 = std::max(m.a2, a.a2);
    m.a_5quarter = std::max(m.a_5quarter, a.a_5quarter);
    m.a3 = std::max(m.a3, a.a3);
  }
  return m;
}

double hf_polynomial(const HfCoefficients& a, double X) {
  const double X2 = X * X, X3 = X2 * X, X4 = X2 * X2;
  return X4 * X4 - a.a0 * X4 * X2 - a.a_half * X4 * X - a.a1 * X4 - a.a_3half * X3 - a.a2 * X2 -
         a.a_5quarter * X - a.a3;
}

namespace {

// Unique positive root of a monic polynomial with one sign change, by bisection.
template <class P>
double positive_root(P poly, double hi) {
  double lo = 0.0;
  while (poly(hi) <= 0.0) hi *= 2.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (poly(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

HfBound hf_radius(const HfCoefficients& a) {
  const std::array<double, 7> all{a.a0, a.a_half, a.a1, a.a_3half, a.a2, a.a_5quarter, a.a3};
  double sum = 0.0;
  for (double v : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("high-frequency coefficients must be finite and >= 0");
    sum += v;
  }
  HfBound b;
  if (sum == 0.0) {
    warn("all high-frequency coefficients vanish; radius set to 0");
    return b;
  }
  b.R = positive_root([&](double X) { return hf_polynomial(a, X); }, 1.0 + sum);
  b.radius = std::pow(b.R, 4);
  const double X = b.R, X2 = X * X, X4 = X2 * X2;
  const double scale = std::max({X4 * X4, a.a0 * X4 * X2, a.a_half * X4 * X, a.a1 * X4, a.a_3half * X2 * X,
                                 a.a2 * X2, a.a_5quarter * X, a.a3});
  b.residual = std::abs(hf_polynomial(a, X)) / scale;

  const double t0 = a.a0 + a.a_half / 2.0;
  const double t1 = a.a_half / 2.0 + a.a1 + a.a_3half / 2.0;
  const double t2 = a.a_3half / 2.0 + a.a2 + a.a_5quarter / 2.0;
  const double t3 = a.a_5quarter / 2.0 + a.a3;
  const double y = positive_root(
      [&](double Y) { return Y * Y * Y * Y - t0 * Y * Y * Y - t1 * Y * Y - t2 * Y - t3; }, 1.0 + t0 + t1 + t2 + t3);
  b.relaxed_quartic = y * y;
  const double p1 = t0 * t0 + 2.0 * t1 + t2;
  const double p0 = t2 + 2.0 * t3;
  b.relaxed_quadratic = 0.5 * (p1 + std::sqrt(p1 * p1 + 4.0 * p0));
  return b;
}

namespace {

struct ArcNode {
  double theta;
  EvansEvaluation ev;
};

}  // namespace

std::vector<ConvergenceEntry> hf_convergence_study(const EvansSystem& system, const std::vector<double>& radii,
                                                   const ConvergenceOptions& opts) {
  if (opts.n_base < 4) throw ValidationError("convergence study needs n_base >= 4");
  std::vector<ConvergenceEntry> out;
  for (double R : radii) {
    ConvergenceEntry entry;
    entry.R = R;
    try {
      if (!(R > 0.0)) throw ValidationError("radius must be positive");
      auto eval_at = [&](double th) {
        return ArcNode{th, evans_eval(system, std::polar(R, th), opts.evans)};
      };
      // upper quarter arc; the lower one is the conjugate
      std::vector<ArcNode> nodes;
      std::vector<char> base;
      for (int i = 0; i <= opts.n_base; ++i) {
        nodes.push_back(eval_at(0.5 * std::numbers::pi * i / opts.n_base));
        base.push_back(1);
      }
      // The accumulated growth phase is continuous in lambda; only the arg of the
      // determinant ratio is reduced, so unwrap that part alone.
      auto ratio_arg = [](const EvansEvaluation& e) { return e.log_D.imag() - e.growth_phase; };
      for (int round = 0; round < 40; ++round) {
        std::vector<ArcNode> refined;
        std::vector<char> rbase;
        bool changed = false;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
          refined.push_back(nodes[i]);
          rbase.push_back(base[i]);
          const double jump = std::remainder(ratio_arg(nodes[i + 1].ev) - ratio_arg(nodes[i].ev), 2.0 * std::numbers::pi);
          if (std::abs(jump) > 0.5 * std::numbers::pi) {
            refined.push_back(eval_at(0.5 * (nodes[i].theta + nodes[i + 1].theta)));
            rbase.push_back(0);
            changed = true;
          }
        }
        refined.push_back(nodes.back());
        rbase.push_back(base.back());
        nodes.swap(refined);
        base.swap(rbase);
        if (!changed) break;
        if (round == 39) throw UnreliableResult("phase tracking on the arc did not resolve");
      }
      // continuous log D, anchored to a real value at lambda = R
      std::vector<cplx> logd(nodes.size());
      const EvansEvaluation& e0 = nodes[0].ev;
      logd[0] = cplx(e0.log_D.real(), e0.mantissa.real() < 0.0 ? std::numbers::pi : 0.0);
      double arg = ratio_arg(e0);
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        const EvansEvaluation& e = nodes[i].ev;
        arg += std::remainder(ratio_arg(e) - ratio_arg(nodes[i - 1].ev), 2.0 * std::numbers::pi);
        logd[i] = cplx(e.log_D.real(), logd[0].imag() + (e.growth_phase - e0.growth_phase) + (arg - ratio_arg(e0)));
      }
      // real least squares for log D ~ a + b sqrt(lambda), a and b real
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (base[i]) idx.push_back(i);
      const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd M(2 * m, 2);
      Eigen::VectorXd rhs(2 * m);
      const double anchor_im = logd[0].imag();
      for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t i = idx[j];
        const cplx sq = std::sqrt(std::polar(R, nodes[i].theta));
        M(2 * j, 0) = 1.0;
        M(2 * j, 1) = sq.real();
        rhs(2 * j) = logd[i].real();
        M(2 * j + 1, 0) = 0.0;
        M(2 * j + 1, 1) = sq.imag();
        rhs(2 * j + 1) = logd[i].imag() - anchor_im;
      }
      const Eigen::Vector2d ab = M.colPivHouseholderQr().solve(rhs);
      if (!ab.allFinite()) throw NumericalError("fit failed");
      double worst = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!base[i]) continue;
        const cplx sq = std::sqrt(std::polar(R, nodes[i].theta));
        const cplx fit = ab(0) + ab(1) * sq + cplx(0.0, anchor_im);
        worst = std::max(worst, std::abs(fit - logd[i]));
      }
      entry.relative_error = worst;
      entry.c1 = std::exp(ab(0)) * (anchor_im != 0.0 ? -1.0 : 1.0);
      entry.c2 = ab(1);
      entry.n_points = nodes.size();
      entry.valid = true;
    } catch (const Error& e) {
      std::ostringstream os;
      os << "convergence fit at R=" << R << " failed: " << e.what();
      warn(os.str());
    }
    out.push_back(entry);
  }
  return out;
}

}  // namespace pulsestab
