#include "pulsestab/evans.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/ode.hpp"

namespace pulsestab {

namespace {

ProfilePoint endstate_point(const ModelSpec& model, const EquilibriumInfo& eq) {
  ProfilePoint p;
  p.tau = eq.tau0;
  p.u = eq.u0;
  p.alpha = model.is_st_venant() ? 1.0 / (model.F * eq.tau0 * eq.tau0 * eq.tau0) : model.cs * model.cs;
  return p;
}

Vec3c null_vector(const Mat3c& M) {
  Eigen::JacobiSVD<Mat3c> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().col(2);
}

}  // namespace

std::string to_string(SplittingStatus status) {
  switch (status) {
    case SplittingStatus::Consistent: return "Consistent";
    case SplittingStatus::ExtendedOnly: return "ExtendedOnly";
    case SplittingStatus::Fail: return "Fail";
  }
  return "?";
}

std::string to_string(StabilityIndex index) {
  return index == StabilityIndex::EvenUnstableCount ? "Even" : "Odd";
}

void evans_matrix_parts(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt, Mat3d& A0,
                        Mat3d& A1) {
  const double c = wave.c;
  A0.setZero();
  A1.setZero();
  A1(0, 0) = 1.0 / c;
  if (model.is_st_venant()) {
    const double nu = model.nu;
    const double t2 = pt.tau * pt.tau;
    const double a = (model.s + 1.0) * std::pow(pt.tau, model.s) * std::pow(pt.u, model.r);
    const double b = model.r * std::pow(pt.tau, model.s + 1.0) * std::pow(pt.u, model.r - 1.0);
    A0(0, 2) = -t2 / c;
    A0(1, 2) = t2;
    A0(2, 0) = (a - pt.dalpha) / nu;
    A0(2, 1) = b / nu;
    A0(2, 2) = (-c * t2 + pt.alpha * t2 / c) / nu;
    A1(2, 0) = -pt.alpha / (c * nu);
    A1(2, 1) = 1.0 / nu;
  } else {
    const double cs2 = model.cs * model.cs;
    A0(0, 2) = -1.0 / c;
    A0(1, 2) = 1.0;
    A0(2, 0) = model.p * std::pow(pt.tau, -model.p - 1.0);
    A0(2, 1) = 1.0;
    A0(2, 2) = cs2 / c - c;
    A1(2, 0) = -cs2 / c;
    A1(2, 1) = 1.0;
  }
}

Mat3c evans_matrix(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt, cplx lambda) {
  Mat3d A0, A1;
  evans_matrix_parts(model, wave, pt, A0, A1);
  return A0.cast<cplx>() + lambda * A1.cast<cplx>();
}

LimitingMatrix limiting_matrix(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                               cplx lambda) {
  LimitingMatrix out;
  out.A0 = evans_matrix(model, wave, endstate_point(model, eq), lambda);
  Eigen::ComplexEigenSolver<Mat3c> es(out.A0, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed on the limiting matrix");
  std::array<cplx, 3> ev{es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  SplittingReport& rep = out.report;
  rep.lambda = lambda;
  rep.eigenvalues = ev;
  rep.gap = ev[1].real() - ev[0].real();
  const double scale = std::max({1.0, std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2])});
  for (const cplx& m : ev) {
    if (m.real() > 0.0) ++rep.unstable_dim;
    if (m.real() < 0.0) ++rep.stable_dim;
  }
  if (rep.gap <= 1e-9 * scale) {
    rep.status = SplittingStatus::Fail;
  } else if (ev[0].real() < 0.0 && ev[1].real() > 0.0) {
    rep.status = SplittingStatus::Consistent;
  } else {
    rep.status = SplittingStatus::ExtendedOnly;
  }
  return out;
}

Mat3c splitting_projector(const LimitingMatrix& lim, int side) {
  if (lim.report.status == SplittingStatus::Fail) {
    std::ostringstream os;
    os << "splitting fails at lambda=" << lim.report.lambda;
    throw NumericalError(os.str());
  }
  const cplx mu = lim.report.eigenvalues[0];
  const Mat3c shifted = lim.A0 - mu * Mat3c::Identity();
  const Vec3c v = null_vector(shifted);
  const Vec3c w = null_vector(shifted.adjoint());
  const cplx wv = w.dot(v);  // w^H v
  const Mat3c Ps = v * w.adjoint() / wv;
  return side > 0 ? Ps : Mat3c(Mat3c::Identity() - Ps);
}

EvansBasis spectral_basis(const LimitingMatrix& lim) {
  if (lim.report.status == SplittingStatus::Fail) {
    std::ostringstream os;
    os << "splitting fails at lambda=" << lim.report.lambda;
    throw NumericalError(os.str());
  }
  const cplx mu = lim.report.eigenvalues[0];
  const Mat3c shifted = lim.A0 - mu * Mat3c::Identity();
  EvansBasis b;
  b.plus = null_vector(shifted);
  // unstable subspace = orthogonal complement of the left stable eigenvector
  const Vec3c w = null_vector(shifted.adjoint());
  Eigen::HouseholderQR<Vec3c> qr(w);
  const Mat3c Q = qr.householderQ();
  b.minus = Q.rightCols<2>();
  b.id = "spectral";
  return b;
}

EvansSystem::EvansSystem(std::shared_ptr<const ProfileSolution> profile) : profile_(std::move(profile)) {
  if (!profile_) throw ValidationError("EvansSystem needs a profile");
}

Mat3c EvansSystem::matrix_at(double x, cplx lambda) const {
  return evans_matrix(model(), wave(), profile_->at(x), lambda);
}

LimitingMatrix EvansSystem::limiting(cplx lambda) const { return limiting_matrix(model(), wave(), endstate(), lambda); }

namespace {

template <int K>
struct FrameResult {
  Eigen::Matrix<cplx, 3, K> frame;
  cplx growth;
  long steps = 0;
};

// Orthonormal frame Omega' = (I - Omega Omega^H) A Omega with the log of the volume growth,
// minus `shift` (the limiting trace), accumulated as an extra component.
template <int K>
FrameResult<K> integrate_frame(const EvansSystem& sys, cplx lambda, const Eigen::Matrix<cplx, 3, K>& omega0,
                               double x0, double x1, cplx shift, const EvansOptions& opts) {
  using State = Eigen::Matrix<cplx, 3 * K + 1, 1>;
  using Frame = Eigen::Matrix<cplx, 3, K>;
  const ProfileSolution& prof = sys.profile();
  const ModelSpec& model = sys.model();
  const WaveParams& wave = sys.wave();
  auto rhs = [&](double x, const State& y) -> State {
    Mat3d B0, B1;
    evans_matrix_parts(model, wave, prof.at(x), B0, B1);
    const Mat3c A = B0.cast<cplx>() + lambda * B1.cast<cplx>();
    const Eigen::Map<const Frame> om(y.data());
    const Frame Aom = A * om;
    const Eigen::Matrix<cplx, K, K> M = om.adjoint() * Aom;
    State dy;
    Eigen::Map<Frame>(dy.data()) = Aom - om * M;
    dy[3 * K] = M.trace() - shift;
    return dy;
  };
  auto orthonormalize = [](State& y) {
    Eigen::Map<Frame> om(y.data());
    cplx logdet = 0.0;
    for (int j = 0; j < K; ++j) {
      for (int i = 0; i < j; ++i) om.col(j) -= om.col(i) * om.col(i).dot(om.col(j));
      const double r = om.col(j).norm();
      om.col(j) /= r;
      logdet += std::log(r);
    }
    y[3 * K] += logdet;
  };

  State y0;
  Eigen::Map<Frame>(y0.data()) = omega0;
  y0[3 * K] = 0.0;
  orthonormalize(y0);
  y0[3 * K] = 0.0;

  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  const double dir = x1 > x0 ? 1.0 : -1.0;
  auto ode = make_dopri<State>(rhs, x0, y0, dir, o);
  while (dir * (x1 - ode.x()) > 0.0) {
    ode.step(x1);
    State y = ode.y();
    const Eigen::Map<const Frame> om(y.data());
    const double drift = (om.adjoint() * om - Eigen::Matrix<cplx, K, K>::Identity()).cwiseAbs().maxCoeff();
    if (!std::isfinite(drift)) throw NumericalError("Evans frame integration overflow");
    if (drift > 1e-10) {
      orthonormalize(y);
      ode.reset_state(y);
    }
  }
  FrameResult<K> out;
  State y = ode.y();
  orthonormalize(y);
  out.frame = Eigen::Map<const Frame>(y.data());
  out.growth = y[3 * K];
  out.steps = ode.steps();
  return out;
}

}  // namespace

EvansEvaluation evans_eval(const EvansSystem& system, cplx lambda, const EvansBasis& basis,
                           const EvansOptions& opts) {
  const LimitingMatrix lim = system.limiting(lambda);
  if (lim.report.status == SplittingStatus::Fail) {
    std::ostringstream os;
    os << "splitting fails at lambda=" << lambda;
    throw NumericalError(os.str());
  }
  const cplx mu_s = lim.report.eigenvalues[0];
  const cplx tr_unstable = lim.A0.trace() - mu_s;
  const double L = system.profile().L;

  // Gram-Schmidt on the basis columns; the final ratio of determinants undoes it.
  Mat32c om_minus = basis.minus;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < j; ++i) om_minus.col(j) -= om_minus.col(i) * om_minus.col(i).dot(om_minus.col(j));
    om_minus.col(j).normalize();
  }
  const Vec3c om_plus = basis.plus.normalized();

  const FrameResult<2> fm = integrate_frame<2>(system, lambda, om_minus, -L, 0.0, tr_unstable, opts);
  const FrameResult<1> fp = integrate_frame<1>(system, lambda, om_plus, L, 0.0, mu_s, opts);

  Mat3c num, den;
  num << fm.frame, fp.frame;
  den << om_minus, om_plus;
  const cplx ratio = num.determinant() / den.determinant();
  const cplx growth = fm.growth + fp.growth;

  EvansEvaluation ev;
  ev.lambda = lambda;
  ev.log_radius = growth.real();
  ev.mantissa = std::exp(cplx(0.0, growth.imag())) * ratio;
  ev.D = std::exp(growth) * ratio;
  ev.log_D = growth + std::log(ratio);
  ev.radii = {fm.growth.real(), fp.growth.real()};
  ev.growth_phase = growth.imag();
  ev.basis_id = basis.id;
  ev.steps = fm.steps + fp.steps;
  return ev;
}

EvansEvaluation evans_eval(const EvansSystem& system, cplx lambda, const EvansOptions& opts) {
  return evans_eval(system, lambda, spectral_basis(system.limiting(lambda)), opts);
}

DerivativeSign evans_derivative_sign_at_zero(const EvansSystem& system, std::vector<double> h_list,
                                             const EvansOptions& opts) {
  if (h_list.empty()) throw ValidationError("need at least one step for the D'(0) sign");
  DerivativeSign out;
  const cplx d0 = evans_eval(system, 0.0, opts).D;
  for (double h : h_list) {
    if (!(h > 0.0)) throw ValidationError("D'(0) steps must be positive");
    const cplx dh = evans_eval(system, h, opts).D;
    out.h.push_back(h);
    out.slopes.push_back((dh - d0).real() / h);
  }
  const int s = out.slopes.front() > 0.0 ? 1 : (out.slopes.front() < 0.0 ? -1 : 0);
  for (double v : out.slopes) {
    const int t = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (t != s || t == 0) {
      std::ostringstream os;
      os << "inconsistent D'(0) sign across steps:";
      for (std::size_t i = 0; i < out.h.size(); ++i) os << " h=" << out.h[i] << " slope=" << out.slopes[i];
      throw NumericalError(os.str());
    }
  }
  out.sign = s;
  return out;
}

StabilityIndexReport stability_index(const EvansSystem& system, double lambda_large, const EvansOptions& opts) {
  StabilityIndexReport rep;
  rep.dprime_sign = evans_derivative_sign_at_zero(system, {1e-5, 1e-4}, opts).sign;
  rep.lambda_large = lambda_large;
  const EvansEvaluation big = evans_eval(system, lambda_large, opts);
  rep.sign_D_large = big.mantissa.real() > 0.0 ? 1.0 : -1.0;
  if (rep.sign_D_large < 0.0) {
    std::ostringstream os;
    os << "sgn D(" << lambda_large << ") = -1; the large-lambda normalization does not hold";
    throw NumericalError(os.str());
  }
  rep.parity = rep.dprime_sign < 0 ? StabilityIndex::OddUnstableCount : StabilityIndex::EvenUnstableCount;
  return rep;
}

}  // namespace pulsestab
