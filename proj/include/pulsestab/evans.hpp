#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pulsestab/model.hpp"
#include "pulsestab/profile.hpp"

namespace pulsestab {

using Mat3c = Eigen::Matrix<cplx, 3, 3>;
using Vec3c = Eigen::Matrix<cplx, 3, 1>;
using Mat32c = Eigen::Matrix<cplx, 3, 2>;
using Mat3d = Eigen::Matrix3d;

enum class SplittingStatus { Consistent, ExtendedOnly, Fail };

std::string to_string(SplittingStatus status);

struct SplittingReport {
  cplx lambda;
  std::array<cplx, 3> eigenvalues{};  // ascending real part
  SplittingStatus status = SplittingStatus::Fail;
  int unstable_dim = 0;
  int stable_dim = 0;
  double gap = 0.0;  // Re(mu_mid) - Re(mu_min)
};

struct LimitingMatrix {
  Mat3c A0;
  SplittingReport report;
};

/// A(x, lambda) at a profile point. St. Venant uses W = (tau, u, tau^{-2} u'),
/// Jin-Xin uses W = (tau, u, u').
Mat3c evans_matrix(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt, cplx lambda);

/// A(x, lambda) = A0(x) + lambda * A1(x); both real.
void evans_matrix_parts(const ModelSpec& model, const WaveParams& wave, const ProfilePoint& pt, Mat3d& A0,
                        Mat3d& A1);

LimitingMatrix limiting_matrix(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                               cplx lambda);

class EvansSystem {
 public:
  explicit EvansSystem(std::shared_ptr<const ProfileSolution> profile);

  Mat3c matrix_at(double x, cplx lambda) const;
  LimitingMatrix limiting(cplx lambda) const;
  const ProfileSolution& profile() const { return *profile_; }
  std::shared_ptr<const ProfileSolution> profile_ptr() const { return profile_; }
  const ModelSpec& model() const { return profile_->model; }
  const WaveParams& wave() const { return profile_->wave; }
  const EquilibriumInfo& endstate() const { return profile_->endstate; }

 private:
  std::shared_ptr<const ProfileSolution> profile_;
};

/// Initializing bases: minus spans the unstable subspace of A0 (2D), plus the stable one (1D).
struct EvansBasis {
  Mat32c minus;
  Vec3c plus;
  std::string id;
};

/// Bases from the spectral projector of the simple stable eigenvalue at lambda.
EvansBasis spectral_basis(const LimitingMatrix& lim);

/// Spectral projector onto the unstable (side = -1) or stable (side = +1) subspace of A0.
Mat3c splitting_projector(const LimitingMatrix& lim, int side);

/// Kato continuation of the side's subspace basis along an ordered lambda list.
/// side = -1: 3x2 unstable basis; side = +1: 3x1 stable basis.
std::vector<Eigen::MatrixXcd> kato_basis(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                         std::span<const cplx> contour, int side, double max_step = 0.1);

/// Both sides along the contour, packaged per point.
std::vector<EvansBasis> kato_bases(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                   std::span<const cplx> contour);

struct EvansOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
};

struct EvansEvaluation {
  cplx lambda;
  cplx D;              // may underflow/overflow; see log_D
  cplx log_D;          // log D, imaginary part not reduced
  double log_radius = 0.0;          // Re(growth) so that D = exp(log_radius) * mantissa
  cplx mantissa;
  std::array<double, 2> radii{};    // log growth of the minus and plus frames
  double growth_phase = 0.0;        // Im of the accumulated growth; continuous in lambda
  std::string basis_id;
  long steps = 0;
};

EvansEvaluation evans_eval(const EvansSystem& system, cplx lambda, const EvansBasis& basis,
                           const EvansOptions& opts = {});
/// Spectral-projector bases at lambda.
EvansEvaluation evans_eval(const EvansSystem& system, cplx lambda, const EvansOptions& opts = {});

struct DerivativeSign {
  int sign = 0;
  std::vector<double> h;
  std::vector<double> slopes;  // Re (D(h) - D(0)) / h
};

/// Sign of D'(0) from slopes at small positive real lambda, consistent across all h.
DerivativeSign evans_derivative_sign_at_zero(const EvansSystem& system, std::vector<double> h_list = {1e-5, 1e-4},
                                             const EvansOptions& opts = {});

enum class StabilityIndex { EvenUnstableCount, OddUnstableCount };

std::string to_string(StabilityIndex index);

struct StabilityIndexReport {
  StabilityIndex parity = StabilityIndex::EvenUnstableCount;
  int dprime_sign = 0;
  double lambda_large = 0.0;
  double sign_D_large = 0.0;
};

/// Parity of unstable roots from sgn D'(0) against sgn D(lambda_large) = +1.
StabilityIndexReport stability_index(const EvansSystem& system, double lambda_large, const EvansOptions& opts = {});

}  // namespace pulsestab
