#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/evans.hpp"

namespace pulsestab {

namespace {

Eigen::MatrixXcd initial_basis(const LimitingMatrix& lim, int side) {
  const EvansBasis b = spectral_basis(lim);
  if (side > 0) return b.plus;
  return b.minus;
}

// (I - x)^{-1/2} by its binomial series; x = (P1 - P0)^2 is small.
Mat3c inv_sqrt_series(const Mat3c& x) {
  const Mat3c x2 = x * x;
  return Mat3c::Identity() + x / 2.0 + 3.0 * x2 / 8.0 + 5.0 * x2 * x / 16.0 + 35.0 * x2 * x2 / 128.0;
}

}  // namespace

std::vector<Eigen::MatrixXcd> kato_basis(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                         std::span<const cplx> contour, int side, double max_step) {
  if (side != 1 && side != -1) throw ValidationError("kato_basis side must be +1 or -1");
  std::vector<Eigen::MatrixXcd> out;
  if (contour.empty()) return out;
  out.reserve(contour.size());

  LimitingMatrix lim = limiting_matrix(model, wave, eq, contour[0]);
  Mat3c P = splitting_projector(lim, side);
  Eigen::MatrixXcd R = initial_basis(lim, side);
  out.push_back(R);

  for (std::size_t j = 1; j < contour.size(); ++j) {
    // subdivide the segment until each projector change is below max_step
    std::vector<cplx> pending{contour[j]};
    cplx from = contour[j - 1];
    int splits = 0;
    while (!pending.empty()) {
      const cplx to = pending.back();
      const Mat3c Pn = splitting_projector(limiting_matrix(model, wave, eq, to), side);
      const Mat3c dP = Pn - P;
      if (dP.norm() > max_step) {
        if (++splits > 60) {
          std::ostringstream os;
          os << "Kato transport cannot resolve the projector near lambda=" << to;
          throw NumericalError(os.str());
        }
        pending.push_back(0.5 * (from + to));
        continue;
      }
      R = inv_sqrt_series(dP * dP) * Pn * R;
      P = Pn;
      from = to;
      pending.pop_back();
    }
    out.push_back(R);
  }
  return out;
}

std::vector<EvansBasis> kato_bases(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq,
                                   std::span<const cplx> contour) {
  const auto minus = kato_basis(model, wave, eq, contour, -1);
  const auto plus = kato_basis(model, wave, eq, contour, +1);
  std::vector<EvansBasis> out(contour.size());
  for (std::size_t i = 0; i < contour.size(); ++i) {
    out[i].minus = minus[i];
    out[i].plus = plus[i];
    out[i].id = "kato";
  }
  return out;
}

}  // namespace pulsestab
