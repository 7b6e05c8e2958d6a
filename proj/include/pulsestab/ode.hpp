#pragma once

// Dormand-Prince 5(4) with dense output, for Eigen column vectors (real or complex).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "pulsestab/error.hpp"

namespace pulsestab {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: automatic
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

template <class Vec, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs f, double x0, const Vec& y0, double direction, OdeOptions opts)
      : f_(std::move(f)), opts_(opts), dir_(direction >= 0.0 ? 1.0 : -1.0), x_(x0), y_(y0) {
    k1_ = f_(x_, y_);
    h_ = opts_.h_init > 0.0 ? opts_.h_init : initial_step();
    x_prev_ = x_;
    y_prev_ = y_;
  }

  double x() const { return x_; }
  double x_prev() const { return x_prev_; }
  const Vec& y() const { return y_; }
  const Vec& y_prev() const { return y_prev_; }
  const Vec& derivative() const { return k1_; }
  long steps() const { return n_steps_; }
  double last_step() const { return x_ - x_prev_; }

  /// Take one accepted step without passing x_stop.
  void step(double x_stop = std::numeric_limits<double>::quiet_NaN()) {
    bool rejected = false;
    for (;;) {
      double h = std::min(h_, opts_.h_max);
      if (!std::isnan(x_stop)) {
        const double room = dir_ * (x_stop - x_);
        if (room <= 0.0) throw NumericalError("ode: step requested past the end point");
        if (h >= room) h = room;
      }
      if (h < opts_.h_min) {
        std::ostringstream os;
        os << "ode: step size underflow at x=" << x_ << " (h=" << h << ")";
        throw NumericalError(os.str());
      }
      if (++n_steps_ > opts_.max_steps) throw NumericalError("ode: step budget exhausted");
      const double hs = dir_ * h;
      attempt(hs);
      const double err = error_norm();
      if (!std::isfinite(err)) {
        h_ = 0.25 * h;
        rejected = true;
        continue;
      }
      if (err <= 1.0) {
        double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
        // Dense output coefficients for the accepted step.
        rc1_ = y_;
        rc2_ = ynew_ - y_;
        rc3_ = hs * k1_ - rc2_;
        rc4_ = rc2_ - hs * k7_ - rc3_;
        rc5_ = hs * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
        x_prev_ = x_;
        y_prev_ = y_;
        x_ = x_ + hs;
        if (!std::isnan(x_stop) && std::abs(x_ - x_stop) <= 1e-14 * std::max(1.0, std::abs(x_stop))) x_ = x_stop;
        h_used_ = hs;
        y_ = ynew_;
        k1_ = k7_;
        h_ = h * fac;
        return;
      }
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      rejected = true;
    }
  }

  /// Continuous extension over the last accepted step.
  Vec dense(double x) const {
    const double th = (x - x_prev_) / h_used_;
    const double th1 = 1.0 - th;
    return rc1_ + th * (rc2_ + th1 * (rc3_ + th * (rc4_ + th1 * rc5_)));
  }

  /// Replace the current state (after a projection); the derivative is refreshed.
  void reset_state(const Vec& y) {
    y_ = y;
    k1_ = f_(x_, y_);
  }

 private:
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  void attempt(double h) {
    k2_ = f_(x_ + c2 * h, y_ + h * (a21 * k1_));
    k3_ = f_(x_ + c3 * h, y_ + h * (a31 * k1_ + a32 * k2_));
    k4_ = f_(x_ + c4 * h, y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_));
    k5_ = f_(x_ + c5 * h, y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_));
    k6_ = f_(x_ + h, y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_));
    ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    k7_ = f_(x_ + h, ynew_);
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  double error_norm() const {
    const auto sc = (opts_.atol + opts_.rtol * y_.cwiseAbs().cwiseMax(ynew_.cwiseAbs()).array());
    const double sum = (err_.cwiseAbs().array() / sc).square().sum();
    return std::sqrt(sum / static_cast<double>(y_.size()));
  }

  double norm_scaled(const Vec& v) const {
    const auto sc = (opts_.atol + opts_.rtol * y_.cwiseAbs().array());
    return std::sqrt((v.cwiseAbs().array() / sc).square().sum() / static_cast<double>(y_.size()));
  }

  double initial_step() {
    const double d0 = norm_scaled(y_);
    const double d1n = norm_scaled(k1_);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, opts_.h_max);
    const Vec y1 = y_ + dir_ * h0 * k1_;
    const Vec f1 = f_(x_ + dir_ * h0, y1);
    const double d2 = norm_scaled(f1 - k1_) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, opts_.h_max});
  }

  Rhs f_;
  OdeOptions opts_;
  double dir_;
  double x_, x_prev_;
  double h_ = 0.0, h_used_ = 1.0;
  long n_steps_ = 0;
  Vec y_, y_prev_, ynew_, err_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  Vec rc1_, rc2_, rc3_, rc4_, rc5_;
};

template <class Vec, class Rhs>
DormandPrince<Vec, Rhs> make_dopri(Rhs f, double x0, const Vec& y0, double direction, OdeOptions opts = {}) {
  return DormandPrince<Vec, Rhs>(std::move(f), x0, y0, direction, opts);
}

}  // namespace pulsestab
