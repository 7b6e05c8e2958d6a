#include "pulsestab/profile.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/log.hpp"
#include "pulsestab/ode.hpp"

namespace pulsestab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kVacuum = 1e-6;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Roots of the linearization kappa mu^2 + lin mu + cst = 0 at a saddle, (unstable, stable).
std::array<double, 2> saddle_rates(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& eq) {
  const ConstantStateCoefficients k0 = constant_state_coefficients(model, eq);
  const double kappa = wave.c * k0.visc;
  const double lin = wave.c * wave.c - eq.cs * eq.cs;
  const double cst = k0.b0 * (eq.dfstar - wave.c);
  const double disc = std::sqrt(lin * lin - 4.0 * kappa * cst);
  // stable quadratic formula
  const double qq = -0.5 * (lin + (lin >= 0.0 ? disc : -disc));
  const double m1 = qq / kappa;
  const double m2 = cst / qq;
  return {std::max(m1, m2), std::min(m1, m2)};
}

double brent_root(const std::function<double(double)>& f, double a, double b, double fa, double fb) {
  boost::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (r.first + r.second);
}

struct BranchEnd {
  double length = 0.0;
  double tau = 0.0;
};

using Vec2 = Eigen::Vector2d;

// Integrates the profile ODE from y0 in direction dir. If length is NaN, stops at the first
// sign change of tau' and returns the distance; otherwise integrates exactly `length` and
// records states at the requested distances (ascending).
BranchEnd shoot_branch(const ModelSpec& model, const WaveParams& wave, const Vec2& y0, double dir,
                       const ProfileOptions& opts, double length, const std::vector<double>* sample_at,
                       std::vector<Vec2>* samples) {
  auto rhs = [&](double, const Vec2& y) -> Vec2 {
    if (!(y[0] > 0.0) || !std::isfinite(y[1])) return Vec2(kNaN, kNaN);
    try {
      const auto f = profile_vector_field(model, wave, {y[0], y[1]});
      return Vec2(f[0], f[1]);
    } catch (const DomainError&) {
      return Vec2(kNaN, kNaN);
    }
  };
  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  o.h_max = 0.05;
  auto ode = make_dopri<Vec2>(rhs, 0.0, y0, dir, o);
  const double s0 = sgn(y0[1]);
  const bool find_event = std::isnan(length);
  const double x_end = find_event ? dir * opts.x_max : dir * length;
  std::size_t next = 0;

  auto check_state = [&](const Vec2& y, double x) {
    if (y[0] <= kVacuum) {
      std::ostringstream os;
      os << "manifold integration reached vacuum (tau=" << y[0] << ") at distance " << std::abs(x);
      throw NumericalError(os.str());
    }
    if (y[0] > 1e6 || std::abs(y[1]) > 1e8 || !std::isfinite(y[0])) {
      std::ostringstream os;
      os << "manifold integration blew up (tau=" << y[0] << ", tau'=" << y[1] << ") at distance "
         << std::abs(x);
      throw NumericalError(os.str());
    }
  };

  for (;;) {
    if (dir * (x_end - ode.x()) <= 0.0) {
      if (find_event) {
        std::ostringstream os;
        os << "section tau'=0 not reached within distance " << opts.x_max;
        throw NumericalError(os.str());
      }
      break;
    }
    ode.step(x_end);
    check_state(ode.y(), ode.x());
    if (samples && sample_at) {
      while (next < sample_at->size() && (*sample_at)[next] <= dir * ode.x()) {
        const double xs = dir * (*sample_at)[next];
        samples->push_back(xs == ode.x() ? ode.y() : ode.dense(xs));
        ++next;
      }
    }
    if (find_event && ode.y()[1] * s0 <= 0.0) {
      auto g = [&](double x) { return ode.dense(x)[1] * s0; };
      const double a = ode.x_prev(), b = ode.x();
      const double ga = g(a), gb = ode.y()[1] * s0;
      double xe = b;
      if (gb != 0.0) xe = brent_root(g, std::min(a, b), std::max(a, b), dir > 0 ? ga : gb, dir > 0 ? gb : ga);
      return {std::abs(xe), ode.dense(xe)[0]};
    }
  }
  if (samples && sample_at) {
    while (next < sample_at->size()) {
      samples->push_back(ode.y());
      ++next;
    }
  }
  return {std::abs(ode.x()), ode.y()[0]};
}

std::vector<EquilibriumInfo> equilibria_impl(const ModelSpec& model, const WaveParams& wave, bool report);

struct SaddleChoice {
  EquilibriumInfo saddle;
  std::vector<int> directions;
};

SaddleChoice choose_saddle(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts) {
  const auto eqs = equilibria_impl(model, wave, false);
  std::vector<std::size_t> saddles;
  for (std::size_t i = 0; i < eqs.size(); ++i)
    if (eqs[i].classification == EquilibriumType::SaddlePoint) saddles.push_back(i);
  if (saddles.empty()) throw NumericalError("no saddle equilibrium for this (c,q)");

  std::size_t pick = saddles.front();
  if (opts.endstate_hint) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : saddles) {
      const double dist = std::abs(eqs[i].tau0 - *opts.endstate_hint);
      if (dist < best) best = dist, pick = i;
    }
  } else {
    for (std::size_t i : saddles) {
      const bool left = i > 0 && eqs[i - 1].classification != EquilibriumType::SaddlePoint;
      const bool right = i + 1 < eqs.size() && eqs[i + 1].classification != EquilibriumType::SaddlePoint;
      if (left || right) {
        pick = i;
        break;
      }
    }
  }

  SaddleChoice out;
  out.saddle = eqs[pick];
  // Toward the nearest enclosed (non-saddle) equilibrium first.
  double best = std::numeric_limits<double>::infinity();
  int dir = 0;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    if (eqs[i].classification == EquilibriumType::SaddlePoint) continue;
    const double dist = std::abs(eqs[i].tau0 - out.saddle.tau0);
    if (dist < best) best = dist, dir = eqs[i].tau0 < out.saddle.tau0 ? -1 : 1;
  }
  if (dir != 0) {
    out.directions = {dir};
  } else {
    out.directions = {-1, 1};
  }
  return out;
}

}  // namespace

ProfilePoint profile_point(const ModelSpec& model, const WaveParams& wave, double tau, double dtau) {
  ProfilePoint p;
  p.tau = tau;
  p.dtau = dtau;
  p.ddtau = profile_vector_field(model, wave, {tau, dtau})[1];
  p.u = wave.q - wave.c * tau;
  if (model.is_st_venant()) {
    const double t3 = 1.0 / (tau * tau * tau);
    const double inner = 1.0 / model.F + 2.0 * wave.c * model.nu * dtau;
    p.alpha = t3 * inner;
    p.dalpha = -3.0 * t3 / tau * dtau * inner + 2.0 * t3 * wave.c * model.nu * p.ddtau;
  } else {
    p.alpha = model.cs * model.cs;
    p.dalpha = 0.0;
  }
  return p;
}

std::array<double, 2> profile_vector_field(const ModelSpec& model, const WaveParams& wave,
                                           const std::array<double, 2>& state) {
  const double tau = state[0];
  const double dtau = state[1];
  if (!(tau > 0.0)) throw DomainError("profile state with tau <= 0 (vacuum)");
  const double c = wave.c;
  if (model.is_st_venant()) {
    if (c == 0.0) throw DomainError("St. Venant profile requires c != 0");
    const double g = source(model, tau, wave.q - c * tau);
    const double bracket = g - c * c * dtau + dtau / (model.F * tau * tau * tau);
    return {dtau, bracket * tau * tau / (c * model.nu) + 2.0 * dtau * dtau / tau};
  }
  if (c == 0.0) throw DomainError("Jin-Xin profile requires c != 0");
  const double rhs = std::pow(tau, -model.p) + c * tau - wave.q - (c * c - model.cs * model.cs) * dtau;
  return {dtau, rhs / c};
}

std::vector<EquilibriumInfo> find_equilibria(const ModelSpec& model, const WaveParams& wave) {
  return equilibria_impl(model, wave, true);
}

namespace {

std::vector<EquilibriumInfo> equilibria_impl(const ModelSpec& model, const WaveParams& wave, bool report) {
  model.validate();
  auto gstar = [&](double tau) -> double {
    try {
      return source(model, tau, wave.q - wave.c * tau);
    } catch (const DomainError&) {
      return kNaN;
    }
  };
  const int n = 6000;
  const double lo = std::log(1e-6), hi = std::log(1e4);
  std::vector<double> roots;
  double t_prev = std::exp(lo), g_prev = gstar(t_prev);
  for (int i = 1; i <= n; ++i) {
    const double t = std::exp(lo + (hi - lo) * i / n);
    const double g = gstar(t);
    if (std::isfinite(g) && std::isfinite(g_prev)) {
      if (g == 0.0) {
        roots.push_back(t);
      } else if (g_prev * g < 0.0) {
        roots.push_back(brent_root(gstar, t_prev, t, g_prev, g));
      }
    }
    t_prev = t;
    g_prev = g;
  }
  std::vector<EquilibriumInfo> out;
  for (double t : roots) {
    const double u = wave.q - wave.c * t;
    if (!(u > 0.0)) {
      std::ostringstream os;
      os << "equilibrium tau=" << t << " discarded: u=q-c*tau=" << u << " is not positive";
      if (report) warn(os.str());
      continue;
    }
    out.push_back(make_equilibrium(model, wave, t));
  }
  return out;
}

}  // namespace

SeparationResult separation(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts) {
  const SaddleChoice choice = choose_saddle(model, wave, opts);
  const EquilibriumInfo& eq = choice.saddle;
  const auto rates = saddle_rates(model, wave, eq);
  std::string last_error;
  for (int dir : choice.directions) {
    const double sig = dir;
    const Vec2 yu(eq.tau0 + sig * opts.eps, sig * opts.eps * rates[0]);
    const Vec2 ys(eq.tau0 + sig * opts.eps, sig * opts.eps * rates[1]);
    try {
      const BranchEnd um = shoot_branch(model, wave, yu, 1.0, opts, kNaN, nullptr, nullptr);
      const BranchEnd sp = shoot_branch(model, wave, ys, -1.0, opts, kNaN, nullptr, nullptr);
      SeparationResult res;
      res.saddle = eq;
      res.direction = dir;
      res.tau_minus = um.tau;
      res.tau_plus = sp.tau;
      res.length_minus = um.length;
      res.length_plus = sp.length;
      const double tau_xx = profile_vector_field(model, wave, {um.tau, 0.0})[1];
      res.section_point = {um.tau, 0.0};
      // det[[tau_x, dtau], [tau_xx, d(tau')]] with tau_x = 0 and equal tau' at the section
      res.value = -tau_xx * (sp.tau - um.tau);
      res.orientation = 1;
      return res;
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  throw NumericalError("separation: " + last_error);
}

double separation_speed_derivative(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts,
                                   SpeedDerivativeMode mode) {
  ProfileOptions o = opts;
  const EquilibriumInfo base = choose_saddle(model, wave, opts).saddle;
  if (!o.endstate_hint) o.endstate_hint = base.tau0;
  auto d_at = [&](double c) {
    const double q = mode == SpeedDerivativeMode::FixedEndstate ? base.u0 + c * base.tau0 : wave.q;
    return separation(model, WaveParams{c, q}, o).value;
  };
  const double base_h = 1e-4 * std::max(1.0, std::abs(wave.c));
  std::string detail;
  for (double scale : {1.0, 10.0, 0.1}) {
    const double h = base_h * scale;
    const double d1 = (d_at(wave.c + h) - d_at(wave.c - h)) / (2.0 * h);
    const double d2 = (d_at(wave.c + 0.5 * h) - d_at(wave.c - 0.5 * h)) / h;
    if (std::abs(d1 - d2) <= 0.01 * std::max(std::abs(d1), std::abs(d2))) return d2;
    std::ostringstream os;
    os << " h=" << h << ": " << d1 << " vs " << d2 << ";";
    detail += os.str();
  }
  throw NumericalError("speed derivative of the separation did not pass the Richardson check:" + detail);
}

double find_homoclinic_speed(const ModelSpec& model, const QRule& q_rule, double c_lo, double c_hi,
                             const ProfileOptions& opts) {
  if (!(c_lo < c_hi)) throw ValidationError("speed bracket must satisfy c_lo < c_hi");
  auto d_at = [&](double c) -> double {
    try {
      return separation(model, WaveParams{c, q_rule(c)}, opts).value;
    } catch (const NumericalError&) {
      return kNaN;
    }
  };
  // Scan the bracket; manifolds can blow up near its ends.
  const int n = 8;
  std::vector<double> cs(n + 1), ds(n + 1);
  for (int i = 0; i <= n; ++i) {
    cs[i] = c_lo + (c_hi - c_lo) * i / n;
    ds[i] = d_at(cs[i]);
  }
  int hit = -1;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(ds[i]) && std::isfinite(ds[i + 1]) && ds[i] * ds[i + 1] <= 0.0) {
      hit = i;
      break;
    }
  }
  // A branch that escapes before the section leaves no sign; bisect toward the edge of the
  // computable region, where the sign change hides when it is not visible on the scan.
  for (int i = 0; hit < 0 && i < n; ++i) {
    const bool fa = std::isfinite(ds[i]), fb = std::isfinite(ds[i + 1]);
    if (fa == fb) continue;
    double cv = fa ? cs[i] : cs[i + 1], dv = fa ? ds[i] : ds[i + 1];
    double cb = fa ? cs[i + 1] : cs[i];
    for (int it = 0; it < 60 && std::abs(cb - cv) > 1e-12 * std::abs(cv); ++it) {
      const double cm = 0.5 * (cv + cb);
      const double dm = d_at(cm);
      if (!std::isfinite(dm)) {
        cb = cm;
      } else if (dm * dv > 0.0) {
        cv = cm;
        dv = dm;
      } else {
        cs[i] = std::min(cv, cm);
        cs[i + 1] = std::max(cv, cm);
        ds[i] = cv < cm ? dv : dm;
        ds[i + 1] = cv < cm ? dm : dv;
        hit = i;
        break;
      }
    }
  }
  if (hit < 0) {
    std::ostringstream os;
    os << "separation does not change sign over [" << c_lo << ", " << c_hi << "]: d(c_lo)=" << ds.front()
       << ", d(c_hi)=" << ds.back();
    throw NumericalError(os.str());
  }
  if (!model.is_st_venant()) {
    // Hamiltonian at c = cs: the homoclinic speed is exactly cs.
    if (model.cs >= cs[hit] && model.cs <= cs[hit + 1]) return model.cs;
  }
  if (ds[hit] == 0.0) return cs[hit];
  if (ds[hit + 1] == 0.0) return cs[hit + 1];
  auto f = [&](double c) {
    const double v = d_at(c);
    if (!std::isfinite(v)) throw NumericalError("separation failed inside the speed bracket");
    return v;
  };
  const double c = brent_root(f, cs[hit], cs[hit + 1], ds[hit], ds[hit + 1]);
  const double dval = f(c);
  if (std::abs(dval) > opts.match_tol) {
    std::ostringstream os;
    os << "homoclinic speed search ended at c=" << c << " with |d|=" << std::abs(dval);
    throw NumericalError(os.str());
  }
  return c;
}

ProfileSolution solve_homoclinic(const ModelSpec& model, const WaveParams& wave, const ProfileOptions& opts) {
  const SeparationResult sep = separation(model, wave, opts);
  if (std::abs(sep.value) > opts.match_tol) {
    std::ostringstream os;
    os << "not homoclinic at this (c,q): d=" << sep.value;
    throw NumericalError(os.str());
  }
  const EquilibriumInfo& eq = sep.saddle;
  const auto rates = saddle_rates(model, wave, eq);
  const double sig = sep.direction;
  const double lu = sep.length_minus, ls = sep.length_plus;
  const double decay = std::log(opts.eps / opts.tail_tol);
  double L = std::max({lu + decay / rates[0], ls + decay / -rates[1], opts.L_min});
  const long nh = static_cast<long>(std::ceil(L / opts.dx - 1e-9));
  L = nh * opts.dx;

  std::vector<double> x(2 * nh + 1), tau(x.size()), dtau(x.size());
  for (long j = 0; j <= 2 * nh; ++j) x[j] = (j - nh) * opts.dx;

  // Unstable branch: distance from seed t = x + lu for x in [-lu, 0].
  std::vector<double> tu;
  std::vector<long> ju;
  for (long j = 0; j <= nh; ++j) {
    if (x[j] >= -lu) {
      tu.push_back(x[j] + lu);
      ju.push_back(j);
    }
  }
  std::vector<Vec2> su;
  shoot_branch(model, wave, Vec2(eq.tau0 + sig * opts.eps, sig * opts.eps * rates[0]), 1.0, opts, lu, &tu, &su);
  // Stable branch: distance t = ls - x for x in (0, ls], ascending in t means descending in x.
  std::vector<double> ts;
  std::vector<long> js;
  for (long j = 2 * nh; j > nh; --j) {
    if (x[j] <= ls) {
      ts.push_back(ls - x[j]);
      js.push_back(j);
    }
  }
  std::vector<Vec2> ss;
  shoot_branch(model, wave, Vec2(eq.tau0 + sig * opts.eps, sig * opts.eps * rates[1]), -1.0, opts, ls, &ts, &ss);

  for (long j = 0; j <= 2 * nh; ++j) {
    if (x[j] < -lu) {
      const double e = sig * opts.eps * std::exp(rates[0] * (x[j] + lu));
      tau[j] = eq.tau0 + e;
      dtau[j] = rates[0] * e;
    } else if (x[j] > ls) {
      const double e = sig * opts.eps * std::exp(rates[1] * (x[j] - ls));
      tau[j] = eq.tau0 + e;
      dtau[j] = rates[1] * e;
    }
  }
  for (std::size_t k = 0; k < ju.size(); ++k) {
    tau[ju[k]] = su[k][0];
    dtau[ju[k]] = su[k][1];
  }
  for (std::size_t k = 0; k < js.size(); ++k) {
    tau[js[k]] = ss[k][0];
    dtau[js[k]] = ss[k][1];
  }

  ProfileSolution prof = make_profile(model, wave, eq, std::move(x), std::move(tau), std::move(dtau));
  prof.separation = sep.value;
  prof.eps = opts.eps;
  prof.tail_tol = opts.tail_tol;
  return prof;
}

ProfileSolution make_profile(const ModelSpec& model, const WaveParams& wave, const EquilibriumInfo& endstate,
                             std::vector<double> x, std::vector<double> tau, std::vector<double> dtau) {
  if (x.size() < 3 || tau.size() != x.size() || dtau.size() != x.size())
    throw ValidationError("profile arrays must have equal length >= 3");
  ProfileSolution p;
  p.model = model;
  p.wave = wave;
  p.endstate = endstate;
  p.dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  p.L = 0.5 * (x.back() - x.front());
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw ValidationError("profile grid must be strictly increasing");
    if (std::abs(x[i] - x[i - 1] - p.dx) > 1e-8 * p.dx) throw ValidationError("profile grid must be uniform");
  }
  const std::size_t n = x.size();
  p.ddtau.resize(n);
  p.u.resize(n);
  p.alpha.resize(n);
  p.dalpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(tau[i] > 0.0)) throw NumericalError("profile reaches vacuum (tau <= 0)");
    const ProfilePoint pt = profile_point(model, wave, tau[i], dtau[i]);
    if (!(pt.u > 0.0)) throw NumericalError("profile has nonpositive velocity u = q - c tau");
    p.ddtau[i] = pt.ddtau;
    p.u[i] = pt.u;
    p.alpha[i] = pt.alpha;
    p.dalpha[i] = pt.dalpha;
  }
  p.truncation_error = std::max(std::abs(tau.front() - endstate.tau0), std::abs(tau.back() - endstate.tau0));
  p.grid = std::move(x);
  p.tau = std::move(tau);
  p.dtau = std::move(dtau);
  return p;
}

ProfilePoint ProfileSolution::node(std::size_t i) const {
  return ProfilePoint{tau[i], dtau[i], ddtau[i], u[i], alpha[i], dalpha[i]};
}

ProfilePoint ProfileSolution::at(double x) const {
  if (x <= grid.front() || x >= grid.back()) {
    const std::size_t i = x <= grid.front() ? 0 : grid.size() - 1;
    if (x == grid[i]) return node(i);
    return profile_point(model, wave, endstate.tau0, 0.0);
  }
  const double s = (x - grid.front()) / dx;
  std::size_t i = static_cast<std::size_t>(s);
  if (i >= grid.size() - 1) i = grid.size() - 2;
  const double t = s - static_cast<double>(i);
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h = dx;
  const double y0 = tau[i], y1 = tau[i + 1];
  const double d0 = dtau[i] * h, d1 = dtau[i + 1] * h;
  const double s0 = ddtau[i] * h * h, s1 = ddtau[i + 1] * h * h;
  const double val = y0 * (1 - 10 * t3 + 15 * t4 - 6 * t5) + d0 * (t - 6 * t3 + 8 * t4 - 3 * t5) +
                     s0 * 0.5 * (t2 - 3 * t3 + 3 * t4 - t5) + y1 * (10 * t3 - 15 * t4 + 6 * t5) +
                     d1 * (-4 * t3 + 7 * t4 - 3 * t5) + s1 * 0.5 * (t3 - 2 * t4 + t5);
  const double der = y0 * (-30 * t2 + 60 * t3 - 30 * t4) + d0 * (1 - 18 * t2 + 32 * t3 - 15 * t4) +
                     s0 * 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4) + y1 * (30 * t2 - 60 * t3 + 30 * t4) +
                     d1 * (-12 * t2 + 28 * t3 - 15 * t4) + s1 * 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
  return profile_point(model, wave, val, der / h);
}

double ProfileSolution::amplitude() const {
  double a = 0.0;
  for (double t : tau) a = std::max(a, std::abs(t - endstate.tau0));
  return a;
}

double jinxin_potential(const ModelSpec& model, const WaveParams& wave, double tau) {
  if (model.is_st_venant()) throw DomainError("the Hamiltonian structure exists only for the Jin-Xin model");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  const double F = model.p == 1.0 ? -std::log(tau) : -std::pow(tau, 1.0 - model.p) / (1.0 - model.p);
  return F - 0.5 * wave.c * tau * tau + wave.q * tau;
}

HamiltonianState hamiltonian(const ModelSpec& model, const WaveParams& wave, const std::array<double, 2>& state) {
  HamiltonianState h;
  h.V = jinxin_potential(model, wave, state[0]);
  h.H = 0.5 * wave.c * state[1] * state[1] + h.V;
  return h;
}

ProfileSolution jinxin_quadrature(const ModelSpec& model, double q, double H, std::size_t n,
                                  const ProfileOptions& opts) {
  if (model.is_st_venant()) throw DomainError("jinxin_quadrature requires the Jin-Xin model");
  const WaveParams wave{model.cs, q};
  const double c = wave.c;
  auto V = [&](double t) { return jinxin_potential(model, wave, t); };
  auto dV = [&](double t) { return -std::pow(t, -model.p) - c * t + q; };
  auto d2V = [&](double t) { return model.p * std::pow(t, -model.p - 1.0) - c; };

  const auto eqs = equilibria_impl(model, wave, false);
  const EquilibriumInfo* saddle = nullptr;
  for (const auto& e : eqs) {
    if (d2V(e.tau0) < 0.0 && std::abs(V(e.tau0) - H) <= 1e-8 * std::max(1.0, std::abs(H))) saddle = &e;
  }
  if (!saddle) throw DomainError("H does not match the potential at a saddle (V'' < 0) equilibrium");
  const double ts = saddle->tau0;
  // Enclosed center: nearest equilibrium with V'' > 0.
  double tc = kNaN, best = std::numeric_limits<double>::infinity();
  for (const auto& e : eqs) {
    if (d2V(e.tau0) > 0.0 && std::abs(e.tau0 - ts) < best) best = std::abs(e.tau0 - ts), tc = e.tau0;
  }
  if (std::isnan(tc)) throw NumericalError("no turning point: no enclosed center equilibrium");
  const double side = tc < ts ? -1.0 : 1.0;
  // Turning point beyond the center where V returns to H.
  auto G = [&](double t) { return 2.0 / c * (H - V(t)); };
  double a = tc, b = tc;
  double found = kNaN;
  for (int k = 0; k < 400; ++k) {
    b = side < 0 ? a * 0.9 : a * 1.1 + 1e-3;
    if (b <= 0.0) break;
    if (G(a) * G(b) <= 0.0) {
      found = brent_root(G, std::min(a, b), std::max(a, b), side < 0 ? G(b) : G(a), side < 0 ? G(a) : G(b));
      break;
    }
    a = b;
  }
  if (std::isnan(found)) throw DomainError("no turning point where V(tau) = H");
  const double tt = found;
  const double sigma = ts > tt ? 1.0 : -1.0;  // tau = tt + sigma w^2 moves toward the saddle
  const double G1 = -2.0 / c * dV(tt);
  const double G2 = -2.0 / c * d2V(tt);
  const double w_sad = std::sqrt(std::abs(ts - tt));

  // w' = sqrt(G(tt + sigma w^2)) / (2 w), regular at w = 0.
  auto hfun = [&](double w) -> double {
    if (w < 1e-4) return 0.5 * std::sqrt(std::max(0.0, sigma * G1 + 0.5 * G2 * w * w));
    return 0.5 * std::sqrt(std::max(0.0, G(tt + sigma * w * w))) / w;
  };
  using Vec1 = Eigen::Matrix<double, 1, 1>;
  auto rhs = [&](double, const Vec1& y) {
    Vec1 r;
    r[0] = hfun(std::min(std::max(y[0], 0.0), w_sad));
    return r;
  };
  const double switch_gap = 1e-5;
  const double mu = std::sqrt(-d2V(ts) / c);
  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  o.h_max = 0.05;
  // Pass 1: distance to the switch point.
  double x_sw = 0.0;
  {
    auto ode = make_dopri<Vec1>(rhs, 0.0, Vec1::Zero(), 1.0, o);
    auto gap = [&](const Vec1& y) { return std::abs(ts - (tt + sigma * y[0] * y[0])); };
    for (;;) {
      ode.step(opts.x_max);
      if (gap(ode.y()) <= switch_gap) {
        auto g = [&](double xx) { return gap(ode.dense(xx)) - switch_gap; };
        x_sw = brent_root(g, ode.x_prev(), ode.x(), g(ode.x_prev()), g(ode.x()));
        break;
      }
      if (ode.x() >= opts.x_max) throw NumericalError("quadrature did not approach the saddle");
    }
  }
  double L = std::max(x_sw + std::log(switch_gap / opts.tail_tol) / mu, opts.L_min);
  long nh;
  double dx;
  if (n >= 3) {
    nh = static_cast<long>((n - 1) / 2);
    dx = L / nh;
  } else {
    nh = static_cast<long>(std::ceil(L / opts.dx - 1e-9));
    dx = opts.dx;
    L = nh * dx;
  }
  std::vector<double> x(2 * nh + 1), tau(x.size()), dtau(x.size());
  for (long j = 0; j <= 2 * nh; ++j) x[j] = (j - nh) * dx;
  {
    auto ode = make_dopri<Vec1>(rhs, 0.0, Vec1::Zero(), 1.0, o);
    for (long j = nh; j <= 2 * nh; ++j) {
      const double xj = x[j];
      double w;
      if (xj <= x_sw) {
        while (ode.x() < xj) ode.step(x_sw);
        w = (xj == ode.x()) ? ode.y()[0] : ode.dense(xj)[0];
        const double t = tt + sigma * w * w;
        tau[j] = t;
        dtau[j] = sigma * std::sqrt(std::max(0.0, G(t)));
        if (xj == 0.0) dtau[j] = 0.0;
      } else {
        const double e = sigma * switch_gap * std::exp(-mu * (xj - x_sw));
        tau[j] = ts - e;
        dtau[j] = mu * e;
      }
    }
  }
  for (long j = 0; j < nh; ++j) {
    tau[j] = tau[2 * nh - j];
    dtau[j] = -dtau[2 * nh - j];
  }
  ProfileSolution prof = make_profile(model, wave, *saddle, std::move(x), std::move(tau), std::move(dtau));
  prof.tail_tol = opts.tail_tol;
  prof.eps = switch_gap;
  return prof;
}

OrbitSegment integrate_orbit(const ModelSpec& model, const WaveParams& wave, const std::array<double, 2>& state0,
                             double length, std::size_t n) {
  if (n < 2 || !(length > 0.0)) throw ValidationError("orbit segment needs n >= 2 and positive length");
  auto rhs = [&](double, const Vec2& y) {
    const auto f = profile_vector_field(model, wave, {y[0], y[1]});
    return Vec2(f[0], f[1]);
  };
  OdeOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  auto ode = make_dopri<Vec2>(rhs, 0.0, Vec2(state0[0], state0[1]), 1.0, o);
  OrbitSegment seg;
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = length * static_cast<double>(k) / static_cast<double>(n - 1);
    while (ode.x() < xk) ode.step(length);
    const Vec2 y = (xk == ode.x()) ? ode.y() : ode.dense(xk);
    seg.x.push_back(xk);
    seg.tau.push_back(y[0]);
    seg.dtau.push_back(y[1]);
  }
  return seg;
}

double hamiltonian_decay_check(const ModelSpec& model, const WaveParams& wave, const OrbitSegment& seg) {
  const std::size_t n = seg.x.size();
  if (n < 5) throw ValidationError("orbit segment needs at least 5 samples");
  const double h = seg.x[1] - seg.x[0];
  std::vector<double> H(n);
  for (std::size_t i = 0; i < n; ++i) H[i] = hamiltonian(model, wave, {seg.tau[i], seg.dtau[i]}).H;
  const double k = wave.c * wave.c - model.cs * model.cs;
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double dH = (H[i - 2] - 8.0 * H[i - 1] + 8.0 * H[i + 1] - H[i + 2]) / (12.0 * h);
    worst = std::max(worst, std::abs(dH + k * seg.dtau[i] * seg.dtau[i]));
  }
  return worst;
}

}  // namespace pulsestab
