#include "pulsestab/evolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/log.hpp"

namespace pulsestab {

double EvolutionState::mass() const {
  double m = 0.0;
  for (std::size_t j = 1; j + 1 < tau.size(); ++j) m += tau[j];
  return m * dx;
}

namespace {

double pressure(const ModelSpec& m, double tau) { return 1.0 / (2.0 * m.F * tau * tau); }
double pressure_dtau(const ModelSpec& m, double tau) { return -1.0 / (m.F * tau * tau * tau); }

// Spatial operator at interior node j.
void rhs_at(const EvolutionState& s, const ModelSpec& m, std::size_t j, double& ft, double& fu) {
  const double c = s.frame_speed;
  const double h = s.dx;
  const auto& t = s.tau;
  const auto& u = s.u;
  const double kp = 0.5 * (1.0 / (t[j] * t[j]) + 1.0 / (t[j + 1] * t[j + 1]));
  const double km = 0.5 * (1.0 / (t[j] * t[j]) + 1.0 / (t[j - 1] * t[j - 1]));
  ft = (c * (t[j + 1] - t[j - 1]) + (u[j + 1] - u[j - 1])) / (2.0 * h);
  fu = (c * (u[j + 1] - u[j - 1]) - (pressure(m, t[j + 1]) - pressure(m, t[j - 1]))) / (2.0 * h) +
       source(m, t[j], u[j]) + m.nu * (kp * (u[j + 1] - u[j]) - km * (u[j] - u[j - 1])) / (h * h);
}

double boundary_flux(const EvolutionState& s) {
  const std::size_t n = s.size();
  auto w = [&](std::size_t j) { return s.frame_speed * s.tau[j] + s.u[j]; };
  return 0.5 * (w(n - 1) + w(n - 2) - w(1) - w(0));
}

void check_state(const EvolutionState& s, double tau_min) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(s.tau[j] > tau_min) || !std::isfinite(s.u[j])) {
      std::ostringstream os;
      os << "vacuum or non-finite state at x=" << s.x(j) << " (tau=" << s.tau[j] << ")";
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

double cn_residual(const EvolutionState& prev, const EvolutionState& next, double dt, const ModelSpec& model) {
  double r = 0.0;
  for (std::size_t j = 1; j + 1 < prev.size(); ++j) {
    double ft0, fu0, ft1, fu1;
    rhs_at(prev, model, j, ft0, fu0);
    rhs_at(next, model, j, ft1, fu1);
    r = std::max(r, std::abs(next.tau[j] - prev.tau[j] - 0.5 * dt * (ft0 + ft1)));
    r = std::max(r, std::abs(next.u[j] - prev.u[j] - 0.5 * dt * (fu0 + fu1)));
  }
  return r;
}

EvolutionState cn_step(const EvolutionState& state, double dt, const ModelSpec& model, const CnOptions& opts,
                       StepReport* report) {
  if (!model.is_st_venant()) throw ValidationError("time evolution is implemented for St. Venant");
  if (!(dt > 0.0) || !(state.dx > 0.0)) throw ValidationError("cn_step needs dt, dx > 0");
  const std::size_t n = state.size();
  if (n < 3 || state.u.size() != n) throw ValidationError("state arrays must have equal length >= 3");
  check_state(state, opts.tau_min);

  const double h = state.dx;
  const double c = state.frame_speed;
  const double nu = model.nu;
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * n);

  // explicit half of the scheme
  std::vector<double> ft0(n, 0.0), fu0(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) rhs_at(state, model, j, ft0[j], fu0[j]);

  EvolutionState next = state;
  next.t = state.t + dt;
  const double a = 0.5 * dt;
  auto residual_vec = [&](Eigen::VectorXd& r) {
    double m = 0.0;
    r.setZero();
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double ft, fu;
      rhs_at(next, model, j, ft, fu);
      r(2 * j) = next.tau[j] - state.tau[j] - a * (ft0[j] + ft);
      r(2 * j + 1) = next.u[j] - state.u[j] - a * (fu0[j] + fu);
      m = std::max({m, std::abs(r(2 * j)), std::abs(r(2 * j + 1))});
    }
    return m;
  };
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  Eigen::VectorXd r(dim);
  double res = residual_vec(r);
  int it = 0;
  std::vector<Eigen::Triplet<double>> trip;
  while (res > opts.tol) {
    if (it == opts.max_iter) {
      std::ostringstream os;
      os << "CN fixed-point iteration did not converge at t=" << next.t << " (residual " << res << ")";
      throw NumericalError(os.str());
    }
    ++it;
    // Newton correction about the current iterate
    trip.clear();
    trip.reserve(16 * n);
    const auto& t = next.tau;
    const auto& u = next.u;
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Index jt = static_cast<Eigen::Index>(2 * j), ju = jt + 1;
      if (j == 0 || j + 1 == n) {
        trip.emplace_back(jt, jt, 1.0);
        trip.emplace_back(ju, ju, 1.0);
        continue;
      }
      const Eigen::Index tm = jt - 2, tp = jt + 2, um = ju - 2, up = ju + 2;
      trip.emplace_back(jt, jt, 1.0);
      trip.emplace_back(jt, tp, -a * c / (2.0 * h));
      trip.emplace_back(jt, tm, a * c / (2.0 * h));
      trip.emplace_back(jt, up, -a / (2.0 * h));
      trip.emplace_back(jt, um, a / (2.0 * h));
      const double kp = 0.5 * (1.0 / (t[j] * t[j]) + 1.0 / (t[j + 1] * t[j + 1]));
      const double km = 0.5 * (1.0 / (t[j] * t[j]) + 1.0 / (t[j - 1] * t[j - 1]));
      const double dup = u[j + 1] - u[j], dum = u[j] - u[j - 1];
      const double v = nu / (h * h);
      const double gt = source_dtau(model, t[j], u[j]);
      const double gu = source_du(model, t[j], u[j]);
      trip.emplace_back(ju, ju, 1.0 - a * (gu - v * (kp + km)));
      trip.emplace_back(ju, up, -a * (c / (2.0 * h) + v * kp));
      trip.emplace_back(ju, um, -a * (-c / (2.0 * h) + v * km));
      const double it3 = std::pow(t[j], -3.0);
      trip.emplace_back(ju, tp, -a * (-pressure_dtau(model, t[j + 1]) / (2.0 * h) - v * std::pow(t[j + 1], -3.0) * dup));
      trip.emplace_back(ju, tm, -a * (pressure_dtau(model, t[j - 1]) / (2.0 * h) + v * std::pow(t[j - 1], -3.0) * dum));
      trip.emplace_back(ju, jt, -a * (gt - v * it3 * (dup - dum)));
    }
    Eigen::SparseMatrix<double> A(dim, dim);
    A.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NumericalError("CN linear solve failed");
    const Eigen::VectorXd dz = lu.solve(r);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      next.tau[j] -= dz(static_cast<Eigen::Index>(2 * j));
      next.u[j] -= dz(static_cast<Eigen::Index>(2 * j + 1));
    }
    check_state(next, opts.tau_min);
    res = residual_vec(r);
  }
  if (report) {
    report->iterations = it;
    report->residual = res;
    report->mass_change = next.mass() - state.mass();
    report->boundary_flux = 0.5 * dt * (boundary_flux(state) + boundary_flux(next));
  }
  return next;
}

double pulse_halfwidth(const ProfileSolution& profile, double fraction) {
  const double amp = profile.amplitude();
  const double tau0 = profile.endstate.tau0;
  double w = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (std::abs(profile.tau[i] - tau0) >= fraction * amp) w = std::max(w, std::abs(profile.grid[i]));
  return w;
}

std::pair<double, double> translate_distance(const ProfileSolution& profile, const std::vector<double>& x,
                                             const std::vector<double>& tau, double max_shift) {
  auto dist = [&](double s) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(tau[j] - profile.at(x[j] - s).tau));
    return d;
  };
  const double h = std::max(profile.dx, 1e-3);
  const int nc = static_cast<int>(std::ceil(max_shift / h));
  double best_s = 0.0, best = dist(0.0);
  for (int k = -nc; k <= nc; ++k) {
    const double s = k * h;
    const double d = dist(s);
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  // golden-section refinement around the best coarse shift
  double lo = best_s - h, hi = best_s + h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = dist(a), fb = dist(b);
  for (int i = 0; i < 40; ++i) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = dist(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = dist(b);
    }
  }
  const double s = 0.5 * (lo + hi);
  const double d = dist(s);
  if (d < best) return {d, s};
  return {best, best_s};
}

MetastabilityDiagnostics compute_diagnostics(const ProfileSolution& profile, const std::vector<double>& x,
                                             const std::vector<Snapshot>& snapshots) {
  MetastabilityDiagnostics d;
  d.amplitude = profile.amplitude();
  d.wake_halfwidth = pulse_halfwidth(profile);
  const double W = d.wake_halfwidth;
  std::vector<double> xc, tc;
  for (const Snapshot& s : snapshots) {
    xc.clear();
    tc.clear();
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] >= -W) {
        xc.push_back(x[j]);
        tc.push_back(s.tau[j]);
      }
    }
    const auto [dist, shift] = translate_distance(profile, xc, tc);
    // wake: deviation from the fitted translate behind the pulse
    double peak = 0.0, where = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] >= -W) continue;
      const double v = std::abs(s.tau[j] - profile.at(x[j] - shift).tau);
      if (v > peak) {
        peak = v;
        where = x[j];
      }
    }
    d.times.push_back(s.t);
    d.translate_distance.push_back(dist);
    d.shift.push_back(shift);
    d.wake_peak.push_back(peak);
    d.wake_location.push_back(where);
  }
  // fit over the longest trailing run of snapshots with the wake separated from the pulse
  std::size_t end = d.times.size(), begin = end;
  while (begin > 0 && d.wake_location[begin - 1] < -2.0 * W && d.wake_peak[begin - 1] > 0.0) --begin;
  d.fit_begin = begin;
  d.fit_end = end;
  if (end - begin >= 3) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const double y = std::log(d.wake_peak[i]);
      st += d.times[i];
      sy += y;
      stt += d.times[i] * d.times[i];
      sty += d.times[i] * y;
    }
    const double den = m * stt - st * st;
    if (den > 0.0) {
      d.fitted_growth_rate = (m * sty - st * sy) / den;
      d.fit_valid = true;
    }
  }
  return d;
}

ExperimentResult run_experiment(const ProfileSolution& profile, const ExperimentConfig& cfg) {
  if (!profile.model.is_st_venant()) throw ValidationError("time evolution is implemented for St. Venant");
  if (!(cfg.dt > 0.0) || !(cfg.dx > 0.0) || !(cfg.T > 0.0)) throw ValidationError("dt, dx and T must be positive");
  if (!(cfg.x_max > cfg.x_min)) throw ValidationError("x_max must exceed x_min");
  const double amp = profile.amplitude();
  if (std::abs(cfg.perturbation.amplitude) > 0.1) throw ValidationError("perturbation amplitude must be <= 10%");
  if (!(cfg.perturbation.width > 0.0)) throw ValidationError("perturbation width must be positive");

  ExperimentResult out;
  const std::size_t n = static_cast<std::size_t>(std::llround((cfg.x_max - cfg.x_min) / cfg.dx)) + 1;
  EvolutionState s;
  s.dx = cfg.dx;
  s.x0 = cfg.x_min;
  s.frame_speed = cfg.comoving ? profile.wave.c : 0.0;
  s.tau.resize(n);
  s.u.resize(n);
  out.x.resize(n);
  const Perturbation& p = cfg.perturbation;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.x(j);
    out.x[j] = x;
    const ProfilePoint pt = profile.at(x);
    const double z = (x - p.center) / p.width;
    s.tau[j] = pt.tau + p.amplitude * amp * std::exp(-z * z);
    s.u[j] = pt.u;
  }
  s.tau.front() = s.tau.back() = profile.endstate.tau0;
  s.u.front() = s.u.back() = profile.endstate.u0;

  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) {
    if (!(cfg.snapshot_every > 0.0)) throw ValidationError("snapshot_every must be positive");
    for (double t = 0.0; t <= cfg.T + 1e-12; t += cfg.snapshot_every) times.push_back(t);
  }
  std::sort(times.begin(), times.end());

  const std::size_t zone = std::max<std::size_t>(2, n / 20);
  const double tau0 = profile.endstate.tau0;
  auto contaminated = [&](const EvolutionState& st) {
    for (std::size_t j = 0; j < n; ++j)
      if ((j < zone || j + zone >= n) && std::abs(st.tau[j] - tau0) > 1e-6) return true;
    return false;
  };

  std::size_t next_snap = 0;
  auto take = [&](const EvolutionState& st) {
    out.snapshots.push_back({st.t, st.tau, st.u});
    if (out.contamination_time < 0.0 && contaminated(st)) out.contamination_time = st.t;
  };
  while (next_snap < times.size() && times[next_snap] <= 0.0) {
    take(s);
    ++next_snap;
  }
  try {
    while (next_snap < times.size()) {
      const double target = times[next_snap];
      while (s.t < target - 1e-12) {
        const double dt = std::min(cfg.dt, target - s.t);
        s = cn_step(s, dt, profile.model, cfg.cn);
        for (std::size_t j = 0; j < n; ++j)
          if (s.tau[j] > 1e3 || std::abs(s.u[j]) > 1e3) throw NumericalError("blow-up: |state| exceeded 1e3");
      }
      s.t = target;
      take(s);
      ++next_snap;
    }
  } catch (const NumericalError& e) {
    out.truncated = true;
    out.note = e.what();
    std::ostringstream os;
    os << "evolution truncated at t=" << s.t << ": " << e.what();
    warn(os.str());
  }
  // diagnostics over snapshots before boundary contamination
  std::vector<Snapshot> valid;
  for (const Snapshot& sn : out.snapshots)
    if (out.contamination_time < 0.0 || sn.t < out.contamination_time) valid.push_back(sn);
  out.diagnostics = compute_diagnostics(profile, out.x, valid);
  return out;
}

}  // namespace pulsestab
