#pragma once

#include <vector>

#include "pulsestab/model.hpp"
#include "pulsestab/profile.hpp"

namespace pulsestab {

/// Fields of the Lagrangian St. Venant system on a uniform grid x_j = x0 + j dx.
/// In a frame moving with speed c: tau_t = c tau_x + u_x, u_t = c u_x - p(tau)_x + g + nu (tau^{-2} u_x)_x.
struct EvolutionState {
  double t = 0.0;
  double dx = 0.0;
  double x0 = 0.0;
  std::vector<double> tau, u;
  double frame_speed = 0.0;

  std::size_t size() const { return tau.size(); }
  double x(std::size_t j) const { return x0 + dx * static_cast<double>(j); }
  /// dx * sum of tau over interior nodes
  double mass() const;
};

struct CnOptions {
  int max_iter = 10;
  double tol = 1e-10;
  double tau_min = 1e-6;
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  double mass_change = 0.0;
  double boundary_flux = 0.0;  // dt times the averaged discrete boundary flux
};

/// One Crank-Nicolson step; the end values of the state act as Dirichlet data.
EvolutionState cn_step(const EvolutionState& state, double dt, const ModelSpec& model, const CnOptions& opts = {},
                       StepReport* report = nullptr);

/// Nonlinear CN residual of (next) relative to (prev); max norm over interior equations.
double cn_residual(const EvolutionState& prev, const EvolutionState& next, double dt, const ModelSpec& model);

struct Perturbation {
  double amplitude = 0.01;  // relative to the pulse amplitude
  double center = 10.0;
  double width = 1.0;
};

struct ExperimentConfig {
  Perturbation perturbation;
  double T = 100.0;
  double dt = 0.05;
  double dx = 0.05;
  double x_min = -160.0;
  double x_max = 40.0;
  bool comoving = true;
  std::vector<double> snapshot_times;  // empty: every snapshot_every
  double snapshot_every = 2.0;
  CnOptions cn;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> tau, u;
};

struct MetastabilityDiagnostics {
  std::vector<double> times;
  std::vector<double> translate_distance;
  std::vector<double> shift;          // minimizing translate
  std::vector<double> wake_peak;      // max |tau - shifted profile| for x < -W
  std::vector<double> wake_location;  // where the wake peak sits
  double wake_halfwidth = 0.0;        // W: pulse half-width at 1% amplitude
  double amplitude = 0.0;             // pulse amplitude max |tau - tau0|
  double fitted_growth_rate = 0.0;
  std::size_t fit_begin = 0, fit_end = 0;  // snapshot index range [begin, end) used in the fit
  bool fit_valid = false;
};

struct ExperimentResult {
  std::vector<double> x;
  std::vector<Snapshot> snapshots;
  MetastabilityDiagnostics diagnostics;
  double contamination_time = -1.0;  // first snapshot where the wake reaches the boundary zone, -1 if never
  bool truncated = false;
  std::string note;
};

/// Pulse half-width where |tau - tau0| falls to 1% of the amplitude.
double pulse_halfwidth(const ProfileSolution& profile, double fraction = 0.01);

/// Min over shifts s of max_x |tau(x) - tau_bar(x - s)|, searched over |s| <= max_shift.
std::pair<double, double> translate_distance(const ProfileSolution& profile, const std::vector<double>& x,
                                             const std::vector<double>& tau, double max_shift = 5.0);

MetastabilityDiagnostics compute_diagnostics(const ProfileSolution& profile, const std::vector<double>& x,
                                             const std::vector<Snapshot>& snapshots);

ExperimentResult run_experiment(const ProfileSolution& profile, const ExperimentConfig& config);

}  // namespace pulsestab
