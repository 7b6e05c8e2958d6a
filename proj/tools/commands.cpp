#include "commands.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "pulsestab/error.hpp"

namespace pulsestab::cli {

namespace fs = std::filesystem;

namespace {

// Rejects keys outside the allowed set for a config section.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (j.is_null()) return;
  if (!j.is_object()) throw ValidationError("'" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "' in '" + where + "'");
}

json section(const json& config, const std::string& name) {
  return config.contains(name) ? config.at(name) : json::object();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("bad value for '") + key + "'");
  }
}

void model_from(const json& config, ModelSpec& model, WaveParams& wave) {
  if (!config.contains("model")) throw ValidationError("config needs a 'model' object");
  model_wave_from_json(config.at("model"), model, wave);
  model.validate();
}

ProfileOptions profile_options(const json& j) {
  ProfileOptions o;
  o.eps = get_or(j, "eps", o.eps);
  o.tail_tol = get_or(j, "tail_tol", o.tail_tol);
  o.L_min = get_or(j, "L_min", o.L_min);
  o.dx = get_or(j, "dx", o.dx);
  o.match_tol = get_or(j, "match_tol", o.match_tol);
  o.x_max = get_or(j, "x_max", o.x_max);
  if (j.contains("endstate_hint")) o.endstate_hint = get_or(j, "endstate_hint", 0.0);
  return o;
}

// Either loads "profile.file" or builds the profile from the model section.
ProfileSolution obtain_profile(const json& config, json* info = nullptr) {
  const json p = section(config, "profile");
  check_keys(p,
             {"file", "method", "eps", "tail_tol", "L_min", "dx", "match_tol", "x_max", "endstate_hint", "H", "n",
              "speed_search"},
             "profile");
  if (p.contains("file")) {
    ProfileSolution s = load_profile(get_or<std::string>(p, "file", ""));
    if (info) (*info)["source"] = "file";
    return s;
  }
  ModelSpec model;
  WaveParams wave;
  model_from(config, model, wave);
  const ProfileOptions opts = profile_options(p);
  const std::string method = get_or<std::string>(p, "method", "shooting");
  if (method == "quadrature") {
    if (model.is_st_venant()) throw ValidationError("quadrature profiles exist for jin_xin only");
    return jinxin_quadrature(model, wave.q, get_or(p, "H", 0.0), get_or<std::size_t>(p, "n", 0), opts);
  }
  if (method != "shooting") throw ValidationError("profile.method must be 'shooting' or 'quadrature'");
  if (p.contains("speed_search")) {
    const json& ss = p.at("speed_search");
    check_keys(ss, {"c_lo", "c_hi", "tau0"}, "speed_search");
    const double tau0 = get_or(ss, "tau0", 1.0);
    const double u0 = equilibrium_velocity(model, tau0);
    auto rule = [=](double c) { return u0 + c * tau0; };
    wave.c = find_homoclinic_speed(model, rule, get_or(ss, "c_lo", 0.0), get_or(ss, "c_hi", 0.0), opts);
    wave.q = rule(wave.c);
    if (info) (*info)["speed"] = wave.c;
  }
  return solve_homoclinic(model, wave, opts);
}

std::shared_ptr<const ProfileSolution> shared_profile(const json& config) {
  return std::make_shared<const ProfileSolution>(obtain_profile(config));
}

EvansOptions evans_options(const json& j) {
  EvansOptions o;
  o.rtol = get_or(j, "rtol", o.rtol);
  o.atol = get_or(j, "atol", o.atol);
  return o;
}

json equilibrium_json(const EquilibriumInfo& e) {
  return json{{"tau0", e.tau0}, {"u0", e.u0}, {"cs", e.cs}, {"dfstar", e.dfstar},
              {"classification", to_string(e.classification)}};
}

CommandResult cmd_equilibria(const json& config, const fs::path& dir) {
  ModelSpec model;
  WaveParams wave;
  model_from(config, model, wave);
  json rows = json::array();
  for (const EquilibriumInfo& e : find_equilibria(model, wave)) rows.push_back(equilibrium_json(e));
  write_json(dir / "equilibria.json", rows);
  return {json{{"count", rows.size()}}, {"equilibria.json"}};
}

CommandResult cmd_profile(const json& config, const fs::path& dir) {
  json info;
  const ProfileSolution p = obtain_profile(config, &info);
  save_profile(p, dir / "profile.json");
  json s{{"c", p.wave.c},           {"q", p.wave.q},
         {"L", p.L},                {"amplitude", p.amplitude()},
         {"truncation_error", p.truncation_error}, {"separation", p.separation},
         {"endstate", equilibrium_json(p.endstate)}};
  return {s, {"profile.json"}};
}

CommandResult cmd_evans_real(const json& config, const fs::path& dir) {
  const json o = section(config, "evans_real");
  check_keys(o, {"a", "b", "n", "spacing", "rtol", "atol"}, "evans_real");
  EvansSystem sys(shared_profile(config));
  const std::string sp = get_or<std::string>(o, "spacing", "linear");
  if (sp != "linear" && sp != "log") throw ValidationError("spacing must be 'linear' or 'log'");
  const RealAxisScan scan = real_axis_scan(sys, get_or(o, "a", 0.0), get_or(o, "b", 1.0), get_or(o, "n", 41),
                                           sp == "log" ? GridSpacing::Log : GridSpacing::Linear, evans_options(o));
  write_evans_csv(dir / "evans_real.csv", scan.samples);
  json roots = json::array();
  for (const RealRoot& r : scan.roots) roots.push_back({{"lo", r.lo}, {"hi", r.hi}, {"root", r.root}});
  return {json{{"roots", roots}}, {"evans_real.csv"}};
}

SpectralContour contour_from(const json& c) {
  check_keys(c, {"shape", "R", "r_in", "n0", "center_re", "center_im", "radius", "n", "a_re", "a_im", "b_re", "b_im"},
             "contour");
  const std::string shape = get_or<std::string>(c, "shape", "semicircle");
  if (shape == "semicircle")
    return build_semicircle(get_or(c, "R", 1.0), get_or(c, "r_in", 0.0), get_or(c, "n0", 64));
  if (shape == "circle")
    return build_circle({get_or(c, "center_re", 0.0), get_or(c, "center_im", 0.0)}, get_or(c, "radius", 1.0),
                        get_or(c, "n", 64));
  throw ValidationError("contour.shape must be 'semicircle' or 'circle'");
}

CommandResult cmd_winding(const json& config, const fs::path& dir) {
  const json o = section(config, "winding");
  check_keys(o, {"contour", "max_rel_change", "max_points", "rtol", "atol"}, "winding");
  EvansSystem sys(shared_profile(config));
  WindingOptions w;
  w.max_rel_change = get_or(o, "max_rel_change", w.max_rel_change);
  w.max_points = get_or(o, "max_points", w.max_points);
  w.evans = evans_options(o);
  const WindingResult r = adaptive_winding(sys, contour_from(section(o, "contour")), w);
  write_evans_csv(dir / "contour.csv", r.samples);
  json s{{"winding", r.winding}, {"max_rel_step", r.max_rel_step}, {"n_points", r.n_points}};
  write_json(dir / "winding.json", s);
  return {s, {"contour.csv", "winding.json"}};
}

CommandResult cmd_index(const json& config, const fs::path& dir) {
  const json o = section(config, "index");
  check_keys(o, {"lambda_large", "rtol", "atol"}, "index");
  const auto prof = shared_profile(config);
  EvansSystem sys(prof);
  const StabilityIndexReport rep = stability_index(sys, get_or(o, "lambda_large", 100.0), evans_options(o));
  auto sign_word = [](double v) { return v > 0 ? "positive" : (v < 0 ? "negative" : "zero"); };
  json s{{"dprime_sign", rep.dprime_sign},
         {"D'(0)", sign_word(rep.dprime_sign)},
         {"lambda_large", rep.lambda_large},
         {"sign_D_large", rep.sign_D_large},
         {"parity", rep.parity == StabilityIndex::OddUnstableCount ? "Odd" : "Even"}};
  // the speed derivative of the separation carries the opposite sign
  ProfileOptions po;
  po.dx = prof->dx;
  try {
    const double dcd = separation_speed_derivative(prof->model, prof->wave, po);
    s["dc_d"] = sign_word(dcd);
    s["dc_d_value"] = dcd;
    s["consistent"] = (dcd > 0) == (rep.dprime_sign < 0);
  } catch (const Error& e) {
    s["dc_d"] = "unavailable";
    s["dc_d_note"] = e.what();
  }
  write_json(dir / "index.json", s);
  return {s, {"index.json"}};
}

CommandResult cmd_hf_bound(const json& config, const fs::path& dir) {
  const json o = section(config, "hf_bound");
  check_keys(o, {"convergence_radii", "n_base", "rtol", "atol"}, "hf_bound");
  const auto prof = shared_profile(config);
  const HfCoefficients a = hf_coefficients(theta_blocks(*prof), *prof);
  const HfBound b = hf_radius(a);
  json s = hf_to_json(a, b);
  write_json(dir / "hf_bound.json", s);
  CommandResult res{s, {"hf_bound.json"}};
  if (o.contains("convergence_radii")) {
    ConvergenceOptions co;
    co.n_base = get_or(o, "n_base", co.n_base);
    co.evans = evans_options(o);
    EvansSystem sys(prof);
    const auto rows = hf_convergence_study(sys, get_or<std::vector<double>>(o, "convergence_radii", {}), co);
    write_convergence_csv(dir / "convergence.csv", rows);
    res.outputs.push_back("convergence.csv");
  }
  return res;
}

std::vector<double> k_grid(const json& o) {
  const double k_min = get_or(o, "k_min", -50.0), k_max = get_or(o, "k_max", 50.0);
  const int n = get_or(o, "n", 2001);
  if (n < 2 || !(k_max > k_min)) throw ValidationError("k grid needs n >= 2 and k_max > k_min");
  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) k[i] = k_min + (k_max - k_min) * i / (n - 1);
  return k;
}

CommandResult cmd_essential(const json& config, const fs::path& dir) {
  const json o = section(config, "essential");
  check_keys(o, {"k_min", "k_max", "n", "tau0"}, "essential");
  ModelSpec model;
  WaveParams wave;
  model_from(config, model, wave);
  const EquilibriumInfo eq = make_equilibrium(model, wave, get_or(o, "tau0", 1.0));
  const auto k = k_grid(o);
  const EssentialVerdict v = essential_spectrum_of_wave(model, wave, eq, k);
  write_dispersion_csv(dir / "dispersion.csv", v.curve);
  json s{{"max_real", v.curve.max_real}, {"stable", v.stable}, {"subcharacteristic", subcharacteristic_ok(model, eq.tau0)}};
  write_json(dir / "essential.json", s);
  return {s, {"dispersion.csv", "essential.json"}};
}

CommandResult cmd_dynamic(const json& config, const fs::path& dir) {
  const json o = section(config, "dynamic");
  check_keys(o, {"paste_tol", "period", "copies", "n_grid", "N", "n_xi"}, "dynamic");
  const ProfileSolution prof = obtain_profile(config);
  ExtensionOptions eo;
  eo.paste_tol = get_or(o, "paste_tol", eo.paste_tol);
  eo.period = get_or(o, "period", eo.period);
  eo.copies = get_or(o, "copies", eo.copies);
  eo.n_grid = get_or(o, "n_grid", eo.n_grid);
  const PeriodicExtension ext = periodic_extension(prof, eo);
  const auto xi = bloch_grid(ext.X, get_or(o, "n_xi", 32));
  const auto samples = hill_spectrum(ext, xi, get_or(o, "N", 32));
  write_bloch_csv(dir / "bloch.csv", samples, ext.X);
  double max_real = -INFINITY;
  for (const auto& s : samples)
    for (const cplx& l : s.eigenvalues) max_real = std::max(max_real, l.real());
  json s{{"period", ext.X}, {"seam_jump", ext.seam_jump}, {"max_real", max_real}};
  return {s, {"bloch.csv"}};
}

CommandResult cmd_evolve(const json& config, const fs::path& dir) {
  const json o = section(config, "evolve");
  check_keys(o,
             {"amplitude", "center", "width", "T", "dt", "dx", "x_min", "x_max", "comoving", "snapshot_times",
              "snapshot_every", "max_iter", "tol"},
             "evolve");
  const ProfileSolution prof = obtain_profile(config);
  ExperimentConfig c;
  c.perturbation.amplitude = get_or(o, "amplitude", c.perturbation.amplitude);
  c.perturbation.center = get_or(o, "center", c.perturbation.center);
  c.perturbation.width = get_or(o, "width", c.perturbation.width);
  c.T = get_or(o, "T", c.T);
  c.dt = get_or(o, "dt", c.dt);
  c.dx = get_or(o, "dx", c.dx);
  c.x_min = get_or(o, "x_min", c.x_min);
  c.x_max = get_or(o, "x_max", c.x_max);
  c.comoving = get_or(o, "comoving", c.comoving);
  c.snapshot_times = get_or(o, "snapshot_times", c.snapshot_times);
  c.snapshot_every = get_or(o, "snapshot_every", c.snapshot_every);
  c.cn.max_iter = get_or(o, "max_iter", c.cn.max_iter);
  c.cn.tol = get_or(o, "tol", c.cn.tol);
  const ExperimentResult r = run_experiment(prof, c);
  write_experiment(dir / "evolve", r, json{{"model", model_wave_to_json(prof.model, prof.wave)}, {"config", o}});
  const auto& d = r.diagnostics;
  double max_td = 0.0;
  for (double v : d.translate_distance) max_td = std::max(max_td, v);
  json s{{"fitted_growth_rate", d.fitted_growth_rate}, {"fit_valid", d.fit_valid},
         {"max_translate_distance", max_td},          {"amplitude", d.amplitude},
         {"truncated", r.truncated},                  {"contamination_time", r.contamination_time}};
  return {s, {"evolve/metadata.json", "evolve/diagnostics.json"}};
}

using Handler = std::function<CommandResult(const json&, const fs::path&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"equilibria", cmd_equilibria}, {"profile", cmd_profile}, {"evans-real", cmd_evans_real},
      {"winding", cmd_winding},       {"index", cmd_index},     {"hf-bound", cmd_hf_bound},
      {"essential", cmd_essential},   {"dynamic", cmd_dynamic}, {"evolve", cmd_evolve}};
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"equilibria", "profile", "evans-real", "winding", "index",
                                              "hf-bound",   "essential", "dynamic",   "evolve"};
  return names;
}

CommandResult run_command(const std::string& name, const json& config, const fs::path& out_dir) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) throw ValidationError("unknown command '" + name + "'");
  if (!config.is_object()) throw ValidationError("config must be a JSON object");
  check_keys(config,
             {"model", "profile", "evans_real", "winding", "index", "hf_bound", "essential", "dynamic", "evolve"},
             "config");
  fs::create_directories(out_dir);
  return it->second(config, out_dir);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const json::exception*>(&e))
    return 2;
  if (dynamic_cast<const UnreliableResult*>(&e)) return 4;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  return 1;
}

}  // namespace pulsestab::cli
