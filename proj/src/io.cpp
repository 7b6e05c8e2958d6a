#include "pulsestab/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

#include "pulsestab/error.hpp"

namespace pulsestab {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json model_wave_to_json(const ModelSpec& model, const WaveParams& wave) {
  json j;
  j["kind"] = model.is_st_venant() ? "st_venant" : "jin_xin";
  if (model.is_st_venant()) {
    j["F"] = model.F;
    j["nu"] = model.nu;
    j["r"] = model.r;
    j["s"] = model.s;
  } else {
    j["cs"] = model.cs;
    j["p"] = model.p;
  }
  j["c"] = wave.c;
  j["q"] = wave.q;
  return j;
}

namespace {

double number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  return out;
}

std::vector<double> array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ValidationError(std::string("profile lacks array '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

void model_wave_from_json(const json& j, ModelSpec& model, WaveParams& wave) {
  if (!j.is_object()) throw ValidationError("model configuration must be a JSON object");
  static const std::set<std::string> allowed{"kind", "F", "nu", "r", "s", "cs", "p", "c", "q"};
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "' in model configuration");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ValidationError("model configuration needs 'kind'");
  const std::string kind = j["kind"];
  try {
    if (kind == "st_venant") {
      for (const char* k : {"cs", "p"})
        if (j.contains(k)) throw ValidationError(std::string("key '") + k + "' does not apply to st_venant");
      model = ModelSpec::st_venant(number(j, "F"), number(j, "nu"), number(j, "r"), number(j, "s"));
    } else if (kind == "jin_xin") {
      for (const char* k : {"F", "nu", "r", "s"})
        if (j.contains(k)) throw ValidationError(std::string("key '") + k + "' does not apply to jin_xin");
      model = ModelSpec::jin_xin(number(j, "cs"), number(j, "p"));
    } else {
      throw ValidationError("unknown model kind '" + kind + "'");
    }
  } catch (const json::out_of_range& e) {
    throw ValidationError(std::string("missing model parameter: ") + e.what());
  }
  if (j.contains("c")) wave.c = number(j, "c");
  if (j.contains("q")) wave.q = number(j, "q");
}

json profile_to_json(const ProfileSolution& p) {
  json meta = model_wave_to_json(p.model, p.wave);
  json j;
  j["model"] = meta;
  j["tau0"] = p.endstate.tau0;
  j["L"] = p.L;
  j["dx"] = p.dx;
  j["eps"] = p.eps;
  j["tail_tol"] = p.tail_tol;
  j["separation"] = p.separation;
  j["truncation_error"] = p.truncation_error;
  j["x"] = p.grid;
  j["tau"] = p.tau;
  j["dtau"] = p.dtau;
  j["u"] = p.u;
  return j;
}

ProfileSolution profile_from_json(const json& j) {
  if (!j.is_object() || !j.contains("model")) throw ValidationError("not a profile document");
  ModelSpec model;
  WaveParams wave;
  model_wave_from_json(j.at("model"), model, wave);
  const EquilibriumInfo eq = make_equilibrium(model, wave, j.at("tau0").get<double>());
  ProfileSolution p = make_profile(model, wave, eq, array(j, "x"), array(j, "tau"), array(j, "dtau"));
  p.eps = j.value("eps", 0.0);
  p.tail_tol = j.value("tail_tol", 0.0);
  p.separation = j.value("separation", 0.0);
  return p;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

void save_profile(const ProfileSolution& profile, const fs::path& file) { write_json(file, profile_to_json(profile)); }

ProfileSolution load_profile(const fs::path& file) { return profile_from_json(read_json(file)); }

void write_evans_csv(const fs::path& file, std::span<const EvansEvaluation> rows) {
  auto out = open_out(file);
  out << "re_lambda,im_lambda,re_D,im_D,log_radius\n";
  for (const EvansEvaluation& e : rows)
    out << format_double(e.lambda.real()) << ',' << format_double(e.lambda.imag()) << ',' << format_double(e.D.real())
        << ',' << format_double(e.D.imag()) << ',' << format_double(e.log_radius) << '\n';
}

void write_bloch_csv(const fs::path& file, const std::vector<BlochSample>& samples, double period) {
  auto out = open_out(file);
  out << "xi,re_lambda,im_lambda,N,period\n";
  for (const BlochSample& s : samples)
    for (const cplx& l : s.eigenvalues)
      out << format_double(s.xi) << ',' << format_double(l.real()) << ',' << format_double(l.imag()) << ',' << s.N
          << ',' << format_double(period) << '\n';
}

void write_dispersion_csv(const fs::path& file, const EssentialSpectrum& spectrum) {
  auto out = open_out(file);
  out << "k,re_lambda,im_lambda\n";
  for (const DispersionSample& s : spectrum.samples)
    for (const cplx& l : s.roots)
      out << format_double(s.k) << ',' << format_double(l.real()) << ',' << format_double(l.imag()) << '\n';
}

void write_convergence_csv(const fs::path& file, const std::vector<ConvergenceEntry>& rows) {
  auto out = open_out(file);
  out << "R,relative_error,c1,c2,n_points,valid\n";
  for (const ConvergenceEntry& e : rows)
    out << format_double(e.R) << ',' << format_double(e.relative_error) << ',' << format_double(e.c1) << ','
        << format_double(e.c2) << ',' << e.n_points << ',' << (e.valid ? 1 : 0) << '\n';
}

json hf_to_json(const HfCoefficients& a, const HfBound& b) {
  return json{{"a0", a.a0},
              {"a_half", a.a_half},
              {"a1", a.a1},
              {"a_3half", a.a_3half},
              {"a2", a.a2},
              {"a_5quarter", a.a_5quarter},
              {"a3", a.a3},
              {"R", b.R},
              {"radius", b.radius},
              {"relaxed_quartic", b.relaxed_quartic},
              {"relaxed_quadratic", b.relaxed_quadratic}};
}

json diagnostics_to_json(const MetastabilityDiagnostics& d) {
  return json{{"times", d.times},
              {"translate_distance", d.translate_distance},
              {"shift", d.shift},
              {"wake_peak", d.wake_peak},
              {"wake_location", d.wake_location},
              {"wake_halfwidth", d.wake_halfwidth},
              {"amplitude", d.amplitude},
              {"fitted_growth_rate", d.fitted_growth_rate},
              {"fit_begin", d.fit_begin},
              {"fit_end", d.fit_end},
              {"fit_valid", d.fit_valid}};
}

void write_experiment(const fs::path& dir, const ExperimentResult& r, const json& metadata) {
  fs::create_directories(dir);
  json meta = metadata;
  json files = json::array();
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", i);
    const Snapshot& s = r.snapshots[i];
    auto out = open_out(dir / name);
    out << "x,tau,u\n";
    for (std::size_t j = 0; j < r.x.size(); ++j)
      out << format_double(r.x[j]) << ',' << format_double(s.tau[j]) << ',' << format_double(s.u[j]) << '\n';
    files.push_back({{"t", s.t}, {"file", name}});
  }
  meta["snapshots"] = files;
  meta["contamination_time"] = r.contamination_time;
  meta["truncated"] = r.truncated;
  meta["note"] = r.note;
  write_json(dir / "metadata.json", meta);
  write_json(dir / "diagnostics.json", diagnostics_to_json(r.diagnostics));
}

}  // namespace pulsestab
