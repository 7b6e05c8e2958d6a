#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "pulsestab/bloch.hpp"
#include "pulsestab/contour.hpp"
#include "pulsestab/error.hpp"
#include "pulsestab/evolve.hpp"
#include "pulsestab/hifreq.hpp"
#include "pulsestab/io.hpp"

namespace py = pybind11;
using namespace pulsestab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict evaluation_dict(const EvansEvaluation& e) {
  py::dict d;
  d["lambda"] = e.lambda;
  d["D"] = e.D;
  d["log_D"] = e.log_D;
  d["log_radius"] = e.log_radius;
  d["mantissa"] = e.mantissa;
  d["basis"] = e.basis_id;
  return d;
}

std::shared_ptr<const ProfileSolution> share(const ProfileSolution& p) {
  return std::make_shared<const ProfileSolution>(p);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Evans-function and spectral stability tools for viscous solitary waves";

  // later registrations are tried first, so derived types go after the base
  auto& base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<UnreliableResult>(m, "UnreliableResult", base.ptr());

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("st_venant", &ModelSpec::st_venant, py::arg("F"), py::arg("nu"), py::arg("r"), py::arg("s"))
      .def_static("jin_xin", &ModelSpec::jin_xin, py::arg("cs"), py::arg("p"))
      .def_property_readonly("kind", [](const ModelSpec& s) { return to_string(s.kind); })
      .def_readonly("F", &ModelSpec::F)
      .def_readonly("nu", &ModelSpec::nu)
      .def_readonly("r", &ModelSpec::r)
      .def_readonly("s", &ModelSpec::s)
      .def_readonly("cs", &ModelSpec::cs)
      .def_readonly("p", &ModelSpec::p);

  py::class_<WaveParams>(m, "WaveParams")
      .def(py::init([](double c, double q) { return WaveParams{c, q}; }), py::arg("c"), py::arg("q"))
      .def_readwrite("c", &WaveParams::c)
      .def_readwrite("q", &WaveParams::q);

  py::class_<EquilibriumInfo>(m, "Equilibrium")
      .def_readonly("tau0", &EquilibriumInfo::tau0)
      .def_readonly("u0", &EquilibriumInfo::u0)
      .def_readonly("cs", &EquilibriumInfo::cs)
      .def_readonly("dfstar", &EquilibriumInfo::dfstar)
      .def_property_readonly("classification", [](const EquilibriumInfo& e) { return to_string(e.classification); });

  m.def("find_equilibria", &find_equilibria, py::arg("model"), py::arg("wave"));
  m.def("make_equilibrium", &make_equilibrium, py::arg("model"), py::arg("wave"), py::arg("tau0"));
  m.def("subcharacteristic_ok", &subcharacteristic_ok, py::arg("model"), py::arg("tau"));

  py::class_<ProfileSolution>(m, "Profile")
      .def_readonly("model", &ProfileSolution::model)
      .def_readonly("wave", &ProfileSolution::wave)
      .def_readonly("endstate", &ProfileSolution::endstate)
      .def_readonly("L", &ProfileSolution::L)
      .def_readonly("dx", &ProfileSolution::dx)
      .def_readonly("truncation_error", &ProfileSolution::truncation_error)
      .def_property_readonly("x", [](const ProfileSolution& p) { return to_array(p.grid); })
      .def_property_readonly("tau", [](const ProfileSolution& p) { return to_array(p.tau); })
      .def_property_readonly("dtau", [](const ProfileSolution& p) { return to_array(p.dtau); })
      .def_property_readonly("u", [](const ProfileSolution& p) { return to_array(p.u); })
      .def("amplitude", &ProfileSolution::amplitude)
      .def("save", [](const ProfileSolution& p, const std::filesystem::path& f) { save_profile(p, f); });

  m.def(
      "solve_homoclinic",
      [](const ModelSpec& model, const WaveParams& wave, double dx, double tail_tol) {
        ProfileOptions o;
        o.dx = dx;
        o.tail_tol = tail_tol;
        return solve_homoclinic(model, wave, o);
      },
      py::arg("model"), py::arg("wave"), py::arg("dx") = 0.01, py::arg("tail_tol") = 1e-8);
  m.def(
      "jinxin_quadrature",
      [](const ModelSpec& model, double q, double H, std::size_t n) { return jinxin_quadrature(model, q, H, n); },
      py::arg("model"), py::arg("q"), py::arg("H"), py::arg("n") = 0);
  m.def("load_profile", &load_profile, py::arg("path"));

  m.def(
      "evans",
      [](const ProfileSolution& p, cplx lambda) { return evaluation_dict(evans_eval(EvansSystem(share(p)), lambda)); },
      py::arg("profile"), py::arg("lam"), "Evans function at one spectral value.");
  m.def(
      "real_axis_scan",
      [](const ProfileSolution& p, double a, double b, int n) {
        const RealAxisScan s = real_axis_scan(EvansSystem(share(p)), a, b, n);
        std::vector<double> lam, d, roots;
        for (const auto& e : s.samples) {
          lam.push_back(e.lambda.real());
          d.push_back(e.mantissa.real() * std::exp(e.log_radius));
        }
        for (const auto& r : s.roots) roots.push_back(r.root);
        py::dict out;
        out["lambda"] = to_array(lam);
        out["D"] = to_array(d);
        out["roots"] = roots;
        return out;
      },
      py::arg("profile"), py::arg("a"), py::arg("b"), py::arg("n") = 41);
  m.def(
      "winding_number",
      [](const ProfileSolution& p, double R, double r_in, double max_rel_change) {
        WindingOptions o;
        o.max_rel_change = max_rel_change;
        const WindingResult w = adaptive_winding(EvansSystem(share(p)), build_semicircle(R, r_in), o);
        py::dict out;
        out["winding"] = w.winding;
        out["max_rel_step"] = w.max_rel_step;
        out["n_points"] = w.n_points;
        return out;
      },
      py::arg("profile"), py::arg("R"), py::arg("r_in") = 0.0, py::arg("max_rel_change") = 0.2);
  m.def(
      "stability_index",
      [](const ProfileSolution& p, double lambda_large) {
        const StabilityIndexReport r = stability_index(EvansSystem(share(p)), lambda_large);
        py::dict out;
        out["dprime_sign"] = r.dprime_sign;
        out["parity"] = r.parity == StabilityIndex::OddUnstableCount ? "Odd" : "Even";
        return out;
      },
      py::arg("profile"), py::arg("lambda_large") = 100.0);
  m.def(
      "hf_bound",
      [](const ProfileSolution& p) {
        const HfCoefficients a = hf_coefficients(theta_blocks(p), p);
        return py::module_::import("json").attr("loads")(hf_to_json(a, hf_radius(a)).dump());
      },
      py::arg("profile"), "High-frequency coefficients and exclusion radius as a dict.");
  m.def(
      "essential_spectrum",
      [](const ModelSpec& model, const WaveParams& wave, double tau0, std::vector<double> k) {
        const EssentialVerdict v = essential_spectrum_of_wave(model, wave, make_equilibrium(model, wave, tau0), k);
        py::array_t<cplx> roots({k.size(), std::size_t{2}});
        auto r = roots.mutable_unchecked<2>();
        for (std::size_t i = 0; i < k.size(); ++i)
          for (int j = 0; j < 2; ++j) r(i, j) = v.curve.samples[i].roots[j];
        py::dict out;
        out["roots"] = roots;
        out["max_real"] = v.curve.max_real;
        out["stable"] = v.stable;
        return out;
      },
      py::arg("model"), py::arg("wave"), py::arg("tau0"), py::arg("k"));
  m.def(
      "bloch_spectrum",
      [](const ProfileSolution& p, int n_xi, int N, int copies) {
        ExtensionOptions o;
        o.copies = copies;
        const PeriodicExtension ext = periodic_extension(p, o);
        const auto samples = hill_spectrum(ext, bloch_grid(ext.X, n_xi), N);
        std::vector<double> xi;
        std::vector<cplx> lam;
        for (const auto& s : samples)
          for (const cplx& l : s.eigenvalues) {
            xi.push_back(s.xi);
            lam.push_back(l);
          }
        py::dict out;
        out["xi"] = to_array(xi);
        out["lambda"] = py::array_t<cplx>(lam.size(), lam.data());
        out["period"] = ext.X;
        return out;
      },
      py::arg("profile"), py::arg("n_xi") = 16, py::arg("N") = 32, py::arg("copies") = 1);
  m.def(
      "run_experiment",
      [](const ProfileSolution& p, double T, double dt, double dx, double x_min, double x_max, double amplitude,
         double center, double width, double snapshot_every) {
        ExperimentConfig c;
        c.T = T;
        c.dt = dt;
        c.dx = dx;
        c.x_min = x_min;
        c.x_max = x_max;
        c.perturbation = {amplitude, center, width};
        c.snapshot_every = snapshot_every;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(p, c);
        }
        const auto& d = r.diagnostics;
        py::dict out;
        out["x"] = to_array(r.x);
        out["times"] = to_array(d.times);
        out["translate_distance"] = to_array(d.translate_distance);
        out["wake_peak"] = to_array(d.wake_peak);
        out["fitted_growth_rate"] = d.fitted_growth_rate;
        out["fit_valid"] = d.fit_valid;
        out["amplitude"] = d.amplitude;
        out["truncated"] = r.truncated;
        py::list tau;
        for (const auto& s : r.snapshots) tau.append(to_array(s.tau));
        out["tau"] = tau;
        return out;
      },
      py::arg("profile"), py::arg("T") = 100.0, py::arg("dt") = 0.05, py::arg("dx") = 0.05, py::arg("x_min") = -160.0,
      py::arg("x_max") = 40.0, py::arg("amplitude") = 0.01, py::arg("center") = 10.0, py::arg("width") = 1.0,
      py::arg("snapshot_every") = 2.0);

  m.attr("__version__") = PULSESTAB_VERSION;
}
