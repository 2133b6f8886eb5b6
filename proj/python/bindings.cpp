#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "longi/cd_floquet.hpp"
#include "longi/circuit_model.hpp"
#include "longi/errors.hpp"
#include "longi/experiment.hpp"
#include "longi/genetic_opt.hpp"
#include "longi/lindblad_oracle.hpp"
#include "longi/time_optimal.hpp"

namespace py = pybind11;
using namespace longi;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string dump(const json& j) { return j.dump(); }

ExperimentConfig parse_config(const std::string& text) { return ExperimentConfig::from_json(json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_longi, m) {
  m.doc() = "Longitudinal-coupling readout design and simulation";

  static py::exception<Error> base(m, "LongiError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<TruncationError> truncation_error(m, "TruncationError", base.ptr());
  static py::exception<InfeasibleError> infeasible_error(m, "InfeasibleError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, dump(error_json(e)).c_str());
    } catch (const TruncationError& e) {
      py::set_error(truncation_error, dump(error_json(e)).c_str());
    } catch (const InfeasibleError& e) {
      py::set_error(infeasible_error, dump(error_json(e)).c_str());
    } catch (const Error& e) {
      py::set_error(base, dump(error_json(e)).c_str());
    }
  });

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_static("reference_point", &SystemParams::reference_point)
      .def_readwrite("omega_q", &SystemParams::omega_q)
      .def_readwrite("omega_r", &SystemParams::omega_r)
      .def_readwrite("kappa", &SystemParams::kappa)
      .def_readwrite("g_z0", &SystemParams::g_z0)
      .def_readwrite("t_f", &SystemParams::t_f)
      .def("validate", &SystemParams::validate)
      .def("with_duration", &SystemParams::with_duration);

  py::class_<Modulation>(m, "Modulation")
      .def_static("polynomial", &Modulation::polynomial)
      .def_static("trigonometric", &Modulation::trigonometric)
      .def_static("fourier_series", &Modulation::fourier_series)
      .def_static("sampled", &Modulation::sampled)
      .def_static("constant", &Modulation::constant)
      .def_static("bang_bang", &Modulation::bang_bang)
      .def_static("from_json", [](const std::string& s) { return Modulation::from_json(json::parse(s)); })
      .def_property_readonly("kind", [](const Modulation& mod) { return std::string(to_string(mod.kind())); })
      .def_property_readonly("t_f", &Modulation::t_f)
      .def_property_readonly("coefficients",
                             [](const Modulation& mod) {
                               return std::vector<double>(mod.coefficients().begin(), mod.coefficients().end());
                             })
      .def("value", &Modulation::value)
      .def("derivative", &Modulation::derivative, py::arg("t"), py::arg("order"))
      .def("sample",
           [](const Modulation& mod, const std::vector<double>& times, int order) { return mod.sample(times, order); },
           py::arg("times"), py::arg("order") = 0)
      .def("to_json", [](const Modulation& mod) { return dump(mod.to_json()); });

  m.def("eval_poly_gc", &eval_poly_gc);
  m.def("eval_trig_gc", &eval_trig_gc);
  m.def("poly_modulation", &poly_modulation);
  m.def("trig_modulation", &trig_modulation);
  m.def("baseline", &baseline);
  m.def("gz_from_gc", &gz_from_gc);
  m.def("uniform_grid", &uniform_grid);
  m.def(
      "verify_boundaries",
      [](const Modulation& mod, const SystemParams& p, double tol) { return dump(verify_boundaries(mod, p, tol).to_json()); },
      py::arg("modulation"), py::arg("params"), py::arg("tol") = kDefaultBoundaryTolerance);
  m.def("euler_lagrange_residual", &euler_lagrange_residual);

  py::class_<CavityTrajectory>(m, "CavityTrajectory")
      .def_readonly("times", &CavityTrajectory::times)
      .def_readonly("alpha_e", &CavityTrajectory::alpha_e)
      .def_readonly("alpha_g", &CavityTrajectory::alpha_g)
      .def_readonly("kappa", &CavityTrajectory::kappa);
  m.def("make_trajectory",
        [](const Modulation& gc, double kappa, const std::vector<double>& grid) { return make_trajectory(gc, kappa, grid); });
  m.def("pointer_separation", &pointer_separation);

  py::class_<SqueezeSpec>(m, "SqueezeSpec")
      .def(py::init([](double r, double theta, double phi) { return SqueezeSpec{r, theta, phi}; }), py::arg("r"),
           py::arg("theta"), py::arg("phi"))
      .def_static("from_db", &SqueezeSpec::from_db)
      .def_readonly("r", &SqueezeSpec::r)
      .def_readonly("theta", &SqueezeSpec::theta)
      .def_readonly("phi", &SqueezeSpec::phi);
  py::class_<SNRCurve>(m, "SNRCurve")
      .def_readonly("taus", &SNRCurve::taus)
      .def_readonly("signal", &SNRCurve::signal)
      .def_readonly("noise_var", &SNRCurve::noise_var)
      .def_readonly("snr", &SNRCurve::snr);
  m.def(
      "snr_curve",
      [](const CavityTrajectory& traj, double phi, const std::vector<double>& taus, std::optional<SqueezeSpec> sq) {
        return snr_curve(traj, phi, taus, sq);
      },
      py::arg("trajectory"), py::arg("phi"), py::arg("taus"), py::arg("squeeze") = std::nullopt);
  m.def("fit_scaling_exponent", &fit_scaling_exponent);
  m.attr("DEFAULT_HOMODYNE_ANGLE") = kDefaultHomodyneAngle;

  m.def("bessel_j", &bessel_j);
  m.def("bessel_j_series", &bessel_j_series);
  m.def(
      "magnus_average",
      [](double coefficient, double Omega, double nu, double gz_dot, double omega_r, int harmonic) {
        const auto a = magnus_average(coefficient, FloquetSpec{Omega, nu}, gz_dot, omega_r, harmonic);
        return py::make_tuple(a.average, a.target, a.matches_cd);
      },
      py::arg("coefficient"), py::arg("Omega"), py::arg("nu"), py::arg("gz_dot"), py::arg("omega_r"),
      py::arg("harmonic") = 1);

  m.def(
      "ga_run",
      [](const SystemParams& p, const std::string& config) {
        const auto cfg = GAConfig::from_json(json::parse(config));
        py::gil_scoped_release release;
        return dump(ga_run(p, cfg).to_json());
      },
      py::arg("params"), py::arg("config") = "{}");

  m.def("circuit_report", [](const std::string& params) {
    const auto cp = params.empty() ? CircuitParams::reference_point() : CircuitParams::from_json(json::parse(params));
    return dump(circuit_report(cp));
  }, py::arg("params") = "");

  m.def("minimal_time", [](const SystemParams& p, double u_max) {
    return dump(minimal_time(ControlProblem::from_system(p, u_max)).to_json());
  }, py::arg("params"), py::arg("u_max") = kQuotedCouplingBound);

  m.def("config_digest", [](const std::string& config) { return parse_config(config).digest(); });
  m.def("run_experiment", [](const std::string& config) {
    const auto cfg = parse_config(config);
    py::gil_scoped_release release;
    const auto r = run_experiment(cfg);
    json files = json::array();
    for (const auto& f : r.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return dump({{"directory", r.directory.generic_string()}, {"files", files}, {"summary", r.summary}});
  });
}
