#include "rgap/commands.hpp"
#include "rgap/frequency.hpp"
#include "rgap/gap.hpp"
#include "rgap/mixture.hpp"
#include "rgap/scenario.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rgap;

namespace {

py::dict solution_dict(const GapSolution& s) {
  py::dict d;
  d["gate"] = s.gate;
  d["gate_holds"] = s.gate_holds;
  d["fallback"] = s.fallback;
  d["eta"] = s.eta;
  d["delta"] = s.delta;
  d["lambda"] = s.lambda;
  d["eta_limit"] = s.eta_limit;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rgap, m) {
  m.doc() = "Spectral gap of the linearized reactive Boltzmann operator for S1 + S2 <-> S3 + S4.";
  m.attr("__version__") = RGAP_VERSION;

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    }
  });

  py::class_<MixtureConfig>(m, "MixtureConfig")
      .def_static("from_mass_action", &MixtureConfig::from_mass_action, py::arg("masses"),
                  py::arg("energies"), py::arg("c1"), py::arg("c2"), py::arg("c3"), py::arg("gamma"))
      .def("mass", &MixtureConfig::mass)
      .def("energy", &MixtureConfig::energy)
      .def("concentration", &MixtureConfig::concentration)
      .def_property_readonly("gamma", &MixtureConfig::gamma)
      .def_property_readonly("binding_energy", &MixtureConfig::binding_energy)
      .def_property_readonly("reduced_mass_12", &MixtureConfig::reduced_mass_12)
      .def_property_readonly("reduced_mass_34", &MixtureConfig::reduced_mass_34)
      .def("reduced_mass", &MixtureConfig::reduced_mass)
      .def("mass_action_residual",
           [](const MixtureConfig& c) { return mass_action_residual(c); });

  m.def("solve_mass_action", &solve_mass_action, py::arg("c1"), py::arg("c2"), py::arg("c3"),
        py::arg("masses"), py::arg("energies"));
  m.def("incomplete_gamma_upper", &incomplete_gamma_upper, py::arg("s"), py::arg("y"));
  m.def("incomplete_gamma_lower", &incomplete_gamma_lower, py::arg("s"), py::arg("y"));

  m.def(
      "solve_gap",
      [](double C_b, double C_nu, double C_psi, double c_inf, double lambda_el) {
        return solution_dict(solve_gap(C_b, C_nu, C_psi, c_inf, lambda_el));
      },
      py::arg("C_b"), py::arg("C_nu"), py::arg("C_psi"), py::arg("c_inf"), py::arg("lambda_el"));

  m.def("default_scenario_text", &default_scenario_text);
  m.def(
      "scenario_hash", [](const std::string& text) { return hex64(parse_scenario(text).hash); },
      py::arg("text"));
  m.def("parse_grid", &parse_grid, py::arg("spec"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one rgap subcommand; returns (exit_code, stdout, stderr).");

  m.attr("EXIT_PASS") = static_cast<int>(kExitPass);
  m.attr("EXIT_CONFIG") = static_cast<int>(kExitConfig);
  m.attr("EXIT_NUMERICAL") = static_cast<int>(kExitNumerical);
  m.attr("EXIT_GAP_VIOLATION") = static_cast<int>(kExitGapViolation);
  m.attr("EXIT_BOUND_VIOLATION") = static_cast<int>(kExitBoundViolation);
}
