#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vibrow/config.hpp"
#include "vibrow/errors.hpp"
#include "vibrow/experiments.hpp"
#include "vibrow/io.hpp"
#include "vibrow/metrics.hpp"
#include "vibrow/model.hpp"
#include "vibrow/peaks.hpp"
#include "vibrow/secondq.hpp"

namespace py = pybind11;
using namespace vibrow;

namespace {

SpaceLayout layout_for(Eigen::Index dim) {
  if (dim == 8) return SpaceLayout{2, 2, 2};
  for (int n = 1; 8 * (n + 1) * (n + 1) <= dim; ++n)
    if (8 * (n + 1) * (n + 1) == dim) return SpaceLayout::full_model(n);
  throw std::invalid_argument("expected dimension 8 or 8 (n_max + 1)^2, got " + std::to_string(dim));
}

DensityMatrix as_density(const Matrix& m) {
  if (m.cols() == 1) return DensityMatrix::from_pure(PureState(layout_for(m.rows()), m.col(0)));
  if (m.rows() != m.cols()) throw std::invalid_argument("expected a state vector or a square density matrix");
  return DensityMatrix(layout_for(m.rows()), m);
}

py::dict as_dict(const Table& t) {
  py::dict d;
  for (std::size_t c = 0; c < t.names.size(); ++c) d[py::str(t.names[c])] = t.cols[c];
  return d;
}

py::dict metrics_dict(const EntanglementMetrics& m) {
  py::dict d;
  d["e_tau"] = m.e_tau;
  d["c_min_sq"] = m.c_min_sq;
  d["c_ab"] = m.c_ab;
  d["c_ac"] = m.c_ac;
  d["c_bc"] = m.c_bc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "W-state formation in three charge qubits coupled to two vibrational modes";
  m.attr("__version__") = kCodeVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ResonanceError>(m, "ResonanceError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_static("canonical", &ModelParams::canonical)
      .def_static("symmetric", &ModelParams::symmetric, py::arg("delta"), py::arg("t"), py::arg("g"),
                  py::arg("omega") = 1.0, py::arg("n_max") = 4)
      .def_readwrite("delta", &ModelParams::delta)
      .def_readwrite("t_hop", &ModelParams::t_hop)
      .def_readwrite("g", &ModelParams::g)
      .def_readwrite("omega", &ModelParams::omega)
      .def_readwrite("n_max", &ModelParams::n_max)
      .def_readwrite("gamma_dephase", &ModelParams::gamma_dephase)
      .def("validate", &ModelParams::validate)
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(n_max=" + std::to_string(p.n_max) + ", gamma_dephase=" + format_double(p.gamma_dephase) + ")";
      });

  m.def(
      "hamiltonian",
      [](const ModelParams& p, const std::string& frame) { return hamiltonian_in_frame(p, parse_frame(frame)).m; },
      py::arg("params"), py::arg("frame") = "lab");
  m.def(
      "effective_coupling",
      [](const ModelParams& p, bool with_replicas) {
        return effective_coupling(p, with_replicas ? PerturbationSum::with_replicas : PerturbationSum::ground_replica);
      },
      py::arg("params"), py::arg("with_replicas") = false);
  m.def(
      "branch_energies",
      [](const ModelParams& p, int mm, int l, bool absolute) {
        return unperturbed_energies(p, mm, l, absolute ? EnergyReference::absolute : EnergyReference::shift_omitted)
            .energy;
      },
      py::arg("params"), py::arg("m") = 0, py::arg("l") = 0, py::arg("absolute") = false);
  m.def("full_index", &full_index, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("m"), py::arg("l"),
        py::arg("n_max"));
  m.def("beta_from_time", &beta_from_time, py::arg("t"), py::arg("omega_eff"));
  m.def("time_from_beta", &time_from_beta, py::arg("beta"), py::arg("omega_eff"));

  m.def(
      "concurrence", [](const Matrix& rho) { return concurrence(DensityMatrix(SpaceLayout{2, 2}, rho)); },
      py::arg("rho"));
  m.def(
      "entanglement_metrics", [](const Matrix& state) { return metrics_dict(entanglement_metrics(as_density(state))); },
      py::arg("state"), "State vector (column) or density matrix on the qubits or the full model.");
  m.def(
      "target_w", [](int sign, int n_max) { return target_w(sign, n_max).m; }, py::arg("sign"), py::arg("n_max"));
  m.def(
      "fidelity",
      [](const Matrix& rho, const Matrix& sigma) { return fidelity(as_density(rho), as_density(sigma)); },
      py::arg("rho"), py::arg("sigma"));
  m.def("spectral_function", &spectral_function, py::arg("energies"), py::arg("eps"), py::arg("eta"));
  m.def(
      "detect_peaks",
      [](const std::vector<double>& x, const std::vector<double>& y, double prominence) {
        std::vector<std::tuple<double, double, double>> out;
        for (const Peak& p : detect_peaks(x, y, prominence)) out.emplace_back(p.beta, p.height, p.prominence);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("prominence") = 0.05, "List of (beta, height, prominence).");

  m.def(
      "closed_series",
      [](const ModelParams& p, double beta_max, int samples, const std::string& frame) {
        const TimeGrid g =
            TimeGrid::uniform_beta(0.0, beta_max, static_cast<std::size_t>(samples), effective_coupling(p));
        return as_dict(to_table(closed_series(p, parse_frame(frame), g)));
      },
      py::arg("params"), py::arg("beta_max") = 10.0, py::arg("samples") = 600, py::arg("frame") = "polaron");

  m.def(
      "compute",
      [](const std::string& config_json) {
        return as_dict(compute(parse_config(Json::parse(config_json))).table);
      },
      py::arg("config_json"), "Data table of one experiment config (JSON text) as a dict of columns.");
  m.def(
      "run",
      [](const std::string& config_json) { return run(parse_config(Json::parse(config_json))).manifest.dump(); },
      py::arg("config_json"), "Runs a config and writes its outputs; returns the manifest as JSON text.");
  m.def(
      "effective_config", [](const std::string& config_json) { return config_to_json(parse_config(Json::parse(config_json))).dump(); },
      py::arg("config_json"));
}
