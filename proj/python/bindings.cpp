// Copyright 2026 The spintomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "spintomo/pipeline.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace spintomo;

namespace {

MeasurementRecord make_record(const std::vector<double>& times, const RVector& values, double sigma,
                              const std::string& filter) {
  if (times.size() != static_cast<size_t>(values.size())) throw invalid_argument("times and values differ in length");
  MeasurementRecord r;
  r.times = times;
  r.values = values;
  r.sigma = sigma;
  r.filter = filter;
  return r;
}

py::dict beta_dict(const BetaPair& b) {
  py::dict d;
  d["beta0"] = b.beta0;
  d["beta2"] = b.beta2;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous-measurement tomography of alkali hyperfine spins";

  // Module attributes keep the exception types alive.
  py::object base = py::exception<Error>(m, "Error", PyExc_RuntimeError);
  static PyObject* config_error = py::exception<Error>(m, "ConfigError", base).ptr();
  static PyObject* io_error = py::exception<Error>(m, "IoError", base).ptr();
  static PyObject* numerical_error = py::exception<Error>(m, "NumericalError", base).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
        case ErrorKind::ModelInconsistency: PyErr_SetString(config_error, e.what()); break;
        case ErrorKind::Io:
        case ErrorKind::NotFound: PyErr_SetString(io_error, e.what()); break;
        default: PyErr_SetString(numerical_error, e.what());
      }
    }
  });

  py::class_<Config>(m, "Config")
      .def_property_readonly("kind", [](const Config& c) { return scenario_kind_name(c.kind); })
      .def_property_readonly("dim", &Config::dim)
      .def_property_readonly("duration_s", &Config::duration)
      .def_property_readonly("sample_step_s", &Config::dt)
      .def("hash", &Config::hash)
      .def("canonical", &Config::canonical);

  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source") = "<string>");
  m.def("load_config", &load_config, py::arg("path"));
  m.def(
      "default_config",
      [](const std::string& kind) {
        if (kind == "full16-rfuw") return default_config(ScenarioKind::Full16);
        if (kind == "f3-lightshift") return default_config(ScenarioKind::F3LightShift);
        if (kind == "f3-larmor") return default_config(ScenarioKind::F3Larmor);
        throw Error(ErrorKind::Config, "unknown scenario kind '" + kind + "'");
      },
      py::arg("kind"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("dim", &Model::dim)
      .def_property_readonly("hash", [](const Model& mm) { return mm.hash; })
      .def_property_readonly("design", [](const Model& mm) { return mm.design.matrix; })
      .def_property_readonly("offsets", [](const Model& mm) { return mm.design.offsets; })
      .def_property_readonly("times", [](const Model& mm) { return mm.design.times; })
      .def_property_readonly("filter", [](const Model& mm) { return mm.filter ? mm.filter->descriptor() : "none"; });
  m.def("build_model", &build_model, py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def("make_state", &make_state, py::arg("config"), py::arg("seed"));
  m.def(
      "sample_state",
      [](const std::string& kind, int d, std::uint64_t seed) { return sample_state(state_kind_from_name(kind), d, seed); },
      py::arg("kind"), py::arg("d"), py::arg("seed"));
  m.def("squeezed_cat_state", &squeezed_cat_state);
  m.def("fidelity", &fidelity, py::arg("a"), py::arg("b"));

  m.def(
      "simulate",
      [](const Model& mm, const CMatrix& rho, std::uint64_t noise_seed) {
        const MeasurementRecord r = simulate_record(mm, rho, noise_seed);
        py::dict d;
        d["times"] = r.times;
        d["values"] = r.values;
        d["sigma"] = r.sigma;
        d["filter"] = r.filter;
        return d;
      },
      py::arg("model"), py::arg("rho"), py::arg("noise_seed"));

  m.def(
      "reconstruct",
      [](const Model& mm, const std::vector<double>& times, const RVector& values, double sigma,
         std::optional<CMatrix> truth) {
        const MeasurementRecord rec = make_record(times, values, sigma, mm.filter ? mm.filter->descriptor() : "none");
        ReconstructionResult res;
        {
          py::gil_scoped_release release;
          res = reconstruct_record(mm, rec, truth ? &*truth : nullptr);
        }
        py::dict d;
        d["rho"] = res.estimate.rho;
        d["rank"] = res.ml.rank;
        d["samples_used"] = res.samples_used;
        d["kkt"] = res.estimate.kkt;
        d["fidelity"] = res.fidelity ? py::cast(*res.fidelity) : py::none();
        py::list traj;
        for (const auto& p : res.trajectory) traj.append(py::make_tuple(p.horizon, p.rank, p.fidelity));
        d["trajectory"] = traj;
        return d;
      },
      py::arg("model"), py::arg("times"), py::arg("values"), py::arg("sigma") = 0.0, py::arg("truth") = py::none());

  m.def(
      "beta_coefficients",
      [](double detuning_hz, int manifold) {
        const ProbeSettings p = ProbeSettings::make(Line::D1, kTwoPi * detuning_hz, Eigen::Vector3cd(1, 0, 0), 1.0);
        return beta_dict(beta_coefficients(p, AtomConstants::cesium()).at(HalfInt(manifold)));
      },
      py::arg("detuning_hz"), py::arg("manifold") = 3);
  m.def(
      "magic_detuning_hz",
      [](int manifold) { return find_magic_detuning(AtomConstants::cesium(), Line::D1, HalfInt(manifold)) / kTwoPi; },
      py::arg("manifold") = 3);
}
