#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aasm/bench.hpp"

namespace py = pybind11;
using namespace aasm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

Array to_array(const Vector& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

ExperimentConfig make_config(const py::kwargs& kwargs) {
  ExperimentConfig cfg;
  if (kwargs.contains("problem")) cfg.set("problem", py::str(kwargs["problem"]).cast<std::string>());
  for (auto item : kwargs) {
    auto key = item.first.cast<std::string>();
    if (key == "problem") continue;
    for (auto& c : key)
      if (c == '_') c = '-';
    cfg.set(key, py::str(item.second).cast<std::string>());
  }
  return cfg;
}

void check_size(const Problem& p, const Array& u) {
  if (view(u).size() != p.num_dofs()) throw std::invalid_argument("vector length does not match the problem");
}

py::dict trace_dict(const Trace& trace) {
  std::vector<int> iter;
  std::vector<double> energy, error, wall;
  std::vector<bool> restarted;
  for (const auto& r : trace) {
    iter.push_back(r.iter);
    energy.push_back(r.energy);
    error.push_back(r.energy_error);
    restarted.push_back(r.restarted);
    wall.push_back(r.wall_seconds);
  }
  py::dict d;
  d["iter"] = py::array(py::cast(iter));
  d["energy"] = py::array(py::cast(energy));
  d["energy_error"] = py::array(py::cast(error));
  d["restarted"] = py::array(py::cast(restarted));
  d["wall_s"] = py::array(py::cast(wall));
  return d;
}

Trace trace_from(const Array& errors) {
  Trace t;
  const auto e = view(errors);
  for (std::size_t i = 0; i < e.size(); ++i) t.push_back({static_cast<int>(i), 0.0, e[i], false, 0.0});
  return t;
}

}  // namespace

PYBIND11_MODULE(_aasm, m) {
  m.doc() = "Accelerated additive Schwarz methods for convex finite element problems";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Problem>(m, "Problem")
      .def_static(
          "create",
          [](const py::kwargs& kwargs) { return make_problem(make_config(kwargs)); },
          "Benchmark problem from config keys (problem, s, n)")
      .def_property_readonly("kind", [](const Problem& p) { return std::string(to_string(p.kind())); })
      .def_property_readonly("s", &Problem::s)
      .def_property_readonly("h", &Problem::h)
      .def_property_readonly("num_dofs", &Problem::num_dofs)
      .def("energy", [](const Problem& p, const Array& u) { check_size(p, u); return energy_value(p, view(u)).value; })
      .def("gradient", [](const Problem& p, const Array& u) { check_size(p, u); return to_array(grad_F(p, view(u))); })
      .def("prox", [](const Problem& p, const Array& u) { check_size(p, u); return to_array(prox_G(p, view(u))); })
      .def("is_feasible", [](const Problem& p, const Array& u) { check_size(p, u); return is_feasible(p, view(u)); })
      .def("initial_guess", [](const Problem& p) { return to_array(initial_guess(p)); });

  m.def("momentum_update", [](double t) {
    const auto r = momentum_update(t);
    return py::make_tuple(r.t_next, r.beta);
  });
  m.def("restart_test", [](const Array& v, const Array& u_new, const Array& u_old) {
    return restart_test(view(v), view(u_new), view(u_old));
  });

  m.def(
      "compute_reference",
      [](const py::kwargs& kwargs) {
        const auto ref = obtain_reference(make_config(kwargs));
        py::dict d;
        d["u"] = to_array(ref.u);
        d["energy"] = ref.energy;
        d["generator"] = ref.generator;
        d["fingerprint"] = ref.fingerprint;
        return d;
      },
      "Reference minimizer; cached when ref or ref_dir is given");

  m.def(
      "run_experiment",
      [](const py::kwargs& kwargs) {
        const auto cfg = make_config(kwargs);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        py::dict d = trace_dict(res.trace);
        d["solution"] = to_array(res.solution);
        d["reference_energy"] = res.reference_energy;
        return d;
      },
      "Run one solver; keyword arguments are the CLI config keys (max_iter, tol, ...)");

  m.def("iterations_to_tol", [](const Array& energy_error, double tol) {
    return iterations_to_tol(trace_from(energy_error), tol);
  });
}
