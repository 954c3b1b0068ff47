// Python bindings for the solver core: enough surface to set up
// problems, run the solver variants and inspect histories from Python.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bssn/experiments.hpp"
#include "bssn/newton.hpp"

namespace py = pybind11;
using namespace bssn;

namespace {

WeightedL1Problem make_problem(std::shared_ptr<const Objective> obj,
                               const Vec& weights, double gamma) {
  return WeightedL1Problem(std::move(obj), WeightVector(weights), gamma);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "B-semismooth Newton solver for weighted-l1 penalized problems";

  py::register_exception<InvalidArgument>(m, "InvalidArgument",
                                          PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_RuntimeError);

  py::enum_<Variant>(m, "Variant")
      .value("bssn", Variant::bssn)
      .value("modbssn", Variant::modbssn)
      .value("hybrid", Variant::hybrid);

  py::class_<Objective, std::shared_ptr<Objective>>(m, "Objective")
      .def("value", &Objective::value)
      .def("gradient", &Objective::gradient)
      .def_property_readonly("dimension", &Objective::dimension);

  py::class_<QuadraticObjective, Objective,
             std::shared_ptr<QuadraticObjective>>(m, "QuadraticObjective")
      .def(py::init<Mat, Vec>(), py::arg("k"), py::arg("f"));

  py::class_<RobustObjective, Objective, std::shared_ptr<RobustObjective>>(
      m, "RobustObjective")
      .def(py::init<Mat, Vec>(), py::arg("a"), py::arg("y"));

  py::class_<BlurObjective, Objective, std::shared_ptr<BlurObjective>>(
      m, "BlurObjective")
      .def(py::init<int, double, Vec, double>(), py::arg("image_side"),
           py::arg("blur_length"), py::arg("f_delta"),
           py::arg("tikhonov") = 1e-4)
      .def("apply_operator", &BlurObjective::apply_operator)
      .def_property_readonly("tikhonov", &BlurObjective::tikhonov);

  py::class_<WeightedL1Problem>(m, "Problem")
      .def(py::init(&make_problem), py::arg("objective"), py::arg("weights"),
           py::arg("gamma"))
      .def_property_readonly(
          "dimension",
          [](const WeightedL1Problem& p) { return p.dimension(); })
      .def("penalized_value", &WeightedL1Problem::penalized_value)
      .def("residual", [](const WeightedL1Problem& p, const Vec& u) {
        return residual_map(p, u);
      });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &SolverConfig::gamma)
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("armijo_sigma", &SolverConfig::armijo_sigma)
      .def_readwrite("armijo_beta", &SolverConfig::armijo_beta)
      .def_readwrite("variant", &SolverConfig::variant)
      .def_readwrite("j_max", &SolverConfig::j_max)
      .def_readwrite("t_min", &SolverConfig::t_min)
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("store_iterates", &SolverConfig::store_iterates);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("j", &IterationRecord::j)
      .def_readonly("residual_norm", &IterationRecord::residual_norm)
      .def_readonly("objective", &IterationRecord::objective)
      .def_readonly("step", &IterationRecord::step)
      .def_readonly("lcp_size", &IterationRecord::lcp_size)
      .def_readonly("sle_size", &IterationRecord::sle_size)
      .def_readonly("sle_count", &IterationRecord::sle_count);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("u_star", &SolveResult::u_star)
      .def_readonly("records", &SolveResult::records)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("iterates", &SolveResult::iterates)
      .def_property_readonly("switch_step", [](const SolveResult& r) {
        return r.switch_step ? py::cast(*r.switch_step)
                             : py::object(py::none());
      });

  m.def("solve", &solve, py::arg("problem"), py::arg("u0"), py::arg("config"),
        "run the configured solver variant from u0");
  m.def(
      "soft_threshold",
      [](const Vec& v, const Vec& beta) { return soft_threshold(v, beta); },
      py::arg("v"), py::arg("beta"));
  m.def(
      "ista_oracle",
      [](const WeightedL1Problem& p, const Vec& u0, double step, double tol,
         int max_iter) { return ista_oracle(p, u0, step, tol, max_iter); },
      py::arg("problem"), py::arg("u0"), py::arg("step"), py::arg("tol"),
      py::arg("max_iter"));
  m.def("ista_default_step", &ista_default_step, py::arg("problem"),
        py::arg("u0"));
  m.def("make_sparse_test_image", &make_sparse_test_image,
        py::arg("image_side"), py::arg("nonzero_fraction"), py::arg("seed"));
  m.def("forward_blur_simpson", &forward_blur_simpson, py::arg("image_side"),
        py::arg("blur_length"), py::arg("u"));
  m.def("add_relative_noise", &add_relative_noise, py::arg("f"),
        py::arg("level"), py::arg("seed"));
}
