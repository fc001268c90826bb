#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wcprox/baselines.hpp"
#include "wcprox/bundle.hpp"
#include "wcprox/core.hpp"
#include "wcprox/harness.hpp"
#include "wcprox/problems.hpp"
#include "wcprox/prox_descent.hpp"
#include "wcprox/stationarity.hpp"

namespace py = pybind11;
using namespace wcprox;

namespace {

// Python callables return (value, gradient); the GIL is taken per call.
FirstOrderOracle python_oracle(Index dimension, double m, py::function fn, std::optional<double> lipschitz,
                               std::optional<double> smoothness, std::optional<double> optimal_value,
                               const std::string& name) {
  OracleConstants k;
  k.weak_convexity = m;
  k.lipschitz = lipschitz;
  k.smoothness = smoothness;
  k.optimal_value = optimal_value;
  auto holder = std::make_shared<py::function>(std::move(fn));
  return FirstOrderOracle(
      dimension, k,
      [holder](const Vector& x) {
        py::gil_scoped_acquire gil;
        const py::tuple out = (*holder)(x);
        if (out.size() != 2) throw std::runtime_error("oracle callable must return (value, gradient)");
        return Evaluation{out[0].cast<double>(), out[1].cast<Vector>()};
      },
      name);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Proximal descent for weakly convex optimization";

  py::register_exception<InnerBudgetExhausted>(mod, "InnerBudgetExhausted", PyExc_RuntimeError);
  py::register_exception<WeakConvexityViolation>(mod, "WeakConvexityViolation", PyExc_RuntimeError);
  py::register_exception<ReferenceBudgetExhausted>(mod, "ReferenceBudgetExhausted", PyExc_RuntimeError);
  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

  py::class_<Evaluation>(mod, "Evaluation")
      .def_readonly("value", &Evaluation::value)
      .def_readonly("subgradient", &Evaluation::subgradient)
      .def("__iter__", [](const Evaluation& e) {
        return py::iter(py::make_tuple(e.value, e.subgradient));
      });

  py::class_<FirstOrderOracle>(mod, "Oracle")
      .def(py::init(&python_oracle), py::arg("dimension"), py::arg("m"), py::arg("fn"),
           py::arg("lipschitz") = py::none(), py::arg("smoothness") = py::none(),
           py::arg("optimal_value") = py::none(), py::arg("name") = "python")
      .def("evaluate", &FirstOrderOracle::evaluate, py::arg("x"))
      .def("__call__", &FirstOrderOracle::evaluate, py::arg("x"))
      .def_property_readonly("dimension", &FirstOrderOracle::dimension)
      .def_property_readonly("m", &FirstOrderOracle::weak_convexity)
      .def_property_readonly("lipschitz", [](const FirstOrderOracle& o) { return o.constants().lipschitz; })
      .def_property_readonly("smoothness", [](const FirstOrderOracle& o) { return o.constants().smoothness; })
      .def_property_readonly("optimal_value",
                             [](const FirstOrderOracle& o) { return o.constants().optimal_value; })
      .def_property_readonly("name", &FirstOrderOracle::name);

  mod.def("convexify", &convexify, py::arg("oracle"), py::arg("center"));
  mod.def(
      "toy",
      [](const std::string& kind, Index d, double mu) { return toy(parse_toy_kind(kind), d, mu).oracle; },
      py::arg("kind"), py::arg("d") = 1, py::arg("mu") = 1.0);
  mod.def(
      "phase_retrieval",
      [](Index d, Index n, std::uint64_t seed) {
        auto [inst, oracle] = gen_phase_retrieval(d, n, seed);
        py::dict data;
        data["a"] = inst.a;
        data["b"] = inst.b;
        data["ground_truth"] = inst.ground_truth;
        data["m"] = inst.m;
        return py::make_tuple(oracle, data);
      },
      py::arg("d"), py::arg("n"), py::arg("seed"));
  mod.def(
      "blind_deconv",
      [](Index d, Index n, std::uint64_t seed) {
        auto [inst, oracle] = gen_blind_deconv(d, n, seed);
        py::dict data;
        data["u"] = inst.u;
        data["v"] = inst.v;
        data["b"] = inst.b;
        data["ground_truth"] = inst.stacked_ground_truth();
        data["m"] = inst.m;
        return py::make_tuple(oracle, data);
      },
      py::arg("d"), py::arg("n"), py::arg("seed"));

  py::class_<ProxDescentConfig>(mod, "ProxDescentConfig")
      .def(py::init<>())
      .def_readwrite("beta", &ProxDescentConfig::beta)
      .def_readwrite("rho", &ProxDescentConfig::rho)
      .def_readwrite("eta_target", &ProxDescentConfig::eta_target)
      .def_readwrite("eps_target", &ProxDescentConfig::eps_target)
      .def_readwrite("max_outer", &ProxDescentConfig::max_outer)
      .def_readwrite("max_inner_per_step", &ProxDescentConfig::max_inner_per_step)
      .def_readwrite("max_evaluations", &ProxDescentConfig::max_evaluations)
      .def("validate", &ProxDescentConfig::validate);

  py::class_<OuterRecord>(mod, "OuterRecord")
      .def_readonly("k", &OuterRecord::k)
      .def_readonly("f_center", &OuterRecord::f_center)
      .def_readonly("f_value", &OuterRecord::f_value)
      .def_readonly("gtilde_norm_sq", &OuterRecord::gtilde_norm_sq)
      .def_readonly("epsilon", &OuterRecord::epsilon)
      .def_readonly("step_norm_sq", &OuterRecord::step_norm_sq)
      .def_readonly("inner_iterations", &OuterRecord::inner_iterations)
      .def_readonly("cumulative_evaluations", &OuterRecord::cumulative_evaluations)
      .def_readonly("point", &OuterRecord::point);

  py::class_<SolveReport>(mod, "SolveReport")
      .def_readonly("initial_point", &SolveReport::initial_point)
      .def_readonly("f_initial", &SolveReport::f_initial)
      .def_readonly("m", &SolveReport::m)
      .def_readonly("alpha", &SolveReport::alpha)
      .def_readonly("iterates", &SolveReport::iterates)
      .def_property_readonly("termination", [](const SolveReport& r) { return to_string(r.termination); })
      .def_readonly("certified_index", &SolveReport::certified_index)
      .def_readonly("total_evaluations", &SolveReport::total_evaluations)
      .def_readonly("diagnostic", &SolveReport::diagnostic)
      .def_property_readonly("final_point", &SolveReport::final_point);

  mod.def(
      "prox_descent",
      [](const FirstOrderOracle& oracle, const Vector& x1, const ProxDescentConfig& config) {
        py::gil_scoped_release release;
        return run(oracle, x1, config);
      },
      py::arg("oracle"), py::arg("x1"), py::arg("config") = ProxDescentConfig{});

  py::class_<MoreauResult>(mod, "MoreauResult")
      .def_readonly("prox_point", &MoreauResult::prox_point)
      .def_readonly("envelope_value", &MoreauResult::envelope_value)
      .def_readonly("gradient", &MoreauResult::gradient)
      .def_readonly("certified_gap", &MoreauResult::certified_gap)
      .def_readonly("lower_bound", &MoreauResult::lower_bound)
      .def_readonly("evaluations", &MoreauResult::evaluations);

  mod.def(
      "moreau_envelope",
      [](const FirstOrderOracle& oracle, const Vector& x, double rho, double tol, std::int64_t max_iterations) {
        MoreauOptions o;
        o.tol = tol;
        o.max_iterations = max_iterations;
        py::gil_scoped_release release;
        return moreau_reference(oracle, x, rho, o);
      },
      py::arg("oracle"), py::arg("x"), py::arg("rho"), py::arg("tol") = 1e-12,
      py::arg("max_iterations") = 1000000);

  mod.def("is_to_ms_bound", &is_to_ms_bound, py::arg("eta"), py::arg("eps"), py::arg("m"), py::arg("lam"));
  mod.def("ms_to_is_bound", &ms_to_is_bound, py::arg("delta"), py::arg("alpha"), py::arg("m"),
          py::arg("lipschitz"));

  py::class_<BaselineRecord>(mod, "BaselineRecord")
      .def_readonly("k", &BaselineRecord::k)
      .def_readonly("f_value", &BaselineRecord::f_value)
      .def_readonly("stationarity_proxy", &BaselineRecord::stationarity_proxy)
      .def_readonly("inner_count", &BaselineRecord::inner_count)
      .def_readonly("cumulative_evaluations", &BaselineRecord::cumulative_evaluations)
      .def_readonly("point", &BaselineRecord::point);

  py::class_<BaselineReport>(mod, "BaselineReport")
      .def_readonly("algorithm", &BaselineReport::algorithm)
      .def_readonly("iterates", &BaselineReport::iterates)
      .def_readonly("total_evaluations", &BaselineReport::total_evaluations)
      .def_property_readonly("termination", [](const BaselineReport& r) { return to_string(r.termination); })
      .def_readonly("diagnostic", &BaselineReport::diagnostic)
      .def("min_stationarity_proxy", &BaselineReport::min_stationarity_proxy);

  mod.def(
      "subgradient_method",
      [](const FirstOrderOracle& oracle, const Vector& x1, double step, std::int64_t T) {
        py::gil_scoped_release release;
        return subgradient_method(oracle, x1, StepSchedule::constant(step), T);
      },
      py::arg("oracle"), py::arg("x1"), py::arg("step"), py::arg("T"));
  mod.def(
      "ppm",
      [](const FirstOrderOracle& oracle, const Vector& x1, double alpha, std::int64_t T) {
        py::gil_scoped_release release;
        return ppm(oracle, x1, alpha, T);
      },
      py::arg("oracle"), py::arg("x1"), py::arg("alpha"), py::arg("T"));
  mod.def(
      "pgsg",
      [](const FirstOrderOracle& oracle, const Vector& x1, double rho, std::int64_t T, std::int64_t J) {
        py::gil_scoped_release release;
        return pgsg(oracle, x1, rho, T, J);
      },
      py::arg("oracle"), py::arg("x1"), py::arg("rho"), py::arg("T"), py::arg("J"));

  mod.def(
      "run_config",
      [](const std::string& json_text) {
        const ExperimentConfig cfg = parse_config(json_text);
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run_experiment(cfg);
        }
        py::dict d;
        d["experiment_id"] = out.experiment_id;
        d["algorithm"] = out.algorithm;
        d["trace_path"] = out.trace_path;
        d["termination"] = out.termination;
        d["ok"] = out.ok;
        d["diagnostic"] = out.diagnostic;
        d["certified_index"] = out.certified_index;
        d["total_evaluations"] = out.total_evaluations;
        d["min_stationarity_proxy"] = out.min_stationarity_proxy;
        return d;
      },
      py::arg("json_text"), "Runs one experiment described by a JSON config string.");
}
