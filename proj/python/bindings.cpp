#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/operators.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "secinv/admm.hpp"
#include "secinv/centralized.hpp"
#include "secinv/model.hpp"
#include "secinv/projection.hpp"
#include "secinv/scenario_io.hpp"
#include "secinv/sweep.hpp"
#include "secinv/waterfill.hpp"

namespace py = pybind11;
using namespace secinv;

namespace {

std::vector<double> to_list(std::span<const double> values) {
  return {values.begin(), values.end()};
}

TransportNetwork make_network(std::vector<TargetSpec> targets, std::vector<SourceSpec> sources,
                              std::optional<std::vector<TransportNetwork::EdgeKey>> edges) {
  if (!edges) return TransportNetwork::complete(std::move(targets), std::move(sources));
  return {std::move(targets), std::move(sources), std::move(*edges)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Security resource allocation solvers";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", error);
  py::register_exception<PlanMismatchError>(m, "PlanMismatchError", error);
  py::register_exception<PreconditionError>(m, "PreconditionError", error);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", error);
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", error);
  py::register_exception<MissingMessageError>(m, "MissingMessageError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<SweepError>(m, "SweepError", error);

  py::enum_<ProbabilityFamily>(m, "ProbabilityFamily")
      .value("exponential", ProbabilityFamily::exponential)
      .value("reciprocal", ProbabilityFamily::reciprocal);
  py::enum_<ProblemMode>(m, "ProblemMode")
      .value("op_a", ProblemMode::op_a)
      .value("op_b", ProblemMode::op_b);

  py::class_<AttackProbabilityModel>(m, "AttackProbabilityModel")
      .def_static("exponential", &AttackProbabilityModel::exponential, py::arg("baseline"))
      .def_static("reciprocal", &AttackProbabilityModel::reciprocal, py::arg("baseline"))
      .def_property_readonly("family", &AttackProbabilityModel::family)
      .def_property_readonly("baseline", &AttackProbabilityModel::baseline)
      .def("probability", &AttackProbabilityModel::probability, py::arg("total"))
      .def(py::self == py::self);

  py::class_<BehavioralModel>(m, "BehavioralModel")
      .def(py::init<double>(), py::arg("gamma"))
      .def_property_readonly("gamma", &BehavioralModel::gamma);

  py::class_<TargetSpec>(m, "TargetSpec")
      .def(py::init([](std::string id, double loss, AttackProbabilityModel model, double lower,
                       double upper) {
             TargetSpec t{std::move(id), loss, model, lower, upper};
             validate(t);
             return t;
           }),
           py::arg("id"), py::arg("loss"),
           py::arg("model") = AttackProbabilityModel::exponential(1.0),
           py::arg("demand_lower") = 0.0, py::arg("demand_upper") = kInfinity)
      .def_readonly("id", &TargetSpec::id)
      .def_readonly("loss", &TargetSpec::loss_value)
      .def_readonly("model", &TargetSpec::prob_model)
      .def_readonly("demand_lower", &TargetSpec::demand_lower)
      .def_readonly("demand_upper", &TargetSpec::demand_upper);

  py::class_<SourceSpec>(m, "SourceSpec")
      .def(py::init([](std::string id, double upper, double lower, double tau, double slope,
                       std::map<std::string, double> slopes) {
             SourceSpec s;
             s.id = std::move(id);
             s.supply_upper = upper;
             s.supply_lower = lower;
             s.weight_tau = tau;
             s.default_utility_slope = slope;
             s.utility_slopes = std::move(slopes);
             validate(s);
             return s;
           }),
           py::arg("id"), py::arg("supply_upper"), py::arg("supply_lower") = 0.0,
           py::arg("tau") = 0.0, py::arg("utility_slope") = 1.0,
           py::arg("utility_slopes") = std::map<std::string, double>{})
      .def_readonly("id", &SourceSpec::id)
      .def_readonly("supply_lower", &SourceSpec::supply_lower)
      .def_readonly("supply_upper", &SourceSpec::supply_upper)
      .def_readonly("tau", &SourceSpec::weight_tau);

  py::class_<TransportNetwork>(m, "TransportNetwork")
      .def(py::init(&make_network), py::arg("targets"), py::arg("sources"),
           py::arg("edges") = py::none(),
           "Omit edges for a complete network; otherwise give (target id, source id) pairs.")
      .def_property_readonly("targets", &TransportNetwork::targets)
      .def_property_readonly("sources", &TransportNetwork::sources)
      .def_property_readonly("edges", &TransportNetwork::edge_keys)
      .def_property_readonly("is_complete", &TransportNetwork::is_complete)
      .def("with_uniform_tau", &TransportNetwork::with_uniform_tau, py::arg("tau"));

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &TraceRecord::iteration)
      .def_readonly("primal_residual", &TraceRecord::primal_residual)
      .def_readonly("perceived_loss", &TraceRecord::perceived_loss)
      .def_readonly("objective", &TraceRecord::objective);

  py::class_<SolveReport>(m, "SolveReport")
      .def_property_readonly("plan", [](const SolveReport& r) { return to_list(r.plan.amounts()); })
      .def_readonly("true_loss", &SolveReport::true_loss)
      .def_readonly("perceived_loss", &SolveReport::perceived_loss)
      .def_readonly("source_utility", &SolveReport::source_utility)
      .def_readonly("objective", &SolveReport::objective)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("trace", &SolveReport::residual_trace);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("step_size", &SolverConfig::step_size)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("gradient_tolerance", &SolverConfig::gradient_tolerance)
      .def_readwrite("objective_tolerance", &SolverConfig::objective_tolerance);

  py::class_<AdmmConfig>(m, "AdmmConfig")
      .def(py::init<>())
      .def_readwrite("eta", &AdmmConfig::eta)
      .def_readwrite("max_iterations", &AdmmConfig::max_iterations)
      .def_readwrite("primal_tolerance", &AdmmConfig::primal_tolerance)
      .def_readwrite("dual_tolerance", &AdmmConfig::dual_tolerance);

  py::class_<WaterfillTrace>(m, "WaterfillTrace")
      .def_readonly("activation_ids", &WaterfillTrace::activation_ids)
      .def_readonly("breakpoints", &WaterfillTrace::breakpoints)
      .def_readonly("aggregates", &WaterfillTrace::final_aggregates)
      .def_readonly("budget", &WaterfillTrace::budget)
      .def_readonly("water_level", &WaterfillTrace::water_level)
      .def_property_readonly("plan", [](const WaterfillTrace& t) {
        return to_list(t.per_source_plan.amounts());
      });

  py::class_<ScenarioFile>(m, "Scenario")
      .def_property_readonly("network", &ScenarioFile::network)
      .def_property_readonly("behavior", &ScenarioFile::behavior)
      .def_readonly("mode", &ScenarioFile::mode)
      .def_readonly("solver", &ScenarioFile::solver)
      .def_readonly("admm", &ScenarioFile::admm)
      .def(py::self == py::self);

  py::class_<SweepSample>(m, "SweepSample")
      .def_readonly("param", &SweepSample::param)
      .def_readonly("aggregates", &SweepSample::aggregates)
      .def_readonly("true_loss", &SweepSample::true_loss)
      .def_readonly("perceived_loss", &SweepSample::perceived_loss)
      .def_readonly("active_targets", &SweepSample::active_targets);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("axis", &SweepResult::axis)
      .def_readonly("samples", &SweepResult::samples)
      .def("to_csv", [](const SweepResult& r) {
        std::ostringstream out;
        write_sweep_csv(r, out);
        return out.str();
      });

  m.def("prelec_weight", &prelec_weight, py::arg("p"), py::arg("gamma"));
  m.def("target_aggregates",
        [](const TransportNetwork& n, const std::vector<double>& plan) {
          return target_aggregates(n, plan);
        },
        py::arg("network"), py::arg("plan"));
  m.def("project_bounded_simplex",
        [](std::vector<double> values, double lower, double upper) {
          project_bounded_simplex(values, lower, upper);
          return values;
        },
        py::arg("values"), py::arg("lower"), py::arg("upper"));

  m.def("solve", &solve, py::arg("network"), py::arg("behavior"),
        py::arg("mode") = ProblemMode::op_a, py::arg("config") = SolverConfig{});
  m.def("solve_op_a", &solve_op_a, py::arg("network"), py::arg("behavior"),
        py::arg("config") = SolverConfig{});
  m.def("solve_op_b", &solve_op_b, py::arg("network"), py::arg("behavior"),
        py::arg("config") = SolverConfig{});
  m.def("run_admm", &run_admm, py::arg("network"), py::arg("behavior"),
        py::arg("config") = AdmmConfig{});

  m.def("waterfill_allocate", &waterfill_allocate, py::arg("network"), py::arg("behavior"));
  m.def("active_target_count", &active_target_count, py::arg("network"), py::arg("behavior"));
  m.def("threshold", &threshold, py::arg("higher"), py::arg("lower"), py::arg("behavior"));
  m.def("gamma_sensitivity", &gamma_sensitivity, py::arg("higher"), py::arg("lower"),
        py::arg("behavior"));

  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); },
        py::arg("text"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("write_scenario", &write_scenario, py::arg("scenario"));
  m.def("case_study", &case_study_scenario);

  m.def("linear_grid", &linear_grid, py::arg("start"), py::arg("stop"), py::arg("steps"));
  m.def("sweep_gamma",
        [](const TransportNetwork& n, const std::vector<double>& grid, std::size_t jobs) {
          return sweep_gamma(n, grid, {SolverConfig{}, jobs});
        },
        py::arg("network"), py::arg("grid"), py::arg("jobs") = 1);
  m.def("sweep_tau",
        [](const TransportNetwork& n, const BehavioralModel& b, const std::vector<double>& grid,
           std::size_t jobs) { return sweep_tau(n, b, grid, {SolverConfig{}, jobs}); },
        py::arg("network"), py::arg("behavior"), py::arg("grid"), py::arg("jobs") = 1);
}
