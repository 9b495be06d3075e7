#include "secinv/commands.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "secinv/admm.hpp"
#include "secinv/scenario_io.hpp"
#include "secinv/sweep.hpp"
#include "secinv/waterfill.hpp"

namespace secinv {

namespace {

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const ParseError&) {
    return kExitParse;
  } catch (const IoError&) {
    return kExitIo;
  } catch (const PreconditionError&) {
    return kExitPrecondition;
  } catch (const InfeasibleError&) {
    return kExitInfeasible;
  } catch (const NonConvergenceError&) {
    return kExitNonConvergence;
  } catch (const MissingMessageError&) {
    return kExitNonConvergence;
  } catch (const SweepError& e) {
    return exit_code_for(e.cause());
  } catch (...) {
    return kExitUsage;
  }
}

// Runs a command body, mapping library errors to exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(std::current_exception());
  }
}

void apply(const SolverOverrides& o, SolverConfig& solver, AdmmConfig& admm) {
  if (o.step_size) solver.step_size = *o.step_size;
  if (o.max_iterations) solver.max_iterations = *o.max_iterations;
  if (o.gradient_tolerance) solver.gradient_tolerance = *o.gradient_tolerance;
  if (o.objective_tolerance) solver.objective_tolerance = *o.objective_tolerance;
  if (o.eta) admm.eta = *o.eta;
  if (o.admm_max_iterations) admm.max_iterations = *o.admm_max_iterations;
  if (o.primal_tolerance) admm.primal_tolerance = *o.primal_tolerance;
  if (o.dual_tolerance) admm.dual_tolerance = *o.dual_tolerance;
  solver.validate();
  admm.validate();
}

std::string plan_csv(const TransportNetwork& network, const AllocationPlan& plan) {
  std::ostringstream text;
  write_plan_csv(network, plan, text);
  return text.str();
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream text;
  write_trace_csv(trace, text);
  return text.str();
}

std::string aggregate_table(const TransportNetwork& network, std::span<const double> amounts) {
  std::string out = "target aggregates\n";
  const auto totals = target_aggregates(network, amounts);
  for (std::size_t x = 0; x < network.target_count(); ++x) {
    out += fmt::format("  {:<12} {}\n", network.targets()[x].id, format_real(totals[x]));
  }
  return out;
}

std::string loss_lines(const SolveReport& report) {
  return fmt::format(
      "true_loss: {}\nperceived_loss: {}\nsource_utility: {}\nobjective: {}\n",
      format_real(report.true_loss), format_real(report.perceived_loss),
      format_real(report.source_utility), format_real(report.objective));
}

void write_sweep(const SweepResult& result, const std::filesystem::path& output_csv,
                 std::ostream& out) {
  write_sweep_csv(result, output_csv);
  out << fmt::format("wrote {} {} samples to {}\n", result.samples.size(), result.axis,
                     output_csv.string());
}

int run_sweep(std::ostream& out, std::ostream& err, const std::filesystem::path& output_csv,
              const std::function<SweepResult()>& sweep) {
  try {
    write_sweep(sweep(), output_csv, out);
    return kExitOk;
  } catch (const SweepError& e) {
    err << "error: " << e.what() << '\n';
    try {
      write_sweep_csv(e.partial(), output_csv);
      err << fmt::format("note: partial output with {} completed samples written to {}\n",
                         e.partial().samples.size(), output_csv.string());
    } catch (const std::exception& io) {
      err << "error: " << io.what() << '\n';
    }
    return exit_code_for(e.cause());
  }
}

}  // namespace

int cmd_solve(const std::filesystem::path& scenario, std::optional<ProblemMode> mode,
              const std::filesystem::path& output_dir, const SolverOverrides& overrides,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto file = load_scenario(scenario);
    apply(overrides, file.solver, file.admm);
    const auto network = file.network();
    const auto behavior = file.behavior();
    const ProblemMode chosen = mode.value_or(file.mode);

    SolveReport report;
    try {
      report = solve(network, behavior, chosen, file.solver);
    } catch (const NonConvergenceError& e) {
      write_text_file(output_dir / "trace.csv", trace_csv(e.trace()));
      throw;
    }

    std::string text;
    text += fmt::format("mode: {}\n", to_string(chosen));
    text += fmt::format("gamma: {}\n", format_real(behavior.gamma()));
    text += fmt::format("iterations: {}\n", report.iterations);
    text += fmt::format("kkt_residual: {}\n",
                        format_real(kkt_residual(network, behavior, report.plan, chosen)));
    text += loss_lines(report);
    text += '\n' + aggregate_table(network, report.plan.amounts());
    text += "\nplan\n" + plan_csv(network, report.plan);

    write_text_file(output_dir / "report.txt", text);
    write_text_file(output_dir / "plan.csv", plan_csv(network, report.plan));
    write_text_file(output_dir / "trace.csv", trace_csv(report.residual_trace));
    out << fmt::format("{} solved in {} iterations; true loss {}, perceived loss {}\n",
                       to_string(chosen), report.iterations, format_real(report.true_loss),
                       format_real(report.perceived_loss));
    return kExitOk;
  });
}

int cmd_waterfill(const std::filesystem::path& scenario, const std::filesystem::path& output_dir,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto file = load_scenario(scenario);
    const auto network = file.network();
    const auto behavior = file.behavior();
    const auto trace = waterfill_allocate(network, behavior);
    const auto table = threshold_table(network, behavior);
    const auto& targets = network.targets();

    std::string text;
    text += fmt::format("gamma: {}\n", format_real(behavior.gamma()));
    text += fmt::format("budget: {}\n", format_real(trace.budget));
    text += fmt::format("water_level: {}\n", format_real(trace.water_level));
    text += "\nthresholds (resources at higher before lower is funded)\n";
    for (const auto& e : table.entries) {
      text += fmt::format("  {:<12} {:<12} {}\n", targets[e.higher].id, targets[e.lower].id,
                          format_real(e.value));
    }
    text += "\nactivation order and breakpoints\n";
    for (std::size_t a = 0; a < trace.activation_order.size(); ++a) {
      text += fmt::format("  {:<12} {}\n", trace.activation_ids[a],
                          format_real(trace.breakpoints[a]));
    }
    text += "\nfinal aggregates\n";
    for (std::size_t x = 0; x < targets.size(); ++x) {
      text += fmt::format("  {:<12} {}\n", targets[x].id, format_real(trace.final_aggregates[x]));
    }
    text += "\nper-source plan\n" + plan_csv(network, trace.per_source_plan);

    write_text_file(output_dir / "waterfill.txt", text);
    write_text_file(output_dir / "plan.csv", plan_csv(network, trace.per_source_plan));
    std::size_t funded = 0;
    for (double a : trace.final_aggregates) funded += a > 0.0 ? 1 : 0;
    out << fmt::format("water-filling funded {} of {} targets with budget {}\n", funded,
                       targets.size(), format_real(trace.budget));
    return kExitOk;
  });
}

int cmd_admm(const std::filesystem::path& scenario, const std::filesystem::path& output_dir,
             const SolverOverrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto file = load_scenario(scenario);
    apply(overrides, file.solver, file.admm);
    const auto network = file.network();
    const auto behavior = file.behavior();

    SolveReport report;
    try {
      report = run_admm(network, behavior, file.admm);
    } catch (const NonConvergenceError& e) {
      write_text_file(output_dir / "trace.csv", trace_csv(e.trace()));
      err << fmt::format("note: trace of {} iterations written to {}\n", e.trace().size(),
                         (output_dir / "trace.csv").string());
      throw;
    }
    const auto central = solve_op_b(network, behavior, file.solver);
    const double gap = std::abs(report.objective - central.objective) /
                       std::max(std::abs(central.objective), 1e-300);

    std::string text;
    text += fmt::format("gamma: {}\n", format_real(behavior.gamma()));
    text += fmt::format("eta: {}\n", format_real(file.admm.eta));
    text += fmt::format("iterations: {}\n", report.iterations);
    text += fmt::format("final_primal_residual: {}\n",
                        format_real(report.residual_trace.back().primal_residual));
    text += loss_lines(report);
    text += fmt::format("centralized_objective: {}\n", format_real(central.objective));
    text += fmt::format("relative_gap: {}\n", format_real(gap));
    text += '\n' + aggregate_table(network, report.plan.amounts());
    text += "\nplan\n" + plan_csv(network, report.plan);

    write_text_file(output_dir / "report.txt", text);
    write_text_file(output_dir / "plan.csv", plan_csv(network, report.plan));
    write_text_file(output_dir / "trace.csv", trace_csv(report.residual_trace));
    out << fmt::format("ADMM converged in {} iterations; relative gap to centralized {}\n",
                       report.iterations, format_real(gap));
    return kExitOk;
  });
}

int cmd_sweep_gamma(const std::filesystem::path& scenario, const GridSpec& grid,
                    const std::filesystem::path& output_csv, const SolverOverrides& overrides,
                    std::size_t jobs, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto file = load_scenario(scenario);
    apply(overrides, file.solver, file.admm);
    const auto network = file.network();
    const auto points = linear_grid(grid.start, grid.stop, grid.steps);
    return run_sweep(out, err, output_csv, [&] {
      return sweep_gamma(network, points, {file.solver, jobs});
    });
  });
}

int cmd_sweep_tau(const std::filesystem::path& scenario, const GridSpec& grid,
                  std::optional<double> gamma, const std::filesystem::path& output_csv,
                  const SolverOverrides& overrides, std::size_t jobs, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    auto file = load_scenario(scenario);
    apply(overrides, file.solver, file.admm);
    const auto network = file.network();
    const BehavioralModel behavior(gamma.value_or(file.gamma));
    const auto points = linear_grid(grid.start, grid.stop, grid.steps);
    return run_sweep(out, err, output_csv, [&] {
      return sweep_tau(network, behavior, points, {file.solver, jobs});
    });
  });
}

}  // namespace secinv
