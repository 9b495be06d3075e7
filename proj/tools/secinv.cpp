#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "secinv/commands.hpp"

namespace {

void add_solver_flags(CLI::App* cmd, secinv::SolverOverrides& o) {
  cmd->add_option("--step-size", o.step_size, "Initial projected-gradient step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iterations", o.max_iterations, "Centralized iteration cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gradient-tol", o.gradient_tolerance, "Stationarity tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--objective-tol", o.objective_tolerance, "Objective stall tolerance")
      ->check(CLI::PositiveNumber);
}

void add_grid_flags(CLI::App* cmd, secinv::GridSpec& grid) {
  cmd->add_option("--start", grid.start, "First grid value")->capture_default_str();
  cmd->add_option("--stop", grid.stop, "Last grid value")->capture_default_str();
  cmd->add_option("--steps", grid.steps, "Number of grid points (>= 2)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security resource allocation over source/target networks"};
  app.require_subcommand(1);

  std::string scenario;
  std::string output;
  std::string mode;
  std::optional<double> gamma;
  std::size_t jobs = 1;
  secinv::SolverOverrides overrides;
  secinv::GridSpec gamma_grid{0.3, 1.0, 25};
  secinv::GridSpec tau_grid{0.0, 1.0, 25};

  auto* solve = app.add_subcommand("solve", "Centralized solve of one scenario");
  solve->add_option("scenario", scenario, "Scenario file")->required();
  solve->add_option("-o,--output", output, "Output directory")->required();
  solve->add_option("--mode", mode, "op_a or op_b (default: the scenario's)")
      ->check(CLI::IsMember({"op_a", "op_b"}));
  add_solver_flags(solve, overrides);

  auto* waterfill = app.add_subcommand("waterfill", "Analytical water-filling report");
  waterfill->add_option("scenario", scenario, "Scenario file")->required();
  waterfill->add_option("-o,--output", output, "Output directory")->required();

  auto* admm = app.add_subcommand("admm", "Distributed ADMM solve with trace export");
  admm->add_option("scenario", scenario, "Scenario file")->required();
  admm->add_option("-o,--output", output, "Output directory")->required();
  admm->add_option("--eta", overrides.eta, "Penalty parameter")->check(CLI::PositiveNumber);
  admm->add_option("--admm-max-iterations", overrides.admm_max_iterations, "ADMM iteration cap")
      ->check(CLI::PositiveNumber);
  admm->add_option("--primal-tol", overrides.primal_tolerance, "Primal residual tolerance")
      ->check(CLI::PositiveNumber);
  admm->add_option("--dual-tol", overrides.dual_tolerance, "Consensus change tolerance")
      ->check(CLI::PositiveNumber);
  add_solver_flags(admm, overrides);

  auto* sweep_gamma = app.add_subcommand("sweep-gamma", "OP-A solves over a gamma grid");
  sweep_gamma->add_option("scenario", scenario, "Scenario file")->required();
  sweep_gamma->add_option("-o,--output", output, "Output CSV file")->required();
  sweep_gamma->add_option("--jobs", jobs, "Concurrent solves")->check(CLI::PositiveNumber);
  add_grid_flags(sweep_gamma, gamma_grid);
  add_solver_flags(sweep_gamma, overrides);

  auto* sweep_tau = app.add_subcommand("sweep-tau", "OP-B solves over a tau grid");
  sweep_tau->add_option("scenario", scenario, "Scenario file")->required();
  sweep_tau->add_option("-o,--output", output, "Output CSV file")->required();
  sweep_tau->add_option("--gamma", gamma, "Behavioral gamma (default: the scenario's)");
  sweep_tau->add_option("--jobs", jobs, "Concurrent solves")->check(CLI::PositiveNumber);
  add_grid_flags(sweep_tau, tau_grid);
  add_solver_flags(sweep_tau, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : secinv::kExitUsage;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (solve->parsed()) {
    std::optional<secinv::ProblemMode> chosen;
    if (mode == "op_a") chosen = secinv::ProblemMode::op_a;
    if (mode == "op_b") chosen = secinv::ProblemMode::op_b;
    return secinv::cmd_solve(scenario, chosen, output, overrides, out, err);
  }
  if (waterfill->parsed()) return secinv::cmd_waterfill(scenario, output, out, err);
  if (admm->parsed()) return secinv::cmd_admm(scenario, output, overrides, out, err);
  if (sweep_gamma->parsed()) {
    return secinv::cmd_sweep_gamma(scenario, gamma_grid, output, overrides, jobs, out, err);
  }
  return secinv::cmd_sweep_tau(scenario, tau_grid, gamma, output, overrides, jobs, out, err);
}
