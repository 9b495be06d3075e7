#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "secinv/centralized.hpp"

namespace secinv {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitPrecondition = 3,
  kExitInfeasible = 4,
  kExitNonConvergence = 5,
  kExitIo = 6,
};

/// Command-line values that replace the scenario's solver settings.
struct SolverOverrides {
  std::optional<double> step_size;
  std::optional<std::size_t> max_iterations;
  std::optional<double> gradient_tolerance;
  std::optional<double> objective_tolerance;
  std::optional<double> eta;
  std::optional<std::size_t> admm_max_iterations;
  std::optional<double> primal_tolerance;
  std::optional<double> dual_tolerance;
};

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  std::size_t steps = 25;
};

/// Every command writes its files, prints a summary to `out` and diagnostics
/// to `err`, and returns an ExitCode.

/// Writes report.txt, plan.csv and trace.csv into `output_dir`.
int cmd_solve(const std::filesystem::path& scenario, std::optional<ProblemMode> mode,
              const std::filesystem::path& output_dir, const SolverOverrides& overrides,
              std::ostream& out, std::ostream& err);

/// Writes waterfill.txt and plan.csv into `output_dir`.
int cmd_waterfill(const std::filesystem::path& scenario, const std::filesystem::path& output_dir,
                  std::ostream& out, std::ostream& err);

/// Writes report.txt (with the gap to the centralized solve), plan.csv and
/// trace.csv into `output_dir`. On non-convergence only trace.csv is written.
int cmd_admm(const std::filesystem::path& scenario, const std::filesystem::path& output_dir,
             const SolverOverrides& overrides, std::ostream& out, std::ostream& err);

int cmd_sweep_gamma(const std::filesystem::path& scenario, const GridSpec& grid,
                    const std::filesystem::path& output_csv, const SolverOverrides& overrides,
                    std::size_t jobs, std::ostream& out, std::ostream& err);

/// `gamma` replaces the scenario's value when given.
int cmd_sweep_tau(const std::filesystem::path& scenario, const GridSpec& grid,
                  std::optional<double> gamma, const std::filesystem::path& output_csv,
                  const SolverOverrides& overrides, std::size_t jobs, std::ostream& out,
                  std::ostream& err);

}  // namespace secinv
