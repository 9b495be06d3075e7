#pragma once

#include <cstddef>
#include <span>

#include "secinv/model.hpp"

namespace secinv {

/// op_a: minimize perceived loss subject to source capacities only.
/// op_b: perceived loss minus weighted source utility, with target demand
///       bounds and source supply bounds.
enum class ProblemMode { op_a, op_b };

const char* to_string(ProblemMode mode) noexcept;

struct SolverConfig {
  double step_size = 1.0;
  std::size_t max_iterations = 200000;
  double gradient_tolerance = 1e-7;
  double objective_tolerance = 1e-10;

  void validate() const;

  bool operator==(const SolverConfig&) const = default;
};

SolveReport solve_op_a(const TransportNetwork& network, const BehavioralModel& behavior,
                       const SolverConfig& config = {});
SolveReport solve_op_b(const TransportNetwork& network, const BehavioralModel& behavior,
                       const SolverConfig& config = {});
SolveReport solve(const TransportNetwork& network, const BehavioralModel& behavior,
                  ProblemMode mode, const SolverConfig& config = {});

/// Euclidean projection onto the feasible set of `mode`. op_a is exact per
/// source; op_b alternates target and source projections (Dykstra) until the
/// constraint violation is below 1e-9.
AllocationPlan project_feasible(std::span<const double> raw, const TransportNetwork& network,
                                ProblemMode mode);

/// Norm of the unit-step projected gradient of the mode's objective. Zero
/// exactly at optimal plans.
double kkt_residual(const TransportNetwork& network, const BehavioralModel& behavior,
                    const AllocationPlan& plan, ProblemMode mode);

/// Largest violation of the mode's constraints (bounds and nonnegativity).
double constraint_violation(const TransportNetwork& network, std::span<const double> amounts,
                            ProblemMode mode);

/// Objective of `mode` at a plan: perceived loss, minus the source utility for op_b.
double objective_value(const TransportNetwork& network, const BehavioralModel& behavior,
                       std::span<const double> amounts, ProblemMode mode);

/// Fills the report's loss fields from its plan.
void evaluate_report(SolveReport& report, const TransportNetwork& network,
                     const BehavioralModel& behavior, ProblemMode mode);

}  // namespace secinv
