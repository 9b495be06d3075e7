#include "secinv/centralized.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "secinv/projected_gradient.hpp"
#include "secinv/projection.hpp"

namespace secinv {

namespace {

constexpr double kDykstraTolerance = 1e-9;
constexpr double kDykstraStallTolerance = 1e-6;
constexpr std::size_t kDykstraMaxCycles = 20000;

bool target_bounds_inactive(const TransportNetwork& network) {
  return std::all_of(network.targets().begin(), network.targets().end(), [](const TargetSpec& t) {
    return t.demand_lower == 0.0 && std::isinf(t.demand_upper);
  });
}

void project_node_groups(std::span<double> amounts, const TransportNetwork& network,
                         bool targets, bool use_lower) {
  std::vector<double> local;
  const std::size_t groups = targets ? network.target_count() : network.source_count();
  for (std::size_t node = 0; node < groups; ++node) {
    auto edges = targets ? network.target_edges(node) : network.source_edges(node);
    double lower = 0.0;
    double upper = 0.0;
    if (targets) {
      const auto& t = network.targets()[node];
      lower = t.demand_lower;
      upper = t.demand_upper;
    } else {
      const auto& s = network.sources()[node];
      lower = use_lower ? s.supply_lower : 0.0;
      upper = s.supply_upper;
    }
    local.resize(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) local[k] = amounts[edges[k]];
    project_bounded_simplex(local, lower, upper);
    for (std::size_t k = 0; k < edges.size(); ++k) amounts[edges[k]] = local[k];
  }
}

double group_violation(std::span<const double> amounts, std::span<const std::size_t> edges,
                       double lower, double upper) {
  double sum = 0.0;
  for (std::size_t e : edges) sum += amounts[e];
  return std::max({0.0, sum - upper, lower - sum});
}

void check_op_b_bounds(const TransportNetwork& network) {
  double demand_lower = 0.0, demand_upper = 0.0, supply_lower = 0.0, supply_upper = 0.0;
  for (std::size_t x = 0; x < network.target_count(); ++x) {
    const auto& t = network.targets()[x];
    demand_lower += t.demand_lower;
    demand_upper += t.demand_upper;
    double reachable = 0.0;
    for (std::size_t e : network.target_edges(x)) {
      reachable += network.sources()[network.edges()[e].source].supply_upper;
    }
    if (t.demand_lower > reachable) {
      throw InfeasibleError(fmt::format(
          "target '{}' needs at least {} but its sources can supply only {}", t.id,
          t.demand_lower, reachable));
    }
  }
  for (std::size_t y = 0; y < network.source_count(); ++y) {
    const auto& s = network.sources()[y];
    supply_lower += s.supply_lower;
    supply_upper += s.supply_upper;
    double absorbable = 0.0;
    for (std::size_t e : network.source_edges(y)) {
      absorbable += network.targets()[network.edges()[e].target].demand_upper;
    }
    if (s.supply_lower > absorbable) {
      throw InfeasibleError(fmt::format(
          "source '{}' must ship at least {} but its targets accept only {}", s.id,
          s.supply_lower, absorbable));
    }
  }
  if (demand_lower > supply_upper) {
    throw InfeasibleError(fmt::format("total demand lower bound {} exceeds total supply {}",
                                      demand_lower, supply_upper));
  }
  if (supply_lower > demand_upper) {
    throw InfeasibleError(fmt::format(
        "total supply lower bound {} exceeds total demand capacity {}", supply_lower,
        demand_upper));
  }
}

void project_in_place(std::span<double> amounts, const TransportNetwork& network,
                      ProblemMode mode) {
  if (mode == ProblemMode::op_a) {
    project_node_groups(amounts, network, /*targets=*/false, /*use_lower=*/false);
    return;
  }
  if (target_bounds_inactive(network)) {
    project_node_groups(amounts, network, false, true);
    return;
  }
  // Dykstra's alternating projections between the target and source sets.
  const std::size_t n = amounts.size();
  std::vector<double> x(amounts.begin(), amounts.end());
  std::vector<double> y(n), p(n, 0.0), q(n, 0.0), previous(n);
  double violation = 0.0;
  for (std::size_t cycle = 0; cycle < kDykstraMaxCycles; ++cycle) {
    previous = x;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + p[i];
    project_node_groups(y, network, true, true);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = x[i] + p[i] - y[i];
      x[i] = y[i] + q[i];
    }
    project_node_groups(x, network, false, true);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = y[i] + q[i] - x[i];
      change = std::max(change, std::abs(x[i] - previous[i]));
    }
    violation = constraint_violation(network, x, ProblemMode::op_b);
    if (violation < kDykstraTolerance && change < 1e-13) break;
  }
  if (violation > kDykstraStallTolerance) {
    throw InfeasibleError(fmt::format(
        "alternating projection stalled with constraint violation {}; bounds look infeasible",
        violation));
  }
  std::copy(x.begin(), x.end(), amounts.begin());
}

std::vector<double> gradient(const TransportNetwork& network, const BehavioralModel& behavior,
                             std::span<const double> amounts, ProblemMode mode) {
  std::vector<double> g(amounts.size());
  for (std::size_t x = 0; x < network.target_count(); ++x) {
    const double m = marginal_perceived_cost(network.targets()[x], behavior,
                                             aggregate_at_target(network, amounts, x));
    for (std::size_t e : network.target_edges(x)) g[e] = m;
  }
  if (mode == ProblemMode::op_b) {
    for (std::size_t e = 0; e < g.size(); ++e) {
      g[e] -= network.sources()[network.edges()[e].source].weight_tau * network.utility_slope(e);
    }
  }
  return g;
}

ProjectedProblem make_problem(const TransportNetwork& network, const BehavioralModel& behavior,
                              ProblemMode mode) {
  return {
      [&network, &behavior, mode](std::span<const double> x) {
        return objective_value(network, behavior, x, mode);
      },
      [&network, &behavior, mode](std::span<const double> x, std::span<double> out) {
        auto g = gradient(network, behavior, x, mode);
        std::copy(g.begin(), g.end(), out.begin());
      },
      [&network, mode](std::span<double> x) { project_in_place(x, network, mode); },
  };
}

double perceived_from_amounts(const TransportNetwork& network, const BehavioralModel& behavior,
                              std::span<const double> amounts) {
  double loss = 0.0;
  for (std::size_t x = 0; x < network.target_count(); ++x) {
    loss += perceived_target_cost(network.targets()[x], behavior,
                                  aggregate_at_target(network, amounts, x));
  }
  return loss;
}

}  // namespace

const char* to_string(ProblemMode mode) noexcept {
  return mode == ProblemMode::op_a ? "op_a" : "op_b";
}

void SolverConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidInputError("step_size must be > 0");
  if (max_iterations < 1) throw InvalidInputError("max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw InvalidInputError("gradient_tolerance must be > 0");
  if (!(objective_tolerance > 0.0)) throw InvalidInputError("objective_tolerance must be > 0");
}

double constraint_violation(const TransportNetwork& network, std::span<const double> amounts,
                            ProblemMode mode) {
  check_plan(network, amounts);
  double worst = 0.0;
  for (double a : amounts) worst = std::max(worst, -a);
  for (std::size_t y = 0; y < network.source_count(); ++y) {
    const auto& s = network.sources()[y];
    const double lower = mode == ProblemMode::op_b ? s.supply_lower : 0.0;
    worst = std::max(worst, group_violation(amounts, network.source_edges(y), lower,
                                            s.supply_upper));
  }
  if (mode == ProblemMode::op_b) {
    for (std::size_t x = 0; x < network.target_count(); ++x) {
      const auto& t = network.targets()[x];
      worst = std::max(worst, group_violation(amounts, network.target_edges(x), t.demand_lower,
                                              t.demand_upper));
    }
  }
  return worst;
}

double objective_value(const TransportNetwork& network, const BehavioralModel& behavior,
                       std::span<const double> amounts, ProblemMode mode) {
  check_plan(network, amounts);
  double value = perceived_from_amounts(network, behavior, amounts);
  if (mode == ProblemMode::op_b) value -= source_utility(network, amounts);
  return value;
}

AllocationPlan project_feasible(std::span<const double> raw, const TransportNetwork& network,
                                ProblemMode mode) {
  check_plan(network, raw);
  if (mode == ProblemMode::op_b) check_op_b_bounds(network);
  std::vector<double> amounts(raw.begin(), raw.end());
  project_in_place(amounts, network, mode);
  return AllocationPlan(std::move(amounts));
}

double kkt_residual(const TransportNetwork& network, const BehavioralModel& behavior,
                    const AllocationPlan& plan, ProblemMode mode) {
  check_plan(network, plan.amounts());
  return projected_gradient_norm(make_problem(network, behavior, mode), plan.amounts());
}

void evaluate_report(SolveReport& report, const TransportNetwork& network,
                     const BehavioralModel& behavior, ProblemMode mode) {
  report.true_loss = true_loss(network, report.plan);
  report.perceived_loss = perceived_loss(network, report.plan, behavior);
  report.source_utility = source_utility(network, report.plan.amounts());
  report.objective = mode == ProblemMode::op_b ? report.perceived_loss - report.source_utility
                                               : report.perceived_loss;
}

SolveReport solve(const TransportNetwork& network, const BehavioralModel& behavior,
                  ProblemMode mode, const SolverConfig& config) {
  config.validate();
  if (mode == ProblemMode::op_b) check_op_b_bounds(network);

  // Uniform split of each source's capacity over its edges.
  std::vector<double> start(network.edge_count(), 0.0);
  for (std::size_t y = 0; y < network.source_count(); ++y) {
    auto edges = network.source_edges(y);
    const double share = network.sources()[y].supply_upper / static_cast<double>(edges.size());
    for (std::size_t e : edges) start[e] = share;
  }
  project_in_place(start, network, mode);

  ProjectedGradientOptions options;
  options.step_size = config.step_size;
  options.max_iterations = config.max_iterations;
  options.stationarity_tolerance = config.gradient_tolerance;
  options.objective_tolerance = config.objective_tolerance;

  std::vector<TraceRecord> trace;
  auto observer = [&](std::size_t k, double stationarity, double f, std::span<const double> x) {
    const double perceived =
        mode == ProblemMode::op_a ? f : perceived_from_amounts(network, behavior, x);
    trace.push_back({k, stationarity, perceived, f});
  };
  auto result =
      minimize_projected_gradient(make_problem(network, behavior, mode), std::move(start),
                                  options, observer);
  if (!result.converged) {
    throw NonConvergenceError(
        fmt::format("{} solver did not converge in {} iterations (projected gradient norm {})",
                    to_string(mode), config.max_iterations, result.stationarity),
        std::move(trace));
  }

  SolveReport report;
  report.plan = AllocationPlan(std::move(result.x));
  report.iterations = result.iterations;
  report.residual_trace = std::move(trace);
  report.converged = true;
  evaluate_report(report, network, behavior, mode);
  return report;
}

SolveReport solve_op_a(const TransportNetwork& network, const BehavioralModel& behavior,
                       const SolverConfig& config) {
  return solve(network, behavior, ProblemMode::op_a, config);
}

SolveReport solve_op_b(const TransportNetwork& network, const BehavioralModel& behavior,
                       const SolverConfig& config) {
  return solve(network, behavior, ProblemMode::op_b, config);
}

}  // namespace secinv
