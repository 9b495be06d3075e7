#include "secinv/admm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "secinv/centralized.hpp"
#include "secinv/projected_gradient.hpp"
#include "secinv/projection.hpp"

namespace secinv {

namespace {

constexpr double kInnerStationarity = 1e-9;
constexpr std::size_t kInnerMaxIterations = 20000;

void require_size(std::span<const double> values, std::size_t expected, const char* what) {
  if (values.size() != expected) {
    throw InvalidInputError(
        fmt::format("{} has {} entries but the agent has {} edges", what, values.size(), expected));
  }
}

void require_eta(double eta) {
  if (!(eta > 0.0)) throw InvalidInputError(fmt::format("eta must be > 0, got {}", eta));
}

}  // namespace

void AdmmConfig::validate() const {
  require_eta(eta);
  if (max_iterations < 1) throw InvalidInputError("max_iterations must be >= 1");
  if (!(primal_tolerance > 0.0)) throw InvalidInputError("primal_tolerance must be > 0");
  if (!(dual_tolerance > 0.0)) throw InvalidInputError("dual_tolerance must be > 0");
}

EdgeState consensus_update(EdgeState edge) {
  edge.consensus = 0.5 * (edge.target_proposal + edge.source_proposal);
  return edge;
}

EdgeState dual_update(EdgeState edge, double eta) {
  edge.dual += 0.5 * eta * (edge.target_proposal - edge.source_proposal);
  return edge;
}

TargetAgent::TargetAgent(TargetSpec spec, BehavioralModel behavior,
                         std::vector<std::size_t> edges)
    : spec_(std::move(spec)),
      behavior_(behavior),
      edges_(std::move(edges)),
      local_plan_(edges_.size(), 0.0),
      consensus_(edges_.size(), 0.0),
      duals_(edges_.size(), 0.0) {
  validate(spec_);
}

void TargetAgent::set_local_plan(std::vector<double> plan) {
  require_size(plan, edges_.size(), "local plan");
  local_plan_ = std::move(plan);
}

void TargetAgent::receive(std::size_t slot, double consensus, double dual) {
  consensus_.at(slot) = consensus;
  duals_.at(slot) = dual;
}

void TargetAgent::propose(double eta) {
  local_plan_ = target_subproblem(*this, duals_, consensus_, eta);
}

SourceAgent::SourceAgent(SourceSpec spec, std::vector<double> slopes,
                         std::vector<std::size_t> edges)
    : spec_(std::move(spec)),
      slopes_(std::move(slopes)),
      edges_(std::move(edges)),
      local_plan_(edges_.size(), 0.0),
      consensus_(edges_.size(), 0.0),
      duals_(edges_.size(), 0.0) {
  validate(spec_);
  require_size(slopes_, edges_.size(), "utility slopes");
}

void SourceAgent::set_local_plan(std::vector<double> plan) {
  require_size(plan, edges_.size(), "local plan");
  local_plan_ = std::move(plan);
}

void SourceAgent::receive(std::size_t slot, double consensus, double dual) {
  consensus_.at(slot) = consensus;
  duals_.at(slot) = dual;
}

void SourceAgent::propose(double eta) {
  local_plan_ = source_subproblem(*this, duals_, consensus_, eta);
}

std::vector<double> target_subproblem(const TargetAgent& agent, std::span<const double> duals,
                                      std::span<const double> consensus, double eta) {
  require_eta(eta);
  const std::size_t n = agent.edges().size();
  require_size(duals, n, "duals");
  require_size(consensus, n, "consensus");
  const auto& spec = agent.spec();
  const auto& behavior = agent.behavior();

  auto total = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  ProjectedProblem problem{
      [&](std::span<const double> x) {
        double f = perceived_target_cost(spec, behavior, total(x));
        for (std::size_t i = 0; i < n; ++i) {
          const double d = x[i] - consensus[i];
          f += duals[i] * x[i] + 0.5 * eta * d * d;
        }
        return f;
      },
      [&](std::span<const double> x, std::span<double> g) {
        const double m = marginal_perceived_cost(spec, behavior, total(x));
        for (std::size_t i = 0; i < n; ++i) g[i] = m + duals[i] + eta * (x[i] - consensus[i]);
      },
      [&](std::span<double> x) { project_bounded_simplex(x, spec.demand_lower, spec.demand_upper); },
  };

  std::vector<double> start(agent.local_plan().begin(), agent.local_plan().end());
  problem.project(start);

  ProjectedGradientOptions options;
  options.step_size = 1.0 / eta;
  options.max_iterations = kInnerMaxIterations;
  options.stationarity_tolerance = kInnerStationarity;
  options.objective_tolerance = 0.0;
  auto result = minimize_projected_gradient(problem, std::move(start), options);
  if (!result.converged) {
    throw NonConvergenceError(
        fmt::format("target '{}' subproblem did not converge (stationarity {})", spec.id,
                    result.stationarity),
        {});
  }
  return std::move(result.x);
}

std::vector<double> source_subproblem(const SourceAgent& agent, std::span<const double> duals,
                                      std::span<const double> consensus, double eta) {
  require_eta(eta);
  const std::size_t n = agent.edges().size();
  require_size(duals, n, "duals");
  require_size(consensus, n, "consensus");
  const auto& spec = agent.spec();
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    shifted[i] = consensus[i] + (spec.weight_tau * agent.slopes()[i] + duals[i]) / eta;
  }
  project_bounded_simplex(shifted, spec.supply_lower, spec.supply_upper);
  return shifted;
}

MessageBus::MessageBus(std::size_t edge_count)
    : from_target_(edge_count), from_source_(edge_count) {}

void MessageBus::post_from_target(std::size_t edge, double amount) {
  auto& slot = from_target_.at(edge);
  if (slot) throw InvalidInputError(fmt::format("edge {} already has a target proposal", edge));
  slot = amount;
}

void MessageBus::post_from_source(std::size_t edge, double amount) {
  auto& slot = from_source_.at(edge);
  if (slot) throw InvalidInputError(fmt::format("edge {} already has a source proposal", edge));
  slot = amount;
}

void MessageBus::settle(std::span<EdgeState> edges, double eta) {
  if (edges.size() != from_target_.size()) {
    throw InvalidInputError(fmt::format("bus has {} mailboxes but {} edge states were given",
                                        from_target_.size(), edges.size()));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!from_target_[e]) {
      throw MissingMessageError(fmt::format("edge {} is missing its target proposal", e));
    }
    if (!from_source_[e]) {
      throw MissingMessageError(fmt::format("edge {} is missing its source proposal", e));
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    EdgeState next = edges[e];
    next.target_proposal = *from_target_[e];
    next.source_proposal = *from_source_[e];
    edges[e] = dual_update(consensus_update(next), eta);
    from_target_[e].reset();
    from_source_[e].reset();
  }
}

void message_bus_round(std::span<TargetAgent> targets, std::span<SourceAgent> sources,
                       std::span<EdgeState> edges, double eta) {
  MessageBus bus(edges.size());
  for (const auto& agent : targets) {
    for (std::size_t k = 0; k < agent.edges().size(); ++k) {
      bus.post_from_target(agent.edges()[k], agent.local_plan()[k]);
    }
  }
  for (const auto& agent : sources) {
    for (std::size_t k = 0; k < agent.edges().size(); ++k) {
      bus.post_from_source(agent.edges()[k], agent.local_plan()[k]);
    }
  }
  bus.settle(edges, eta);
  for (auto& agent : targets) {
    for (std::size_t k = 0; k < agent.edges().size(); ++k) {
      const auto& e = edges[agent.edges()[k]];
      agent.receive(k, e.consensus, e.dual);
    }
  }
  for (auto& agent : sources) {
    for (std::size_t k = 0; k < agent.edges().size(); ++k) {
      const auto& e = edges[agent.edges()[k]];
      agent.receive(k, e.consensus, e.dual);
    }
  }
}

SolveReport run_admm(const TransportNetwork& network, const BehavioralModel& behavior,
                     const AdmmConfig& config) {
  config.validate();
  // Surfaces infeasible bound structures before any negotiation starts.
  project_feasible(AllocationPlan::zeros(network).amounts(), network, ProblemMode::op_b);

  const std::size_t m = network.edge_count();
  std::vector<EdgeState> edges(m);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [x, y] = network.edges()[e];
    const auto& t = network.targets()[x];
    const auto& s = network.sources()[y];
    edges[e].consensus =
        std::max(t.demand_lower / static_cast<double>(network.target_edges(x).size()),
                 s.supply_lower / static_cast<double>(network.source_edges(y).size()));
  }

  std::vector<TargetAgent> targets;
  for (std::size_t x = 0; x < network.target_count(); ++x) {
    auto incident = network.target_edges(x);
    targets.emplace_back(network.targets()[x], behavior,
                         std::vector<std::size_t>(incident.begin(), incident.end()));
  }
  std::vector<SourceAgent> sources;
  for (std::size_t y = 0; y < network.source_count(); ++y) {
    auto incident = network.source_edges(y);
    std::vector<double> slopes;
    for (std::size_t e : incident) slopes.push_back(network.utility_slope(e));
    sources.emplace_back(network.sources()[y], std::move(slopes),
                         std::vector<std::size_t>(incident.begin(), incident.end()));
  }
  auto broadcast = [&](auto& agents) {
    for (auto& agent : agents) {
      std::vector<double> start;
      for (std::size_t k = 0; k < agent.edges().size(); ++k) {
        const auto& e = edges[agent.edges()[k]];
        agent.receive(k, e.consensus, e.dual);
        start.push_back(e.consensus);
      }
      agent.set_local_plan(std::move(start));
    }
  };
  broadcast(targets);
  broadcast(sources);

  SolveReport report;
  std::vector<double> consensus(m), previous(m);
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    for (std::size_t e = 0; e < m; ++e) previous[e] = edges[e].consensus;
    for (auto& agent : targets) agent.propose(config.eta);
    for (auto& agent : sources) agent.propose(config.eta);
    message_bus_round(targets, sources, edges, config.eta);

    double primal = 0.0;
    double dual = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      consensus[e] = edges[e].consensus;
      primal = std::max(primal, std::abs(edges[e].target_proposal - edges[e].source_proposal));
      dual = std::max(dual, std::abs(consensus[e] - previous[e]));
    }
    const double perceived = objective_value(network, behavior, consensus, ProblemMode::op_a);
    const double objective = objective_value(network, behavior, consensus, ProblemMode::op_b);
    report.residual_trace.push_back({k, primal, perceived, objective});
    report.iterations = k;
    if (primal <= config.primal_tolerance && dual <= config.dual_tolerance) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    auto message = fmt::format("ADMM did not converge in {} iterations (primal residual {})",
                               config.max_iterations,
                               report.residual_trace.back().primal_residual);
    throw NonConvergenceError(std::move(message), std::move(report.residual_trace));
  }
  report.plan = AllocationPlan(consensus);
  evaluate_report(report, network, behavior, ProblemMode::op_b);
  return report;
}

}  // namespace secinv
