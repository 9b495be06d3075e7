#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "secinv/model.hpp"

namespace secinv {

struct AdmmConfig {
  double eta = 1.0;
  std::size_t max_iterations = 5000;
  double primal_tolerance = 1e-6;
  double dual_tolerance = 1e-6;

  void validate() const;

  bool operator==(const AdmmConfig&) const = default;
};

/// Per-edge negotiation state.
struct EdgeState {
  double consensus = 0.0;
  double dual = 0.0;
  double target_proposal = 0.0;
  double source_proposal = 0.0;

  bool operator==(const EdgeState&) const = default;
};

/// Consensus becomes the mean of the two proposals.
EdgeState consensus_update(EdgeState edge);

/// dual += (eta / 2) * (target_proposal - source_proposal)
EdgeState dual_update(EdgeState edge, double eta);

/// A target node. It knows its own spec and the planner's behavior, plus the
/// (consensus, dual) pair last broadcast on each incident edge. Nothing about
/// other targets or any source is visible to it.
class TargetAgent {
 public:
  TargetAgent(TargetSpec spec, BehavioralModel behavior, std::vector<std::size_t> edges);

  const TargetSpec& spec() const noexcept { return spec_; }
  const BehavioralModel& behavior() const noexcept { return behavior_; }
  std::span<const std::size_t> edges() const noexcept { return edges_; }
  std::span<const double> local_plan() const noexcept { return local_plan_; }
  std::span<const double> consensus_view() const noexcept { return consensus_; }
  std::span<const double> dual_view() const noexcept { return duals_; }

  void set_local_plan(std::vector<double> plan);
  void receive(std::size_t slot, double consensus, double dual);

  /// Solves the local subproblem against the last broadcast state and keeps
  /// the result as the new proposal.
  void propose(double eta);

 private:
  TargetSpec spec_;
  BehavioralModel behavior_;
  std::vector<std::size_t> edges_;
  std::vector<double> local_plan_;
  std::vector<double> consensus_;
  std::vector<double> duals_;
};

/// A source node: its own bounds, tau and per-edge utility slopes only.
class SourceAgent {
 public:
  SourceAgent(SourceSpec spec, std::vector<double> slopes, std::vector<std::size_t> edges);

  const SourceSpec& spec() const noexcept { return spec_; }
  std::span<const double> slopes() const noexcept { return slopes_; }
  std::span<const std::size_t> edges() const noexcept { return edges_; }
  std::span<const double> local_plan() const noexcept { return local_plan_; }
  std::span<const double> consensus_view() const noexcept { return consensus_; }
  std::span<const double> dual_view() const noexcept { return duals_; }

  void set_local_plan(std::vector<double> plan);
  void receive(std::size_t slot, double consensus, double dual);
  void propose(double eta);

 private:
  SourceSpec spec_;
  std::vector<double> slopes_;
  std::vector<std::size_t> edges_;
  std::vector<double> local_plan_;
  std::vector<double> consensus_;
  std::vector<double> duals_;
};

/// argmin over the target's feasible set of
///   U w(p(sum pi)) + sum alpha pi + (eta/2) sum (pi - consensus)^2,
/// by projected gradient warm-started from the agent's current local plan.
std::vector<double> target_subproblem(const TargetAgent& agent, std::span<const double> duals,
                                      std::span<const double> consensus, double eta);

/// argmin over the source's feasible set of
///   -sum tau c pi - sum alpha pi + (eta/2) sum (consensus - pi)^2,
/// i.e. the projection of consensus + (tau c + alpha) / eta.
std::vector<double> source_subproblem(const SourceAgent& agent, std::span<const double> duals,
                                      std::span<const double> consensus, double eta);

/// Per-edge mailbox for one round: each slot takes exactly one proposal from
/// the target side and one from the source side.
class MessageBus {
 public:
  explicit MessageBus(std::size_t edge_count);

  void post_from_target(std::size_t edge, double amount);
  void post_from_source(std::size_t edge, double amount);

  /// Applies the consensus and dual updates to every edge and clears the
  /// mailboxes. Throws MissingMessageError if any slot is empty.
  void settle(std::span<EdgeState> edges, double eta);

 private:
  std::vector<std::optional<double>> from_target_;
  std::vector<std::optional<double>> from_source_;
};

/// Delivers every agent's current proposal, settles the edges, then
/// broadcasts (consensus, dual) back to both endpoints.
void message_bus_round(std::span<TargetAgent> targets, std::span<SourceAgent> sources,
                       std::span<EdgeState> edges, double eta);

/// Distributed solve of the utility-weighted problem: agents alternate local
/// solves with consensus and dual updates until max |pi_t - pi_s| and the
/// largest consensus change fall within tolerance. The trace rows carry the
/// primal residual, perceived loss and objective of the consensus plan.
SolveReport run_admm(const TransportNetwork& network, const BehavioralModel& behavior,
                     const AdmmConfig& config = {});

}  // namespace secinv
