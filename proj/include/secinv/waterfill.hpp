#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "secinv/model.hpp"

namespace secinv {

/// Activation thresholds for every ordered target pair of a network.
/// `higher` ranks above `lower` by loss value; both are network indices.
struct ThresholdEntry {
  std::size_t higher = 0;
  std::size_t lower = 0;
  double value = 0.0;
};

struct ThresholdTable {
  std::vector<ThresholdEntry> entries;  // sorted by (rank of higher, rank of lower)

  /// Throws std::out_of_range when the pair is absent.
  double at(std::size_t higher, std::size_t lower) const;
};

/// Result of the sequential water-filling allocation on a complete network.
struct WaterfillTrace {
  std::vector<std::size_t> activation_order;  // network indices, descending loss value
  std::vector<std::string> activation_ids;
  std::vector<double> breakpoints;       // budget at which each target in activation order starts
  std::vector<double> final_aggregates;  // network target order
  double budget = 0.0;
  double water_level = 0.0;  // common marginal cost of the funded targets
  AllocationPlan per_source_plan;
};

/// Resource level at `higher` where its marginal perceived cost equals the
/// marginal of `lower` at zero. Requires higher.loss_value > lower.loss_value
/// and a shared probability family.
double threshold(const TargetSpec& higher, const TargetSpec& lower,
                 const BehavioralModel& behavior);

/// Total received t >= 0 at which the target's marginal cost equals `level`
/// (< 0); zero when the marginal at zero already meets the level.
double inverse_marginal(const TargetSpec& target, const BehavioralModel& behavior, double level);

ThresholdTable threshold_table(const TransportNetwork& network, const BehavioralModel& behavior);

/// Pools all sources into one budget and funds targets in descending loss
/// order, holding funded targets at a common marginal cost. The edge plan is
/// built by letting sources, in listed order, each fill the water profile
/// in turn.
WaterfillTrace waterfill_allocate(const TransportNetwork& network,
                                  const BehavioralModel& behavior);

std::size_t active_target_count(const TransportNetwork& network, const BehavioralModel& behavior);

/// d threshold(higher, lower) / d gamma by implicit differentiation of the
/// marginal-equality condition. Requires p(0) < 1/e for both targets.
double gamma_sensitivity(const TargetSpec& higher, const TargetSpec& lower,
                         const BehavioralModel& behavior);

/// Throws PreconditionError naming the first violated requirement of the
/// analytical water-filling results.
void check_waterfill_preconditions(const TransportNetwork& network);

}  // namespace secinv
