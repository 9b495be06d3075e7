#include "secinv/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace secinv {

namespace {

constexpr int kBisectionCap = 200;
constexpr double kRootTolerance = 1e-12;
constexpr int kMaxBracketDoublings = 64;

void require_ordered_pair(const TargetSpec& higher, const TargetSpec& lower) {
  if (!(higher.loss_value > lower.loss_value)) {
    throw PreconditionError(fmt::format(
        "target '{}' (loss {}) must have a strictly larger loss value than '{}' (loss {})",
        higher.id, higher.loss_value, lower.id, lower.loss_value));
  }
  if (higher.prob_model.family() != lower.prob_model.family()) {
    throw PreconditionError(fmt::format(
        "targets '{}' and '{}' must share one attack probability family ({} vs {})", higher.id,
        lower.id, to_string(higher.prob_model.family()), to_string(lower.prob_model.family())));
  }
}

// Targets of a network sorted by descending loss value, with the activation
// breakpoints of the sequential fill.
class WaterProfile {
 public:
  WaterProfile(const TransportNetwork& network, const BehavioralModel& behavior)
      : network_(network), behavior_(behavior) {
    order_.resize(network.target_count());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return network.targets()[a].loss_value > network.targets()[b].loss_value;
    });
    for (std::size_t i : order_) {
      marginal_at_zero_.push_back(marginal_perceived_cost(target(i), behavior, 0.0));
    }
    breakpoints_.assign(order_.size(), 0.0);
    for (std::size_t b = 1; b < order_.size(); ++b) {
      for (std::size_t a = 0; a < b; ++a) {
        breakpoints_[b] += threshold(target(order_[a]), target(order_[b]), behavior);
      }
    }
  }

  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  std::size_t active_count(double budget) const {
    std::size_t k = 0;
    while (k < breakpoints_.size() && budget > breakpoints_[k]) ++k;
    return k;
  }

  // Aggregates in activation order for a pooled budget, plus the water level.
  std::vector<double> fill(double budget, double* level = nullptr) const {
    const std::size_t n = order_.size();
    std::vector<double> out(n, 0.0);
    const std::size_t k = active_count(budget);
    if (k == 0) {
      if (level) *level = marginal_at_zero_.front();
      return out;
    }
    // The level is -exp(u); the funded total decreases in u.
    auto funded = [&](double u, std::vector<double>& amounts) {
      const double lambda = -std::exp(u);
      double sum = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        amounts[a] = inverse_marginal(target(order_[a]), behavior_, lambda);
        sum += amounts[a];
      }
      return sum;
    };
    std::vector<double> scratch(n, 0.0);
    double u_hi = std::log(-marginal_at_zero_[k - 1]);
    double u_lo = 0.0;
    if (k < n) {
      u_lo = std::log(-marginal_at_zero_[k]);
    } else {
      u_lo = u_hi - 1.0;
      int widen = 0;
      while (funded(u_lo, scratch) < budget) {
        u_lo -= 1.0;
        if (++widen > 4096) throw std::runtime_error("water level search failed to bracket");
      }
    }
    for (int it = 0; it < kBisectionCap; ++it) {
      const double mid = 0.5 * (u_lo + u_hi);
      if (mid <= u_lo || mid >= u_hi) break;
      if (funded(mid, scratch) < budget) {
        u_hi = mid;
      } else {
        u_lo = mid;
      }
    }
    const double u = 0.5 * (u_lo + u_hi);
    const double sum = funded(u, out);
    // Push the bisection's rounding residue onto the top target so the
    // budget is spent exactly.
    out[0] = std::max(0.0, out[0] + (budget - sum));
    if (level) *level = -std::exp(u);
    return out;
  }

 private:
  const TargetSpec& target(std::size_t i) const { return network_.targets()[i]; }

  const TransportNetwork& network_;
  const BehavioralModel& behavior_;
  std::vector<std::size_t> order_;
  std::vector<double> marginal_at_zero_;
  std::vector<double> breakpoints_;
};

}  // namespace

double ThresholdTable::at(std::size_t higher, std::size_t lower) const {
  for (const auto& e : entries) {
    if (e.higher == higher && e.lower == lower) return e.value;
  }
  throw std::out_of_range(fmt::format("no threshold for pair ({}, {})", higher, lower));
}

double inverse_marginal(const TargetSpec& target, const BehavioralModel& behavior,
                        double level) {
  if (!(level < 0.0)) {
    throw DomainError(fmt::format("marginal cost level must be negative, got {}", level));
  }
  auto marginal = [&](double t) { return marginal_perceived_cost(target, behavior, t); };
  if (marginal(0.0) >= level) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (marginal(hi) < level) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings) {
      throw DomainError(fmt::format("marginal level {} is out of reach for target '{}'", level,
                                    target.id));
    }
  }
  for (int it = 0; it < kBisectionCap && hi - lo > kRootTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (marginal(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double threshold(const TargetSpec& higher, const TargetSpec& lower,
                 const BehavioralModel& behavior) {
  require_ordered_pair(higher, lower);
  const double rhs = marginal_perceived_cost(lower, behavior, 0.0);
  const double lhs_at_zero = marginal_perceived_cost(higher, behavior, 0.0);
  if (lhs_at_zero > rhs) {
    throw PreconditionError(fmt::format(
        "threshold bracket failed: '{}' already has a smaller marginal gain than '{}' at zero",
        higher.id, lower.id));
  }
  return inverse_marginal(higher, behavior, rhs);
}

void check_waterfill_preconditions(const TransportNetwork& network) {
  if (!network.is_complete()) {
    throw PreconditionError(
        "water-filling requires a complete transport network (every source linked to every "
        "target)");
  }
  std::set<double> values;
  for (const auto& t : network.targets()) {
    if (!values.insert(t.loss_value).second) {
      throw PreconditionError(fmt::format(
          "water-filling requires strictly ordered loss values; value {} appears more than once",
          t.loss_value));
    }
  }
  const auto& first = network.targets().front().prob_model;
  for (const auto& t : network.targets()) {
    if (!(t.prob_model == first)) {
      throw PreconditionError(fmt::format(
          "water-filling requires every target to share one attack probability model; '{}' "
          "uses {} r={} but '{}' uses {} r={}",
          t.id, to_string(t.prob_model.family()), t.prob_model.baseline(),
          network.targets().front().id, to_string(first.family()), first.baseline()));
    }
  }
}

ThresholdTable threshold_table(const TransportNetwork& network, const BehavioralModel& behavior) {
  check_waterfill_preconditions(network);
  WaterProfile profile(network, behavior);
  const auto& order = profile.order();
  ThresholdTable table;
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      table.entries.push_back({order[a], order[b],
                               threshold(network.targets()[order[a]],
                                         network.targets()[order[b]], behavior)});
    }
  }
  return table;
}

WaterfillTrace waterfill_allocate(const TransportNetwork& network,
                                  const BehavioralModel& behavior) {
  check_waterfill_preconditions(network);
  WaterProfile profile(network, behavior);
  const auto& order = profile.order();

  WaterfillTrace trace;
  trace.activation_order = order;
  for (std::size_t i : order) trace.activation_ids.push_back(network.targets()[i].id);
  trace.breakpoints = profile.breakpoints();
  for (const auto& s : network.sources()) trace.budget += s.supply_upper;

  const auto sorted = profile.fill(trace.budget, &trace.water_level);
  trace.final_aggregates.assign(network.target_count(), 0.0);
  for (std::size_t a = 0; a < order.size(); ++a) trace.final_aggregates[order[a]] = sorted[a];

  // Sources take turns filling the profile in listed order; each ships the
  // growth of the profile over its slice of the pooled budget.
  std::vector<double> amounts(network.edge_count(), 0.0);
  std::vector<double> previous(order.size(), 0.0);
  double cumulative = 0.0;
  for (std::size_t y = 0; y < network.source_count(); ++y) {
    cumulative += network.sources()[y].supply_upper;
    const bool last = y + 1 == network.source_count();
    const auto current = last ? sorted : profile.fill(cumulative);
    for (std::size_t a = 0; a < order.size(); ++a) {
      const auto edge = network.find_edge(order[a], y);
      amounts[*edge] = std::max(0.0, current[a] - previous[a]);
    }
    previous = current;
  }
  trace.per_source_plan = AllocationPlan(std::move(amounts));
  return trace;
}

std::size_t active_target_count(const TransportNetwork& network,
                                const BehavioralModel& behavior) {
  const auto trace = waterfill_allocate(network, behavior);
  return static_cast<std::size_t>(std::count_if(trace.final_aggregates.begin(),
                                                trace.final_aggregates.end(),
                                                [](double a) { return a > 0.0; }));
}

double gamma_sensitivity(const TargetSpec& higher, const TargetSpec& lower,
                         const BehavioralModel& behavior) {
  require_ordered_pair(higher, lower);
  for (const TargetSpec* t : {&higher, &lower}) {
    if (!(t->prob_model.neg_log(0.0) > 1.0)) {
      throw PreconditionError(fmt::format(
          "gamma sensitivity needs p(0) < 1/e; target '{}' has p(0) = {}", t->id,
          t->prob_model.probability(0.0)));
    }
  }
  const double g = behavior.gamma();
  const double t = threshold(higher, lower, behavior);
  const auto& model = higher.prob_model;
  const double l = model.neg_log(t);
  const double dl = model.neg_log_slope(t);
  const double d2l = model.neg_log_curvature(t);
  const double l0 = lower.prob_model.neg_log(0.0);

  // Differentiate log|marginal_i(t)| = log|marginal_j(0)| in gamma, with
  // log|marginal| = log U + log g + (g - 1) log L + log L' - L^g.
  const double numerator =
      (std::pow(l, g) - 1.0) * std::log(l) - (std::pow(l0, g) - 1.0) * std::log(l0);
  const double denominator = (g - 1.0) * dl / l + d2l / dl - g * std::pow(l, g - 1.0) * dl;
  return numerator / denominator;
}

}  // namespace secinv
