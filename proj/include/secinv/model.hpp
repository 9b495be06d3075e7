#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secinv/errors.hpp"

namespace secinv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ProbabilityFamily { exponential, reciprocal };

const char* to_string(ProbabilityFamily family) noexcept;

/// Maps the total resources a target receives to the success probability of
/// an attack on it.
///
///   exponential:  p(t) = exp(-t - r),  r > 0
///   reciprocal:   p(t) = 1 / (t + r),  r > 1
///
/// Both families are strictly decreasing and log-convex, and keep p in (0, 1)
/// for every t >= 0. The analytical routines work with the negative log
/// probability L(t) = -log p(t), which is exact for the exponential family.
class AttackProbabilityModel {
 public:
  static AttackProbabilityModel exponential(double baseline);
  static AttackProbabilityModel reciprocal(double baseline);

  ProbabilityFamily family() const noexcept { return family_; }
  double baseline() const noexcept { return baseline_; }

  double probability(double total) const;

  /// L(t) = -log p(t) and its first two derivatives in t.
  double neg_log(double total) const;
  double neg_log_slope(double total) const;
  double neg_log_curvature(double total) const;

  bool operator==(const AttackProbabilityModel&) const = default;

 private:
  AttackProbabilityModel(ProbabilityFamily family, double baseline)
      : family_(family), baseline_(baseline) {}

  ProbabilityFamily family_;
  double baseline_;
};

/// Degree of probability misperception. gamma = 1 is an undistorted planner.
class BehavioralModel {
 public:
  explicit BehavioralModel(double gamma = 1.0);

  double gamma() const noexcept { return gamma_; }

  bool operator==(const BehavioralModel&) const = default;

 private:
  double gamma_;
};

struct TargetSpec {
  std::string id;
  double loss_value = 1.0;
  AttackProbabilityModel prob_model = AttackProbabilityModel::exponential(1.0);
  double demand_lower = 0.0;
  double demand_upper = kInfinity;

  bool operator==(const TargetSpec&) const = default;
};

/// A resource owner. Its utility for shipping pi along edge (x, y) is
/// slope(x) * pi, where slope(x) is `utility_slopes[x]` when present and
/// `default_utility_slope` otherwise.
struct SourceSpec {
  std::string id;
  double supply_lower = 0.0;
  double supply_upper = 1.0;
  double weight_tau = 0.0;
  double default_utility_slope = 1.0;
  std::map<std::string, double> utility_slopes;

  double utility_slope(const std::string& target_id) const;

  bool operator==(const SourceSpec&) const = default;
};

/// Throws InvalidInputError naming the first violated invariant.
void validate(const TargetSpec& target);
void validate(const SourceSpec& source);

struct Edge {
  std::size_t target = 0;
  std::size_t source = 0;

  bool operator==(const Edge&) const = default;
};

/// Bipartite source/target graph. Edges keep the order they were given in;
/// plans are vectors indexed by that order.
class TransportNetwork {
 public:
  using EdgeKey = std::pair<std::string, std::string>;  // (target id, source id)

  TransportNetwork(std::vector<TargetSpec> targets, std::vector<SourceSpec> sources,
                   const std::vector<EdgeKey>& edges);

  /// Every source connected to every target, source-major edge order.
  static TransportNetwork complete(std::vector<TargetSpec> targets,
                                   std::vector<SourceSpec> sources);

  const std::vector<TargetSpec>& targets() const noexcept { return targets_; }
  const std::vector<SourceSpec>& sources() const noexcept { return sources_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t target_count() const noexcept { return targets_.size(); }
  std::size_t source_count() const noexcept { return sources_.size(); }

  std::span<const std::size_t> target_edges(std::size_t target) const {
    return target_edges_.at(target);
  }
  std::span<const std::size_t> source_edges(std::size_t source) const {
    return source_edges_.at(source);
  }

  /// Linear utility slope c_xy of an edge.
  double utility_slope(std::size_t edge) const { return slopes_.at(edge); }

  std::optional<std::size_t> find_edge(std::size_t target, std::size_t source) const;
  std::optional<std::size_t> target_index(const std::string& id) const;
  std::optional<std::size_t> source_index(const std::string& id) const;

  bool is_complete() const noexcept { return edges_.size() == targets_.size() * sources_.size(); }

  std::vector<EdgeKey> edge_keys() const;

  /// Copy with every source's tau replaced.
  TransportNetwork with_uniform_tau(double tau) const;

 private:
  std::vector<TargetSpec> targets_;
  std::vector<SourceSpec> sources_;
  std::vector<Edge> edges_;
  std::vector<double> slopes_;
  std::vector<std::vector<std::size_t>> target_edges_;
  std::vector<std::vector<std::size_t>> source_edges_;
};

/// Edge-indexed nonnegative transport amounts.
class AllocationPlan {
 public:
  AllocationPlan() = default;
  explicit AllocationPlan(std::vector<double> amounts);

  static AllocationPlan zeros(const TransportNetwork& network);

  std::span<const double> amounts() const noexcept { return amounts_; }
  double operator[](std::size_t edge) const { return amounts_.at(edge); }
  std::size_t size() const noexcept { return amounts_.size(); }

  bool operator==(const AllocationPlan&) const = default;

 private:
  std::vector<double> amounts_;
};

/// Throws PlanMismatchError when the plan is not defined on the network's edges.
void check_plan(const TransportNetwork& network, std::span<const double> amounts);

double aggregate_at_target(const TransportNetwork& network, std::span<const double> amounts,
                           std::size_t target);
double aggregate_at_source(const TransportNetwork& network, std::span<const double> amounts,
                           std::size_t source);
std::vector<double> target_aggregates(const TransportNetwork& network,
                                      std::span<const double> amounts);
std::vector<double> source_totals(const TransportNetwork& network,
                                  std::span<const double> amounts);

struct SolveReport {
  AllocationPlan plan;
  double true_loss = 0.0;
  double perceived_loss = 0.0;
  double source_utility = 0.0;  // sum over edges of tau_y * c_xy * pi_xy
  double objective = 0.0;       // value of the objective that was minimized
  std::size_t iterations = 0;
  std::vector<TraceRecord> residual_trace;
  bool converged = false;
};

/// Prelec weighting w(p) = exp(-(-log p)^gamma), extended continuously to
/// w(0) = 0 and w(1) = 1.
double prelec_weight(double p, double gamma);

double attack_probability(const AttackProbabilityModel& model, double total_received);

/// U_x * w(p_x(total)) for a single target.
double perceived_target_cost(const TargetSpec& target, const BehavioralModel& behavior,
                             double total_received);

double true_loss(const TransportNetwork& network, const AllocationPlan& plan);
double perceived_loss(const TransportNetwork& network, const AllocationPlan& plan,
                      const BehavioralModel& behavior);
double source_utility(const TransportNetwork& network, std::span<const double> amounts);

/// d/dt of U_x * w(p_x(t)). Negative, strictly increasing, tends to 0.
double marginal_perceived_cost(const TargetSpec& target, const BehavioralModel& behavior,
                               double total_received);

}  // namespace secinv
