#include "secinv/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace secinv {

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error([&] {
        std::string text = "scenario has " + std::to_string(diagnostics.size()) + " problem(s)";
        for (const auto& d : diagnostics) {
          text += "\n  ";
          if (d.line > 0) text += fmt::format("line {}: ", d.line);
          text += d.message;
        }
        return text;
      }()),
      diagnostics_(std::move(diagnostics)) {}

const char* to_string(ProbabilityFamily family) noexcept {
  switch (family) {
    case ProbabilityFamily::exponential:
      return "exponential";
    case ProbabilityFamily::reciprocal:
      return "reciprocal";
  }
  return "unknown";
}

AttackProbabilityModel AttackProbabilityModel::exponential(double baseline) {
  if (!(baseline > 0.0) || !std::isfinite(baseline)) {
    throw InvalidInputError(
        fmt::format("exponential baseline must be a finite value > 0, got {}", baseline));
  }
  return {ProbabilityFamily::exponential, baseline};
}

AttackProbabilityModel AttackProbabilityModel::reciprocal(double baseline) {
  if (!(baseline > 1.0) || !std::isfinite(baseline)) {
    throw InvalidInputError(
        fmt::format("reciprocal baseline must be a finite value > 1, got {}", baseline));
  }
  return {ProbabilityFamily::reciprocal, baseline};
}

namespace {

void require_nonnegative(double total) {
  if (!(total >= 0.0)) {
    throw DomainError(fmt::format("received resources must be >= 0, got {}", total));
  }
}

}  // namespace

double AttackProbabilityModel::probability(double total) const {
  require_nonnegative(total);
  if (family_ == ProbabilityFamily::exponential) return std::exp(-total - baseline_);
  return 1.0 / (total + baseline_);
}

double AttackProbabilityModel::neg_log(double total) const {
  require_nonnegative(total);
  if (family_ == ProbabilityFamily::exponential) return total + baseline_;
  return std::log(total + baseline_);
}

double AttackProbabilityModel::neg_log_slope(double total) const {
  require_nonnegative(total);
  if (family_ == ProbabilityFamily::exponential) return 1.0;
  return 1.0 / (total + baseline_);
}

double AttackProbabilityModel::neg_log_curvature(double total) const {
  require_nonnegative(total);
  if (family_ == ProbabilityFamily::exponential) return 0.0;
  const double s = total + baseline_;
  return -1.0 / (s * s);
}

BehavioralModel::BehavioralModel(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidInputError(fmt::format("gamma must lie in (0, 1], got {}", gamma));
  }
}

double SourceSpec::utility_slope(const std::string& target_id) const {
  auto it = utility_slopes.find(target_id);
  return it == utility_slopes.end() ? default_utility_slope : it->second;
}

void validate(const TargetSpec& target) {
  if (target.id.empty()) throw InvalidInputError("target id must not be empty");
  if (!(target.loss_value > 0.0) || !std::isfinite(target.loss_value)) {
    throw InvalidInputError(
        fmt::format("target '{}': loss value must be > 0, got {}", target.id, target.loss_value));
  }
  if (!(target.demand_lower >= 0.0) || !std::isfinite(target.demand_lower)) {
    throw InvalidInputError(fmt::format("target '{}': demand_lower must be >= 0, got {}",
                                        target.id, target.demand_lower));
  }
  if (!(target.demand_upper >= target.demand_lower) || !(target.demand_upper > 0.0)) {
    throw InvalidInputError(
        fmt::format("target '{}': demand bounds must satisfy 0 <= lower <= upper, upper > 0 "
                    "(got [{}, {}])",
                    target.id, target.demand_lower, target.demand_upper));
  }
}

void validate(const SourceSpec& source) {
  if (source.id.empty()) throw InvalidInputError("source id must not be empty");
  if (!(source.supply_lower >= 0.0) || !std::isfinite(source.supply_lower)) {
    throw InvalidInputError(fmt::format("source '{}': supply_lower must be >= 0, got {}",
                                        source.id, source.supply_lower));
  }
  if (!(source.supply_upper > 0.0) || !std::isfinite(source.supply_upper) ||
      source.supply_upper < source.supply_lower) {
    throw InvalidInputError(
        fmt::format("source '{}': supply bounds must satisfy 0 <= lower <= upper, upper > 0 "
                    "finite (got [{}, {}])",
                    source.id, source.supply_lower, source.supply_upper));
  }
  if (!(source.weight_tau >= 0.0) || !std::isfinite(source.weight_tau)) {
    throw InvalidInputError(
        fmt::format("source '{}': tau must be >= 0, got {}", source.id, source.weight_tau));
  }
  if (!std::isfinite(source.default_utility_slope)) {
    throw InvalidInputError(fmt::format("source '{}': utility slope must be finite", source.id));
  }
  for (const auto& [target, slope] : source.utility_slopes) {
    if (!std::isfinite(slope)) {
      throw InvalidInputError(fmt::format("source '{}': utility slope for '{}' must be finite",
                                          source.id, target));
    }
  }
}

TransportNetwork::TransportNetwork(std::vector<TargetSpec> targets,
                                   std::vector<SourceSpec> sources,
                                   const std::vector<EdgeKey>& edges)
    : targets_(std::move(targets)), sources_(std::move(sources)) {
  if (targets_.empty()) throw InvalidInputError("network needs at least one target");
  if (sources_.empty()) throw InvalidInputError("network needs at least one source");
  std::set<std::string> seen;
  for (const auto& t : targets_) {
    validate(t);
    if (!seen.insert("t:" + t.id).second) {
      throw InvalidInputError(fmt::format("duplicate target id '{}'", t.id));
    }
  }
  for (const auto& s : sources_) {
    validate(s);
    if (!seen.insert("s:" + s.id).second) {
      throw InvalidInputError(fmt::format("duplicate source id '{}'", s.id));
    }
  }

  target_edges_.resize(targets_.size());
  source_edges_.resize(sources_.size());
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [target_id, source_id] : edges) {
    auto x = target_index(target_id);
    auto y = source_index(source_id);
    if (!x) throw InvalidInputError(fmt::format("edge references unknown target '{}'", target_id));
    if (!y) throw InvalidInputError(fmt::format("edge references unknown source '{}'", source_id));
    if (!pairs.emplace(*x, *y).second) {
      throw InvalidInputError(fmt::format("duplicate edge ({}, {})", target_id, source_id));
    }
    const std::size_t e = edges_.size();
    edges_.push_back({*x, *y});
    slopes_.push_back(sources_[*y].utility_slope(target_id));
    target_edges_[*x].push_back(e);
    source_edges_[*y].push_back(e);
  }
  for (std::size_t x = 0; x < targets_.size(); ++x) {
    if (target_edges_[x].empty()) {
      throw InvalidInputError(fmt::format("target '{}' has no incident edge", targets_[x].id));
    }
  }
  for (std::size_t y = 0; y < sources_.size(); ++y) {
    if (source_edges_[y].empty()) {
      throw InvalidInputError(fmt::format("source '{}' has no incident edge", sources_[y].id));
    }
  }
}

TransportNetwork TransportNetwork::complete(std::vector<TargetSpec> targets,
                                            std::vector<SourceSpec> sources) {
  std::vector<EdgeKey> edges;
  for (const auto& s : sources) {
    for (const auto& t : targets) edges.emplace_back(t.id, s.id);
  }
  return {std::move(targets), std::move(sources), edges};
}

std::optional<std::size_t> TransportNetwork::find_edge(std::size_t target,
                                                       std::size_t source) const {
  for (std::size_t e : target_edges_.at(target)) {
    if (edges_[e].source == source) return e;
  }
  return std::nullopt;
}

std::optional<std::size_t> TransportNetwork::target_index(const std::string& id) const {
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (targets_[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TransportNetwork::source_index(const std::string& id) const {
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<TransportNetwork::EdgeKey> TransportNetwork::edge_keys() const {
  std::vector<EdgeKey> keys;
  keys.reserve(edges_.size());
  for (const auto& e : edges_) keys.emplace_back(targets_[e.target].id, sources_[e.source].id);
  return keys;
}

TransportNetwork TransportNetwork::with_uniform_tau(double tau) const {
  auto sources = sources_;
  for (auto& s : sources) s.weight_tau = tau;
  return {targets_, std::move(sources), edge_keys()};
}

AllocationPlan::AllocationPlan(std::vector<double> amounts) : amounts_(std::move(amounts)) {
  for (std::size_t e = 0; e < amounts_.size(); ++e) {
    if (!(amounts_[e] >= 0.0) || !std::isfinite(amounts_[e])) {
      throw InvalidInputError(
          fmt::format("plan amount on edge {} must be finite and >= 0, got {}", e, amounts_[e]));
    }
  }
}

AllocationPlan AllocationPlan::zeros(const TransportNetwork& network) {
  return AllocationPlan(std::vector<double>(network.edge_count(), 0.0));
}

void check_plan(const TransportNetwork& network, std::span<const double> amounts) {
  if (amounts.size() != network.edge_count()) {
    throw PlanMismatchError(fmt::format("plan has {} edges but the network has {}",
                                        amounts.size(), network.edge_count()));
  }
}

double aggregate_at_target(const TransportNetwork& network, std::span<const double> amounts,
                           std::size_t target) {
  double sum = 0.0;
  for (std::size_t e : network.target_edges(target)) sum += amounts[e];
  return sum;
}

double aggregate_at_source(const TransportNetwork& network, std::span<const double> amounts,
                           std::size_t source) {
  double sum = 0.0;
  for (std::size_t e : network.source_edges(source)) sum += amounts[e];
  return sum;
}

std::vector<double> target_aggregates(const TransportNetwork& network,
                                      std::span<const double> amounts) {
  check_plan(network, amounts);
  std::vector<double> out(network.target_count());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = aggregate_at_target(network, amounts, x);
  return out;
}

std::vector<double> source_totals(const TransportNetwork& network,
                                  std::span<const double> amounts) {
  check_plan(network, amounts);
  std::vector<double> out(network.source_count());
  for (std::size_t y = 0; y < out.size(); ++y) out[y] = aggregate_at_source(network, amounts, y);
  return out;
}

double prelec_weight(double p, double gamma) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(fmt::format("probability must lie in [0, 1], got {}", p));
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError(fmt::format("gamma must lie in (0, 1], got {}", gamma));
  }
  if (p == 0.0 || p == 1.0 || gamma == 1.0) return p;
  return std::exp(-std::pow(-std::log(p), gamma));
}

double attack_probability(const AttackProbabilityModel& model, double total_received) {
  return model.probability(total_received);
}

double perceived_target_cost(const TargetSpec& target, const BehavioralModel& behavior,
                             double total_received) {
  const double gamma = behavior.gamma();
  if (gamma == 1.0) return target.loss_value * target.prob_model.probability(total_received);
  const double l = target.prob_model.neg_log(total_received);
  return target.loss_value * std::exp(-std::pow(l, gamma));
}

double true_loss(const TransportNetwork& network, const AllocationPlan& plan) {
  const auto aggregates = target_aggregates(network, plan.amounts());
  double loss = 0.0;
  for (std::size_t x = 0; x < aggregates.size(); ++x) {
    const auto& t = network.targets()[x];
    loss += t.loss_value * t.prob_model.probability(aggregates[x]);
  }
  return loss;
}

double perceived_loss(const TransportNetwork& network, const AllocationPlan& plan,
                      const BehavioralModel& behavior) {
  const auto aggregates = target_aggregates(network, plan.amounts());
  double loss = 0.0;
  for (std::size_t x = 0; x < aggregates.size(); ++x) {
    loss += perceived_target_cost(network.targets()[x], behavior, aggregates[x]);
  }
  return loss;
}

double source_utility(const TransportNetwork& network, std::span<const double> amounts) {
  check_plan(network, amounts);
  double total = 0.0;
  for (std::size_t e = 0; e < amounts.size(); ++e) {
    total += network.sources()[network.edges()[e].source].weight_tau *
             network.utility_slope(e) * amounts[e];
  }
  return total;
}

double marginal_perceived_cost(const TargetSpec& target, const BehavioralModel& behavior,
                               double total_received) {
  const double l = target.prob_model.neg_log(total_received);
  // p in {0, 1} leaves (-log p)^(gamma - 1) undefined.
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw DomainError(fmt::format(
        "marginal cost undefined where the attack probability is 0 or 1 (total = {})",
        total_received));
  }
  const double gamma = behavior.gamma();
  const double slope = target.prob_model.neg_log_slope(total_received);
  // d/dt exp(-L^g) = -g L^(g-1) L' exp(-L^g)
  return -target.loss_value * gamma * std::pow(l, gamma - 1.0) * slope *
         std::exp(-std::pow(l, gamma));
}

}  // namespace secinv
