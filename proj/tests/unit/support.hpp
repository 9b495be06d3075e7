#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "secinv/model.hpp"

namespace secinv::testing {

// High-precision reference values (tests/oracles/compute_oracles.py).
inline constexpr double kPrelecTenthHalf = 0.21927532886002092249;
inline constexpr double kExpMinus4 = 0.018315638888734180294;
inline constexpr double kTwelveOverE = 4.4145532940573078591;
inline constexpr double kTwoTargetLoss = 0.42003177157681721273;
inline constexpr double kTwelveExpMinusRoot2 = 2.9174008132105705297;
inline constexpr double kMarginalR15G06U9 = -1.2824706460121618324;
inline constexpr double kCaseStudyAggregates[5] = {3.66824092803073, 3.38055885557894,
                                                   2.79277219067683, 2.28194656691083,
                                                   1.87648145880267};
inline constexpr double kFifthActivationBudget = 4.61759270598665;
inline constexpr double kLogFourThirds = 0.28768207245178092744;
inline constexpr double kThresholdG06R15 = 0.39817983211287654362;
inline constexpr double kThresholdSlopeG07R15 = -0.2849029680193275326;
inline constexpr double kSingleEdgeSubproblemRoot = 1.2565426382331728753;

inline constexpr double kCaseStudyLosses[5] = {12.0, 9.0, 5.0, 3.0, 2.0};

inline TargetSpec target(std::string id, double loss,
                         AttackProbabilityModel model = AttackProbabilityModel::exponential(1.0),
                         double lower = 0.0, double upper = kInfinity) {
  return {std::move(id), loss, model, lower, upper};
}

inline SourceSpec source(std::string id, double upper, double tau = 0.0, double lower = 0.0) {
  SourceSpec s;
  s.id = std::move(id);
  s.supply_lower = lower;
  s.supply_upper = upper;
  s.weight_tau = tau;
  return s;
}

// Complete network over the given losses and capacities, one shared model.
inline TransportNetwork complete_network(const std::vector<double>& losses,
                                         const std::vector<double>& capacities,
                                         AttackProbabilityModel model,
                                         double tau = 0.0) {
  std::vector<TargetSpec> targets;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    targets.push_back(target("t" + std::to_string(i + 1), losses[i], model));
  }
  std::vector<SourceSpec> sources;
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    sources.push_back(source("s" + std::to_string(i + 1), capacities[i], tau));
  }
  return TransportNetwork::complete(std::move(targets), std::move(sources));
}

inline TransportNetwork case_study_network(double baseline = 1.0, double tau = 0.0,
                                           std::vector<double> capacities = {10.0, 4.0}) {
  return complete_network({12.0, 9.0, 5.0, 3.0, 2.0}, capacities,
                          AttackProbabilityModel::exponential(baseline), tau);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace secinv::testing
