#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "secinv/centralized.hpp"
#include "secinv/waterfill.hpp"
#include "support.hpp"

using namespace secinv;
using namespace secinv::testing;

namespace {

double threshold_residual(const TargetSpec& hi, const TargetSpec& lo, const BehavioralModel& b,
                          double t) {
  return std::abs(marginal_perceived_cost(hi, b, t) - marginal_perceived_cost(lo, b, 0.0));
}

}  // namespace

TEST_CASE("threshold examples") {
  const auto e1 = AttackProbabilityModel::exponential(1.0);
  const double t = threshold(target("i", 12.0, e1), target("j", 9.0, e1), BehavioralModel(1.0));
  CHECK(std::abs(t - kLogFourThirds) <= 1e-10);

  const auto e15 = AttackProbabilityModel::exponential(1.5);
  const auto hi = target("i", 12.0, e15);
  const auto lo = target("j", 9.0, e15);
  const BehavioralModel b(0.6);
  const double t06 = threshold(hi, lo, b);
  CHECK(std::abs(t06 - kThresholdG06R15) <= 1e-10);
  CHECK(t06 > kLogFourThirds);
  CHECK(threshold_residual(hi, lo, b, t06) <= 1e-10);
}

TEST_CASE("threshold preconditions") {
  const BehavioralModel b(0.5);
  CHECK_THROWS_AS(threshold(target("i", 9.0), target("j", 9.0), b), PreconditionError);
  CHECK_THROWS_AS(threshold(target("i", 5.0), target("j", 9.0), b), PreconditionError);
  CHECK_THROWS_AS(threshold(target("i", 12.0),
                            target("j", 9.0, AttackProbabilityModel::reciprocal(2.0)), b),
                  PreconditionError);
}

TEST_CASE("threshold table satisfies the marginal equality and ordering") {
  for (double g : {0.3, 0.5, 0.8, 1.0}) {
    for (const auto& model :
         {AttackProbabilityModel::exponential(1.0), AttackProbabilityModel::reciprocal(2.0)}) {
      const auto net = complete_network({12, 9, 5, 3, 2}, {10, 4}, model);
      const BehavioralModel b(g);
      const auto table = threshold_table(net, b);
      CHECK(table.entries.size() == 10);
      for (const auto& e : table.entries) {
        CHECK(e.value >= 0.0);
        CHECK(threshold_residual(net.targets()[e.higher], net.targets()[e.lower], b, e.value) <=
              1e-10);
      }
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 2; j < 5; ++j) {
          CHECK(table.at(i, j) >= table.at(i, j - 1));
        }
      }
    }
  }
}

TEST_CASE("water-filling the case study at gamma 1") {
  const auto net = case_study_network();
  const auto trace = waterfill_allocate(net, BehavioralModel(1.0));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(trace.final_aggregates[i] - kCaseStudyAggregates[i]) < 1e-9);
  }
  CHECK(std::abs(trace.breakpoints[4] - kFifthActivationBudget) < 1e-9);
  CHECK(std::abs(trace.breakpoints[1] - kLogFourThirds) < 1e-10);
  CHECK(trace.activation_ids == std::vector<std::string>{"t1", "t2", "t3", "t4", "t5"});
  CHECK(trace.budget == 14.0);
  double sum = 0.0;
  for (double a : trace.final_aggregates) sum += a;
  CHECK(sum == doctest::Approx(14.0).epsilon(1e-14));
  for (std::size_t k = 1; k < trace.breakpoints.size(); ++k) {
    CHECK(trace.breakpoints[k] > trace.breakpoints[k - 1]);
  }
  CHECK(active_target_count(net, BehavioralModel(1.0)) == 5);
}

TEST_CASE("a budget below the first threshold funds only the top target") {
  const auto net = case_study_network(1.0, 0.0, {0.05, 0.05});
  const auto trace = waterfill_allocate(net, BehavioralModel(1.0));
  CHECK(trace.final_aggregates[0] == doctest::Approx(0.1).epsilon(1e-14));
  for (std::size_t i = 1; i < 5; ++i) CHECK(trace.final_aggregates[i] == 0.0);
  CHECK(active_target_count(net, BehavioralModel(1.0)) == 1);
}

TEST_CASE("funded count grows with gamma when p(0) < 1/e") {
  const auto net = case_study_network(1.5, 0.0, {2.0, 1.0});
  std::size_t previous = 0;
  for (int k = 0; k <= 14; ++k) {
    const double g = 0.3 + 0.05 * k;
    const auto count = active_target_count(net, BehavioralModel(std::min(g, 1.0)));
    CHECK(count >= previous);
    previous = count;
  }
}

TEST_CASE("water level and edge plan consistency") {
  for (double g : {0.3, 0.6, 1.0}) {
    for (const auto& caps : {std::vector<double>{10, 4}, std::vector<double>{1, 0.5, 1.5}}) {
      const auto net = complete_network({12, 9, 5, 3, 2}, caps,
                                        AttackProbabilityModel::exponential(1.2));
      const BehavioralModel b(g);
      const auto trace = waterfill_allocate(net, b);
      const auto& agg = trace.final_aggregates;
      for (std::size_t x = 0; x < agg.size(); ++x) {
        if (agg[x] > 0.0) {
          CHECK(std::abs(marginal_perceived_cost(net.targets()[x], b, agg[x]) - trace.water_level) <=
                1e-6);
        } else {
          CHECK(marginal_perceived_cost(net.targets()[x], b, 0.0) >= trace.water_level - 1e-12);
        }
        if (x > 0) CHECK(agg[x] <= agg[x - 1]);
      }
      const auto plan_agg = target_aggregates(net, trace.per_source_plan.amounts());
      CHECK(max_abs_diff(plan_agg, agg) <= 1e-12);
      for (std::size_t y = 0; y < net.source_count(); ++y) {
        CHECK(std::abs(aggregate_at_source(net, trace.per_source_plan.amounts(), y) -
                       net.sources()[y].supply_upper) <= 1e-12);
      }
    }
  }
}

TEST_CASE("water-filling agrees with the numeric solver") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> loss(0.5, 20.0);
  std::uniform_real_distribution<double> cap(0.1, 4.0);
  std::uniform_real_distribution<double> gamma(0.3, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> losses(n);
    for (double& u : losses) u = loss(rng);
    std::vector<double> caps(1 + trial % 3);
    for (double& c : caps) c = cap(rng);
    const auto model = trial % 2 == 0 ? AttackProbabilityModel::exponential(1.0 + trial * 0.05)
                                      : AttackProbabilityModel::reciprocal(1.5 + trial * 0.1);
    const auto net = complete_network(losses, caps, model);
    const BehavioralModel b(gamma(rng));
    CAPTURE(trial);
    const auto wf = waterfill_allocate(net, b).final_aggregates;
    const auto pg = target_aggregates(net, solve_op_a(net, b).plan.amounts());
    CHECK(max_abs_diff(wf, pg) <= 1e-5);
  }
}

TEST_CASE("water-filling preconditions") {
  const BehavioralModel b(0.5);
  const TransportNetwork partial({target("a", 3.0), target("b", 2.0)},
                                 {source("s", 1.0), source("r", 1.0)},
                                 {{"a", "s"}, {"b", "r"}});
  CHECK_THROWS_AS(waterfill_allocate(partial, b), PreconditionError);
  CHECK_THROWS_AS(waterfill_allocate(complete_network({3, 3}, {1}, AttackProbabilityModel::exponential(1.0)), b),
                  PreconditionError);
  const auto mixed = TransportNetwork::complete(
      {target("a", 3.0), target("b", 2.0, AttackProbabilityModel::reciprocal(2.0))},
      {source("s", 1.0)});
  CHECK_THROWS_AS(waterfill_allocate(mixed, b), PreconditionError);
  CHECK_THROWS_AS(active_target_count(mixed, b), PreconditionError);
}

TEST_CASE("gamma sensitivity") {
  const auto e15 = AttackProbabilityModel::exponential(1.5);
  const auto hi = target("i", 12.0, e15);
  const auto lo = target("j", 9.0, e15);
  const double d = gamma_sensitivity(hi, lo, BehavioralModel(0.7));
  CHECK(d < 0.0);
  CHECK(std::abs(d - kThresholdSlopeG07R15) / std::abs(kThresholdSlopeG07R15) <= 1e-6);

  const double h = 1e-4;
  const double fd =
      (threshold(hi, lo, BehavioralModel(0.7 + h)) - threshold(hi, lo, BehavioralModel(0.7 - h))) /
      (2 * h);
  CHECK(std::abs(d - fd) / std::abs(fd) <= 1e-3);

  CHECK_THROWS_AS(gamma_sensitivity(hi, hi, BehavioralModel(0.7)), PreconditionError);
  CHECK_THROWS_AS(gamma_sensitivity(target("i", 12.0), target("j", 9.0), BehavioralModel(0.7)),
                  PreconditionError);
  const auto r3 = AttackProbabilityModel::reciprocal(3.0);
  CHECK(gamma_sensitivity(target("i", 12.0, r3), target("j", 2.0, r3), BehavioralModel(0.5)) < 0.0);
}

TEST_CASE("thresholds shrink as gamma grows when p(0) < 1/e") {
  for (const auto& model :
       {AttackProbabilityModel::exponential(1.5), AttackProbabilityModel::reciprocal(3.0)}) {
    const auto net = complete_network({12, 9, 5, 3, 2}, {1}, model);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = i + 1; j < 5; ++j) {
        double previous = kInfinity;
        for (double g = 0.3; g <= 1.0 + 1e-12; g += 0.1) {
          const double t = threshold(net.targets()[i], net.targets()[j], BehavioralModel(std::min(g, 1.0)));
          CHECK(t < previous);
          previous = t;
        }
      }
    }
  }
}
