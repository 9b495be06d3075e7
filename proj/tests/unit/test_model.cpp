#include <doctest.h>

#include <cmath>
#include <vector>

#include "secinv/model.hpp"
#include "support.hpp"

using namespace secinv;
using namespace secinv::testing;

namespace {

const std::vector<AttackProbabilityModel> kModels = {
    AttackProbabilityModel::exponential(1.0), AttackProbabilityModel::exponential(1.5),
    AttackProbabilityModel::exponential(3.0), AttackProbabilityModel::reciprocal(1.5),
    AttackProbabilityModel::reciprocal(3.0)};
const std::vector<double> kGammas = {0.3, 0.5, 0.8, 1.0};

}  // namespace

TEST_CASE("prelec weight examples") {
  CHECK(prelec_weight(0.37, 1.0) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(prelec_weight(1.0 / std::exp(1.0), 0.4) == doctest::Approx(1.0 / std::exp(1.0)).epsilon(1e-12));
  CHECK(std::abs(prelec_weight(0.1, 0.5) - kPrelecTenthHalf) < 1e-15);
  CHECK(prelec_weight(0.0, 0.5) == 0.0);
  CHECK(prelec_weight(1.0, 0.5) == 1.0);
}

TEST_CASE("prelec weight rejects values outside its domain") {
  CHECK_THROWS_AS(prelec_weight(-0.1, 0.5), DomainError);
  CHECK_THROWS_AS(prelec_weight(1.1, 0.5), DomainError);
  CHECK_THROWS_AS(prelec_weight(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(prelec_weight(0.5, 1.2), DomainError);
  CHECK_THROWS_AS(BehavioralModel(0.0), InvalidInputError);
  CHECK_THROWS_AS(BehavioralModel(1.5), InvalidInputError);
}

TEST_CASE("prelec identity and fixed point") {
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    CHECK(std::abs(prelec_weight(p, 1.0) - p) <= 1e-12);
  }
  const double inv_e = std::exp(-1.0);
  for (double g = 0.05; g <= 1.0; g += 0.05) {
    CHECK(std::abs(prelec_weight(inv_e, g) - inv_e) <= 1e-12);
  }
}

TEST_CASE("prelec overweights small and underweights large probabilities") {
  const double inv_e = std::exp(-1.0);
  for (double g : {0.3, 0.5, 0.8, 0.95}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      if (std::abs(p - inv_e) < 1e-9) continue;
      if (p < inv_e) {
        CHECK(prelec_weight(p, g) > p);
      } else {
        CHECK(prelec_weight(p, g) < p);
      }
    }
  }
}

TEST_CASE("attack probability examples") {
  const auto e1 = AttackProbabilityModel::exponential(1.0);
  CHECK(attack_probability(e1, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(attack_probability(AttackProbabilityModel::reciprocal(2.0), 0.0) == 0.5);
  CHECK(std::abs(attack_probability(e1, 3.0) - kExpMinus4) < 1e-17);
  CHECK_THROWS_AS(attack_probability(e1, -1e-9), DomainError);
}

TEST_CASE("attack probability model construction is validated") {
  CHECK_THROWS_AS(AttackProbabilityModel::exponential(0.0), InvalidInputError);
  CHECK_THROWS_AS(AttackProbabilityModel::exponential(-1.0), InvalidInputError);
  CHECK_THROWS_AS(AttackProbabilityModel::reciprocal(1.0), InvalidInputError);
  CHECK_NOTHROW(AttackProbabilityModel::reciprocal(1.0001));
}

TEST_CASE("attack probability is strictly decreasing and log-convex") {
  for (const auto& m : kModels) {
    for (double t = 0.0; t < 20.0; t += 0.37) {
      const double p0 = m.probability(t);
      const double p1 = m.probability(t + 0.01);
      CHECK(p1 < p0);
      CHECK(p0 > 0.0);
      CHECK(p0 <= 1.0);
      for (double h : {0.05, 0.5, 2.0}) {
        const double mid = std::log(m.probability(t + h));
        const double avg = 0.5 * (std::log(p0) + std::log(m.probability(t + 2 * h)));
        CHECK(mid <= avg + 1e-10);
      }
    }
  }
}

TEST_CASE("true and perceived loss examples") {
  const auto single = TransportNetwork::complete({target("x", 12.0)}, {source("y", 5.0)});
  const auto zero = AllocationPlan::zeros(single);
  CHECK(std::abs(true_loss(single, zero) - kTwelveOverE) < 1e-14);
  CHECK(std::abs(perceived_loss(single, zero, BehavioralModel(0.5)) - kTwelveOverE) < 1e-14);

  const auto r2 = TransportNetwork::complete(
      {target("x", 12.0, AttackProbabilityModel::exponential(2.0))}, {source("y", 5.0)});
  CHECK(std::abs(perceived_loss(r2, AllocationPlan::zeros(r2), BehavioralModel(0.5)) -
                 kTwelveExpMinusRoot2) < 1e-14);

  // Two targets fed by their own sources with aggregates 1 and 2.
  const TransportNetwork pair({target("a", 2.0), target("b", 3.0)},
                              {source("ya", 5.0), source("yb", 5.0)},
                              {{"a", "ya"}, {"b", "yb"}});
  const AllocationPlan plan({1.0, 2.0});
  CHECK(std::abs(true_loss(pair, plan) - kTwoTargetLoss) < 1e-15);
  CHECK(perceived_loss(pair, plan, BehavioralModel(1.0)) == true_loss(pair, plan));
}

TEST_CASE("losses reject plans of the wrong shape") {
  const auto net = case_study_network();
  CHECK_THROWS_AS(true_loss(net, AllocationPlan({1.0, 2.0})), PlanMismatchError);
  CHECK_THROWS_AS(perceived_loss(net, AllocationPlan({1.0}), BehavioralModel(0.5)),
                  PlanMismatchError);
  CHECK_THROWS_AS(AllocationPlan({1.0, -0.5}), InvalidInputError);
}

TEST_CASE("marginal perceived cost examples") {
  const auto t12 = target("x", 12.0);
  CHECK(std::abs(marginal_perceived_cost(t12, BehavioralModel(1.0), 0.0) + kTwelveOverE) < 1e-14);

  const auto t9 = target("y", 9.0, AttackProbabilityModel::exponential(1.5));
  const BehavioralModel b(0.6);
  const double m = marginal_perceived_cost(t9, b, 0.0);
  CHECK(std::abs(m - kMarginalR15G06U9) < 1e-13);
  const double h = 1e-5;
  const double fd =
      (perceived_target_cost(t9, b, h) - perceived_target_cost(t9, b, 0.0)) / h;
  CHECK(std::abs(fd - m) / std::abs(m) <= 1e-5);
}

TEST_CASE("marginal perceived cost is negative, increasing and matches finite differences") {
  for (const auto& model : kModels) {
    for (double g : kGammas) {
      const auto t = target("x", 7.0, model);
      const BehavioralModel b(g);
      double previous = -kInfinity;
      for (double s = 0.01; s <= 12.0; s += 0.3) {
        const double m = marginal_perceived_cost(t, b, s);
        CHECK(m < 0.0);
        CHECK(m > previous);
        previous = m;
        const double h = 1e-6 * std::max(1.0, s);
        const double fd =
            (perceived_target_cost(t, b, s + h) - perceived_target_cost(t, b, s - h)) / (2 * h);
        CHECK(std::abs(fd - m) <= 1e-5 * std::abs(m));
      }
    }
  }
}

TEST_CASE("marginal ordering follows loss values") {
  for (const auto& model : kModels) {
    for (double g : kGammas) {
      const BehavioralModel b(g);
      for (double s = 0.0; s <= 8.0; s += 0.5) {
        CHECK(marginal_perceived_cost(target("hi", 9.0, model), b, s) <
              marginal_perceived_cost(target("lo", 5.0, model), b, s));
      }
    }
  }
}

TEST_CASE("perceived target cost is strictly convex") {
  const double h = 1e-3;
  for (const auto& model : kModels) {
    for (double g : kGammas) {
      const BehavioralModel b(g);
      for (double u : kCaseStudyLosses) {
        const auto t = target("x", u, model);
        for (int i = 0; i < 100; ++i) {
          const double s = h + (10.0 - h) * i / 99.0;
          const double second = perceived_target_cost(t, b, s + h) -
                                2.0 * perceived_target_cost(t, b, s) +
                                perceived_target_cost(t, b, s - h);
          CHECK(second > 1e-12);
        }
      }
    }
  }
}

TEST_CASE("marginal cost stays finite where the probability rounds to 0 or 1") {
  const BehavioralModel b(0.5);
  const auto tiny = target("x", 1.0, AttackProbabilityModel::exponential(1e-300));
  CHECK(std::isfinite(marginal_perceived_cost(tiny, b, 0.0)));
  CHECK(marginal_perceived_cost(target("x", 1.0), b, 800.0) <= 0.0);
  CHECK_THROWS_AS(marginal_perceived_cost(target("x", 1.0), b, -1.0), DomainError);
}

TEST_CASE("network construction validates its structure") {
  const auto t1 = target("t1", 3.0);
  const auto t2 = target("t2", 2.0);
  const auto s1 = source("s1", 1.0);
  SUBCASE("complete network has every edge") {
    const auto net = TransportNetwork::complete({t1, t2}, {s1, source("s2", 2.0)});
    CHECK(net.edge_count() == 4);
    CHECK(net.is_complete());
    CHECK(net.find_edge(1, 1).has_value());
  }
  SUBCASE("duplicate ids") {
    CHECK_THROWS_AS(TransportNetwork::complete({t1, t1}, {s1}), InvalidInputError);
  }
  SUBCASE("dangling edge endpoint") {
    CHECK_THROWS_AS(TransportNetwork({t1}, {s1}, {{"t9", "s1"}}), InvalidInputError);
  }
  SUBCASE("duplicate edge") {
    CHECK_THROWS_AS(TransportNetwork({t1}, {s1}, {{"t1", "s1"}, {"t1", "s1"}}),
                    InvalidInputError);
  }
  SUBCASE("isolated target") {
    CHECK_THROWS_AS(TransportNetwork({t1, t2}, {s1}, {{"t1", "s1"}}), InvalidInputError);
  }
  SUBCASE("invalid specs") {
    CHECK_THROWS_AS(TransportNetwork::complete({target("x", 0.0)}, {s1}), InvalidInputError);
    CHECK_THROWS_AS(TransportNetwork::complete({target("x", 1.0, AttackProbabilityModel::exponential(1.0), 2.0, 1.0)}, {s1}),
                    InvalidInputError);
    CHECK_THROWS_AS(TransportNetwork::complete({t1}, {source("y", 1.0, -0.1)}), InvalidInputError);
    CHECK_THROWS_AS(TransportNetwork::complete({t1}, {source("y", 1.0, 0.0, 2.0)}),
                    InvalidInputError);
  }
}

TEST_CASE("plan aggregates") {
  const auto net = TransportNetwork::complete({target("a", 3.0), target("b", 2.0)},
                                              {source("s", 5.0), source("r", 5.0)});
  std::vector<double> amounts(net.edge_count(), 0.0);
  amounts[*net.find_edge(0, 0)] = 1.0;
  amounts[*net.find_edge(0, 1)] = 2.0;
  amounts[*net.find_edge(1, 1)] = 4.0;
  CHECK(aggregate_at_target(net, amounts, 0) == 3.0);
  CHECK(aggregate_at_target(net, amounts, 1) == 4.0);
  CHECK(aggregate_at_source(net, amounts, 0) == 1.0);
  CHECK(aggregate_at_source(net, amounts, 1) == 6.0);
  CHECK(source_utility(net, amounts) == 0.0);
}
