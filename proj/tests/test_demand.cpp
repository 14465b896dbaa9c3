#include <random>

#include <gtest/gtest.h>

#include "david/demand.hpp"
#include "david/simulation.hpp"
#include "oracles.hpp"

namespace {

using namespace david;

StudentType type(std::vector<double> v, std::vector<double> w, std::vector<double> e) {
  return {0, std::move(v), std::move(w), std::move(e)};
}

TEST(DemandDa, AllNegativeIsNone) {
  EXPECT_EQ(demand_da(type({-1, -2}, {1, 1}, {1, 1}), {-kInf, -kInf}).college, kUnmatched);
}

TEST(DemandDa, FavouriteAffordable) {
  EXPECT_EQ(demand_da(type({2, 1}, {0, 0}, {0.5, 0.5}), {0.4, 0.4}), (DemandOutcome{0, false}));
  EXPECT_EQ(demand_da(type({2, 1}, {0, 0}, {0.5, 0.5}), {0.6, 0.4}), (DemandOutcome{1, false}));
}

TEST(DemandDa, ExactEqualityIsAmbiguousWithoutHolder) {
  EXPECT_THROW(demand_da(type({2, 1}, {0, 0}, {0.5, 0.5}), {0.5, 0.4}), AmbiguousDemand);
  bool resolved = false;
  const auto d = demand_da(type({2, 1}, {0, 0}, {0.5, 0.5}), Cutoffs({0.5, 0.4}), TieHandling::prefer_regular, &resolved);
  EXPECT_TRUE(resolved);
  EXPECT_EQ(d.college, 0);
}

TEST(DemandQ, DisclosureSeatReached) {
  // One college: v 0.5 > gamma 0.2, e 0.3 < P^r 0.4, w 0.9 > P^d 0.7.
  const auto d = demand_q(type({0.5}, {0.9}, {0.3}), {0.4, 0.7}, 0.2);
  EXPECT_EQ(d, (DemandOutcome{0, true}));
  EXPECT_EQ(demand_q(type({0.5}, {0.6}, {0.3}), {0.4, 0.7}, 0.2).college, kUnmatched);
}

TEST(DemandQ, OpenRegularSeatsReduceToDa) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto t = type({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    const std::vector<double> pd{u(rng), u(rng), u(rng)};
    EXPECT_EQ(demand_q(t, {-kInf, -kInf, -kInf, pd[0], pd[1], pd[2]}, 0.1),
              demand_da(t, {-kInf, -kInf, -kInf}));
  }
}

TEST(DemandU, CheaperRegularOptionWins) {
  const auto t = type({1.0, 0.8}, {0.9, 0.3}, {0, 0});
  EXPECT_EQ(demand_u(t, {0.7, 0.4}, {0.5, 0.5}, 0.3), (DemandOutcome{1, false}));
  EXPECT_EQ(demand_u(t, {0.7, 0.4}, {0.5, 0.5}, 0.1), (DemandOutcome{0, true}));
}

TEST(DemandU, OpenCutoffsGiveFavourite) {
  const auto t = type({0.3, 1.2, -1.0}, {0, 0, 0}, {0, 0, 0});
  EXPECT_EQ(demand_u(t, {-kInf, -kInf, -kInf}, {0, 0, 0}, 0.5), (DemandOutcome{1, false}));
}

// Indicator system against a direct search over reachable options, on generic draws.
TEST(DemandOracle, AllThreeMechanismsMatchEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.2, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t n = 1 + trial % 4;
    StudentType t;
    std::vector<double> pr(n), pd(n), ew(n);
    for (std::size_t c = 0; c < n; ++c) {
      t.v.push_back(u(rng));
      t.w.push_back(u(rng));
      t.e.push_back(u(rng));
      pr[c] = u(rng);
      pd[c] = u(rng);
      ew[c] = u(rng);
    }
    const double gamma = std::uniform_real_distribution<double>(0, 0.3)(rng);
    std::vector<bool> reg(n), dis(n), none(n, false);

    for (std::size_t c = 0; c < n; ++c) reg[c] = t.e[c] > pr[c];
    auto o = oracle::best_option(t.v, reg, none, 0.0);
    EXPECT_EQ(demand_da(t, pr), (DemandOutcome{o.college, o.via_disclosure}));

    std::vector<double> sub = pr;
    sub.insert(sub.end(), pd.begin(), pd.end());
    for (std::size_t c = 0; c < n; ++c) dis[c] = t.w[c] > pd[c];
    o = oracle::best_option(t.v, reg, dis, gamma);
    EXPECT_EQ(demand_q(t, sub, gamma), (DemandOutcome{o.college, o.via_disclosure}));

    for (std::size_t c = 0; c < n; ++c) {
      reg[c] = ew[c] > pr[c];
      dis[c] = t.w[c] > pr[c];
    }
    o = oracle::best_option(t.v, reg, dis, gamma);
    EXPECT_EQ(demand_u(t, pr, ew, gamma), (DemandOutcome{o.college, o.via_disclosure}));
  }
}

TEST(AggregateDemand, SingleStudent) {
  const std::vector<StudentType> s{type({1, 0.5}, {0, 0}, {1, 1})};
  EXPECT_EQ(aggregate_demand(s, Cutoffs({-kInf, -kInf}), Mechanism::da), (std::vector<double>{1, 0}));
}

TEST(AggregateDemand, ClosedCollegesGiveZero) {
  const Economy econ = example1_economy();
  const Table ew = expected_payoff_table(econ);
  DemandParams p;
  p.gamma_i = econ.gamma_i;
  p.expected = &ew;
  EXPECT_EQ(aggregate_demand(econ.students, Cutoffs({kInf, kInf}), Mechanism::david_u, p), (std::vector<double>{0, 0}));
  EXPECT_EQ(aggregate_demand(econ.students, Cutoffs({kInf, kInf}), Mechanism::da), (std::vector<double>{0, 0}));
}

TEST(AggregateDemand, TwoStudentOpenCutoffs) {
  const Economy econ = example1_economy();
  EXPECT_EQ(aggregate_demand(econ.students, Cutoffs({-kInf, -kInf}), Mechanism::da), (std::vector<double>{1, 0}));
}

TEST(AggregateDemand, DavidUNeedsTable) {
  const Economy econ = example1_economy();
  EXPECT_THROW(aggregate_demand(econ.students, Cutoffs({1, 1}), Mechanism::david_u), InvalidInstance);
}

TEST(MarketClearing, Definition) {
  EXPECT_TRUE(check_market_clearing(Cutoffs({1, 2}), {0.5, 0.5}, {0.5, 0.5}, 1e-9).clears);
  EXPECT_FALSE(check_market_clearing(Cutoffs({1, 2}), {0.4, 0.5}, {0.5, 0.5}, 1e-9).clears);
  EXPECT_TRUE(check_market_clearing(Cutoffs({-kInf, 2}), {0.4, 0.5}, {0.5, 0.5}, 1e-9).clears);
  EXPECT_FALSE(check_market_clearing(Cutoffs({-kInf, 2}), {0.6, 0.5}, {0.5, 0.5}, 1e-9).clears);
}

}  // namespace
