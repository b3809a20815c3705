#include <doctest.h>

#include <cmath>

#include "cdc/auction.hpp"

using namespace cdc;
using namespace cdc::auction;

namespace {

// theta_p * kappa * a * scale = 1, so the bid cost is tau^2.
CostModel unit_cost() {
  CostModel c;
  c.scale = 1.0 / (c.theta_p * c.kappa * c.cycles);
  return c;
}

const ValuationDistribution kUniform = ValuationDistribution::uniform(0.0, 1.0);

}  // namespace

TEST_SUITE("auction") {
  TEST_CASE("reward schedules") {
    auto hom = make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
    CHECK(hom.rewards == std::vector<double>(4, 0.25));
    auto ar = make_reward_schedule(RewardKind::arithmetic, 4, 1.0, 0.1);
    CHECK(ar.rewards[0] == doctest::Approx(0.4));
    CHECK(ar.rewards[3] == doctest::Approx(0.1));
    auto geo = make_reward_schedule(RewardKind::geometric, 3, 1.0, 0.5);
    CHECK(geo.rewards[0] == doctest::Approx(4.0 / 7.0));
    CHECK(geo.rewards[2] == doctest::Approx(1.0 / 7.0));
    auto wta = make_reward_schedule(RewardKind::winner_take_all, 1, 2.0);
    CHECK(wta.rewards == std::vector<double>{2.0});
    for (const auto& s : {hom, ar, geo, wta}) CHECK(reward_schedule_violations(s).empty());
  }

  TEST_CASE("reward schedule errors") {
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::arithmetic, 4, 1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::arithmetic, 4, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::geometric, 3, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::geometric, 3, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::homogeneous, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_reward_schedule(RewardKind::homogeneous, 2, 0.0), std::invalid_argument);
    CHECK(resolve_rewards({RewardKind::explicit_values, 2, 1.0, 0.0, {0.7, 0.3}}).rewards ==
          std::vector<double>{0.7, 0.3});
  }

  TEST_CASE("cost inversion") {
    auto c = unit_cost();
    CHECK(inverse_cost(bid_cost(3.0, c), c) == doctest::Approx(3.0));
    CostModel lin;
    lin.kind = CostModel::Kind::linear;
    lin.linear_coeff = 2.0;
    CHECK(inverse_cost(5.0, lin) == 2.5);
    CHECK_THROWS_AS(inverse_cost(-1.0, c), std::invalid_argument);
    ConvexCost convex{[](double t) { return t * t; }, 10.0};
    CHECK(inverse_cost(2.0, convex) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(inverse_cost(200.0, convex), std::invalid_argument);
  }

  TEST_CASE("winner-take-all closed form") {
    // Cost level (I-1)/I v^I, so beta = sqrt(0.8 v^5) for I = 5.
    EquilibriumBid eq(make_reward_schedule(RewardKind::winner_take_all, 1, 1.0), 5, kUniform,
                      unit_cost());
    for (std::size_t g = 0; g < eq.grid().size(); ++g) {
      double v = eq.grid()[g];
      double expected = std::sqrt(0.8 * std::pow(v, 5));
      CHECK(std::fabs(eq.bids()[g] - expected) <= 1e-6 * expected);
    }
    CHECK(eq.max_bid() == doctest::Approx(0.894427191).epsilon(1e-9));
    CHECK(eq(0.0) == 0.0);
  }

  TEST_CASE("frozen oracle values") {
    // Exact polynomial cost levels (tests/oracles/auction_oracle.py).
    auto ar = make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1);
    EquilibriumBid eq6(ar, 6, kUniform, unit_cost());
    CHECK(eq6.exact(0.5) == doctest::Approx(0.22067604461442267).epsilon(1e-10));
    CHECK(eq6.exact(0.9) == doctest::Approx(0.46706878508416723).epsilon(1e-10));
    CHECK(equilibrium_bid(0.5, ar, 6, kUniform, unit_cost()) ==
          doctest::Approx(0.22067604461442267).epsilon(1e-10));

    auto hom = make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
    EquilibriumBid eq10(hom, 10, kUniform, unit_cost());
    CHECK(eq10.exact(0.7) == doctest::Approx(0.31215638350032184).epsilon(1e-10));
    CHECK(master_expected_utility(eq10, 1.0, Method::formula).value ==
          doctest::Approx(-0.28126670053785836).epsilon(1e-9));

    auto geo = make_reward_schedule(RewardKind::geometric, 4, 1.0, 0.8);
    EquilibriumBid eqg(geo, 10, kUniform, unit_cost());
    CHECK(eqg.exact(0.3) == doctest::Approx(0.034016573869290218).epsilon(1e-9));
    CHECK(master_expected_utility(eqg, 1.0, Method::formula).value ==
          doctest::Approx(-0.27470724077878841).epsilon(1e-9));
  }

  TEST_CASE("table, exact and direct paths agree") {
    auto ar = make_reward_schedule(RewardKind::arithmetic, 4, 1.0, 0.05);
    EquilibriumBid eq(ar, 8, kUniform, unit_cost());
    for (double v : {0.013, 0.25, 0.5, 0.731, 0.999}) {
      double direct = equilibrium_bid(v, ar, 8, kUniform, unit_cost());
      CHECK(eq.exact(v) == doctest::Approx(direct).epsilon(1e-9));
      CHECK(eq(v) == doctest::Approx(direct).epsilon(1e-4));
    }
  }

  TEST_CASE("bids are nondecreasing and start at zero") {
    for (auto kind : {RewardKind::homogeneous, RewardKind::arithmetic, RewardKind::geometric}) {
      auto s = make_reward_schedule(kind, 3, 1.0, kind == RewardKind::geometric ? 0.7 : 0.1);
      auto tab = ValuationDistribution::tabulated({{0.0, 0.0}, {0.3, 0.6}, {1.0, 1.0}});
      EquilibriumBid eq(s, 7, tab, CostModel{});
      CHECK(eq.bids().front() == 0.0);
      for (std::size_t g = 1; g < eq.bids().size(); ++g) CHECK(eq.bids()[g] >= eq.bids()[g - 1]);
    }
  }

  TEST_CASE("valuation_for_bid inverts the bid function") {
    auto s = make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1);
    EquilibriumBid eq(s, 6, kUniform, CostModel{});
    for (double v : {0.05, 0.2, 0.5, 0.95}) {
      CHECK(eq.valuation_for_bid(eq.exact(v)) == doctest::Approx(v).epsilon(1e-12));
    }
    CHECK(eq.valuation_for_bid(0.0) == 0.0);
    CHECK(eq.valuation_for_bid(eq.max_bid()) == 1.0);
    CHECK_THROWS_AS(eq.valuation_for_bid(-1.0), std::domain_error);
    CHECK_THROWS_AS(eq.valuation_for_bid(eq.max_bid() * 1.01), std::domain_error);
    CHECK_THROWS_AS(bidder_expected_utility(0.5, eq.max_bid() * 2, eq), std::domain_error);
  }

  TEST_CASE("expected prize at the support ends") {
    auto s = make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1);
    CHECK(expected_prize(1.0, s, 6, kUniform) == doctest::Approx(s.rewards[0]));
    CHECK(expected_prize(0.0, s, 6, kUniform) == 0.0);
    auto all = make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1);
    CHECK(expected_prize(0.0, all, 3, kUniform) == doctest::Approx(all.rewards[2]));
  }

  TEST_CASE("equilibrium utility with K = I homogeneous rewards") {
    // Every bidder wins sigma / I regardless of the bid, so nobody bids.
    auto s = make_reward_schedule(RewardKind::homogeneous, 5, 1.0);
    EquilibriumBid eq(s, 5, kUniform, CostModel{});
    CHECK(eq.max_bid() == 0.0);
    CHECK(bidder_expected_utility(0.6, 0.0, eq) == doctest::Approx(0.6 * 0.2 - 5.0));
    CHECK(master_expected_utility(eq, 1.0, Method::formula).value == -1.0);
  }

  TEST_CASE("formula and Monte Carlo agree when every bidder wins") {
    auto s = make_reward_schedule(RewardKind::arithmetic, 5, 1.0, 0.05);
    EquilibriumBid eq(s, 5, kUniform, unit_cost());
    auto formula = master_expected_utility(eq, 1.0, Method::formula);
    auto mc = master_expected_utility(eq, 1.0, Method::monte_carlo, 20000, 1);
    CHECK(mc.rounds == 20000);
    CHECK(std::fabs(mc.value - formula.value) < 4.0 * mc.std_error);
    auto again = master_expected_utility(eq, 1.0, Method::monte_carlo, 20000, 1);
    CHECK(again.value == mc.value);
    CHECK_THROWS_AS(master_expected_utility(eq, 1.0, Method::monte_carlo, 0), std::invalid_argument);
  }

  TEST_CASE("winner-take-all gap") {
    auto hom = make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
    auto gap = winner_take_all_gap(5, kUniform, CostModel{}, 1.0, hom);
    CHECK(gap.applicable);
    CHECK(gap.gap == doctest::Approx(gap.multi - gap.single));
    CostModel lin;
    lin.kind = CostModel::Kind::linear;
    lin.linear_coeff = 1.0;
    CHECK_FALSE(winner_take_all_gap(5, kUniform, lin, 1.0, hom).applicable);
    CHECK_THROWS_AS(winner_take_all_gap(5, kUniform, CostModel{}, 1.0,
                                        make_reward_schedule(RewardKind::winner_take_all, 1, 1.0)),
                    std::invalid_argument);
  }

  TEST_CASE("settling an auction") {
    RewardSchedule s{{0.6, 0.4}, 1.0};
    CostModel c = unit_cost();
    std::vector<double> vals{0.2, 0.9, 0.5};
    std::vector<double> bids{0.1, 0.3, 0.2};
    Rng rng(1);
    auto out = settle_auction(vals, bids, s, c, true, rng);
    CHECK(out[1].rank == 1);
    CHECK(out[2].rank == 2);
    CHECK(out[0].rank == 3);
    CHECK(out[1].reward == 0.6);
    CHECK(out[0].reward == 0.0);
    CHECK(out[1].utility == doctest::Approx(0.9 * 0.6 - 0.09 - 5.0));
    CHECK(out[0].utility == doctest::Approx(-0.01 - 5.0));
    Rng rng2(1);
    auto no_comm = settle_auction(vals, bids, s, c, false, rng2);
    CHECK(no_comm[0].utility == doctest::Approx(-0.01));
  }

  TEST_CASE("exact ties are broken at random but reproducibly") {
    RewardSchedule s{{1.0}, 1.0};
    std::vector<double> vals{0.5, 0.5, 0.5};
    std::vector<double> bids{1.0, 1.0, 1.0};
    std::vector<int> wins(3, 0);
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
      Rng rng(seed);
      auto out = settle_auction(vals, bids, s, CostModel{}, true, rng);
      for (const auto& o : out) wins[o.bidder] += o.rank == 1;
      Rng again(seed);
      CHECK(settle_auction(vals, bids, s, CostModel{}, true, again)[0].rank == out[0].rank);
    }
    for (int w : wins) CHECK(std::abs(w - 1000) < 120);
  }

  TEST_CASE("run_auction ranks by valuation") {
    auto s = make_reward_schedule(RewardKind::homogeneous, 2, 1.0);
    EquilibriumBid eq(s, 4, kUniform, CostModel{});
    std::vector<double> vals{0.3, 0.8, 0.1, 0.6};
    Rng rng(4);
    auto out = run_auction(vals, eq, rng);
    CHECK(out[1].rank == 1);
    CHECK(out[3].rank == 2);
    CHECK(out[0].rank == 3);
    CHECK(out[2].rank == 4);
    std::vector<double> wrong{0.1};
    CHECK_THROWS_AS(run_auction(wrong, eq, rng), std::invalid_argument);
  }

  TEST_CASE("score integrals") {
    // int_0^v t * f_{1:1}(t) dt = v^2 / 2 for two bidders.
    CHECK(score_integral(0.6, 1, 2, kUniform) == doctest::Approx(0.18));
    CHECK_THROWS_AS(score_integral(0.6, 2, 2, kUniform), std::out_of_range);
  }
}
