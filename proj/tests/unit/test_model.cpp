#include <doctest.h>

#include <algorithm>

#include "cdc/model.hpp"

using namespace cdc;

namespace {

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("reference scenario is valid") {
    auto cfg = reference_scenario();
    CHECK(validate(cfg).empty());
    CHECK(cfg.heads.size() == 5);
    CHECK(cfg.workers.size() == 8);
    CHECK(cfg.workers[0].cpu_power == 100.0);
    CHECK(cfg.heads[0].reward_pool == 100.0);
  }

  TEST_CASE("K above the head count is a violation naming K") {
    auto cfg = reference_scenario();
    cfg.rewards.count = 6;
    auto problems = validate(cfg);
    REQUIRE_FALSE(problems.empty());
    CHECK(mentions(problems, "K = 6"));
  }

  TEST_CASE("a missing seed is a violation") {
    auto cfg = reference_scenario();
    cfg.rng_seed.reset();
    CHECK(mentions(validate(cfg), "rng_seed"));
  }

  TEST_CASE("code parameters") {
    auto cfg = reference_scenario();
    cfg.code.r = 5;
    CHECK(mentions(validate(cfg), "code"));
    cfg = reference_scenario();
    cfg.code.modulus = 2147483646;
    CHECK(mentions(validate(cfg), "prime"));
    cfg = reference_scenario();
    cfg.code.m = 3;
    cfg.code.r = 6;
    CHECK(mentions(validate(cfg), "code"));  // mn = 6 > 5 heads
  }

  TEST_CASE("reward schedule violations") {
    CHECK(reward_schedule_violations({{0.5, 0.3, 0.2}, 1.0}).empty());
    auto unordered = reward_schedule_violations({{0.2, 0.5, 0.3}, 1.0});
    REQUIRE(unordered.size() == 1);
    CHECK(unordered[0].find("ordering") != std::string::npos);
    auto wrong_sum = reward_schedule_violations({{0.5, 0.4}, 1.0});
    REQUIRE(wrong_sum.size() == 1);
    CHECK(wrong_sum[0].find("sigma") != std::string::npos);
    CHECK(reward_schedule_violations({{}, 1.0}).size() == 1);
    CHECK(mentions(reward_schedule_violations({{1.0, 0.0}, 1.0}), "positive"));
  }

  TEST_CASE("rank lookup pads with zeros") {
    RewardSchedule s{{0.6, 0.4}, 1.0};
    CHECK(s.at_rank(1) == 0.6);
    CHECK(s.at_rank(2) == 0.4);
    CHECK(s.at_rank(3) == 0.0);
    CHECK_THROWS_AS(s.at_rank(0), std::out_of_range);
  }

  TEST_CASE("partition violations") {
    std::vector<WorkerSpec> workers{{"W1", 1, 0, 0, {}}, {"W2", 1, 0, 0, {}}};
    std::vector<ClusterHeadSpec> heads{{"A", 1, 1}, {"B", 1, 1}};
    Partition ok{{{"A", {"W1"}}, {"B", {"W2"}}}};
    CHECK(partition_violations(ok, workers, heads).empty());
    Partition twice{{{"A", {"W1", "W2"}}, {"B", {"W2"}}}};
    CHECK(mentions(partition_violations(twice, workers, heads), "more than one"));
    Partition missing{{{"A", {"W1"}}, {"B", {}}}};
    CHECK(mentions(partition_violations(missing, workers, heads), "not assigned"));
    Partition unknown{{{"A", {"W1", "W9"}}, {"B", {"W2"}}}};
    CHECK(mentions(partition_violations(unknown, workers, heads), "W9"));
  }

  TEST_CASE("per-head communication costs") {
    WorkerSpec w{"W1", 100, 0.01, 2.0, {{"CH3", 5.0}}};
    CHECK(w.comm_cost_to("CH1") == 2.0);
    CHECK(w.comm_cost_to("CH3") == 5.0);
  }

  TEST_CASE("tabulated valuation distribution") {
    auto d = ValuationDistribution::tabulated({{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}});
    CHECK(distribution_violations(d).empty());
    CHECK(d.cdf(0.25) == doctest::Approx(0.4));
    CHECK(d.pdf(0.25) == doctest::Approx(1.6));
    CHECK(d.pdf(0.75) == doctest::Approx(0.4));
    for (double u : {0.1, 0.4, 0.8, 0.9}) CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u));
    CHECK(d.breakpoints() == std::vector<double>{0.0, 0.5, 1.0});
    auto bad = ValuationDistribution::tabulated({{0.0, 0.1}, {1.0, 1.0}});
    CHECK_FALSE(distribution_violations(bad).empty());
  }

  TEST_CASE("uniform valuation distribution") {
    auto d = ValuationDistribution::uniform(2.0, 4.0);
    CHECK(d.cdf(3.0) == 0.5);
    CHECK(d.pdf(3.0) == 0.5);
    CHECK(d.quantile(0.25) == 2.5);
    CHECK(d.cdf(1.0) == 0.0);
    CHECK(d.cdf(5.0) == 1.0);
  }

  TEST_CASE("reward kind names round-trip") {
    for (auto k : {RewardKind::homogeneous, RewardKind::arithmetic, RewardKind::geometric,
                   RewardKind::winner_take_all, RewardKind::explicit_values}) {
      CHECK(parse_reward_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_reward_kind("lottery").has_value());
  }
}
