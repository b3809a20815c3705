#include <benchmark/benchmark.h>

#include "cdc/auction.hpp"
#include "cdc/hedonic.hpp"
#include "cdc/polycode.hpp"
#include "cdc/simulate.hpp"

namespace {

using namespace cdc;

void BM_EquilibriumTable(benchmark::State& state) {
  auto schedule = auction::make_reward_schedule(RewardKind::arithmetic, 4, 1.0, 0.05);
  auction::EquilibriumBid::Options options;
  options.grid_points = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auction::EquilibriumBid eq(schedule, 10, ValuationDistribution::uniform(0.0, 1.0), CostModel{},
                               options);
    benchmark::DoNotOptimize(eq.max_bid());
  }
}
BENCHMARK(BM_EquilibriumTable)->Arg(128)->Arg(512)->Arg(2048);

void BM_ValuationForBid(benchmark::State& state) {
  auto schedule = auction::make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
  auction::EquilibriumBid eq(schedule, 10, ValuationDistribution::uniform(0.0, 1.0), CostModel{});
  double tau = 0.37 * eq.max_bid();
  for (auto _ : state) benchmark::DoNotOptimize(eq.valuation_for_bid(tau));
}
BENCHMARK(BM_ValuationForBid);

void BM_Decode(benchmark::State& state) {
  polycode::PrimeField field;
  Rng rng(1);
  auto size = static_cast<std::size_t>(state.range(0));
  auto a = polycode::random_matrix(size, size, field, rng);
  auto b = polycode::random_matrix(size, size, field, rng);
  auto shares = polycode::encode(a, b, 2, 2, polycode::default_eval_points(6), field);
  std::vector<polycode::CodedResult> results;
  for (const auto& s : shares) results.push_back(polycode::local_compute(s, field));
  for (auto _ : state) benchmark::DoNotOptimize(polycode::decode(results, 2, 2, field));
}
BENCHMARK(BM_Decode)->Arg(16)->Arg(64)->Arg(256);

void BM_FormCoalitions(benchmark::State& state) {
  auto config = reference_scenario();
  hedonic::Roster roster(config.workers, config.heads);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto result = hedonic::form_coalitions(roster, hedonic::RandomInit{seed++});
    benchmark::DoNotOptimize(result.log.size());
  }
}
BENCHMARK(BM_FormCoalitions);

void BM_SimulationRound(benchmark::State& state) {
  simulate::Simulation sim(reference_scenario());
  std::uint64_t round = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.run_round(simulate::Scheme::coalition_auction, round++));
  }
}
BENCHMARK(BM_SimulationRound);

}  // namespace

BENCHMARK_MAIN();
