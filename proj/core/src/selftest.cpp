#include "cdc/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cdc/auction.hpp"
#include "cdc/numeric.hpp"
#include "cdc/orderstats.hpp"
#include "cdc/polycode.hpp"

namespace cdc::selftest {
namespace {

CheckResult order_statistics() {
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    for (int k = 1; k <= n; ++k) {
      orderstats::OrderStatQuery q{k, n};
      for (int g = 0; g <= 10; ++g) {
        double v = g / 10.0;
        double integral = adaptive_simpson(
            [&](double t) { return orderstats::pdf_kth_highest(q, dist, t); }, 0.0, v, 1e-12);
        worst = std::max(worst, std::fabs(orderstats::cdf_kth_highest(q, dist, v) - integral));
      }
    }
  }
  return {"orderstats_cdf_matches_pdf", worst <= 1e-7, fmt::format("max |cdf - int pdf| = {:.3g}", worst)};
}

CheckResult bid_round_trip() {
  CostModel cost;
  cost.kappa = 1.0 / (cost.theta_p * cost.cycles);
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  auto schedule = auction::make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1);
  auction::EquilibriumBid eq(schedule, 6, dist, cost);
  double worst = 0.0;
  for (int g = 1; g <= 19; ++g) {
    double v = g / 20.0;
    worst = std::max(worst, std::fabs(eq.valuation_for_bid(eq.exact(v)) - v));
  }
  return {"bid_round_trip", worst <= 1e-9, fmt::format("max |beta^-1(beta(v)) - v| = {:.3g}", worst)};
}

CheckResult decode_subsets() {
  polycode::PrimeField field;
  Rng rng(20211);
  auto A = polycode::random_matrix(4, 4, field, rng);
  auto B = polycode::random_matrix(4, 4, field, rng);
  auto expected = polycode::transpose_multiply(A, B, field);
  auto shares = polycode::encode(A, B, 2, 2, polycode::default_eval_points(6), field);
  std::vector<polycode::CodedResult> results;
  for (const auto& s : shares) results.push_back(polycode::local_compute(s, field));
  int subsets = 0, exact = 0;
  for (unsigned mask = 0; mask < (1u << 6); ++mask) {
    if (__builtin_popcount(mask) != 4) continue;
    std::vector<polycode::CodedResult> chosen;
    for (unsigned i = 0; i < 6; ++i) {
      if (mask & (1u << i)) chosen.push_back(results[i]);
    }
    ++subsets;
    if (polycode::decode(chosen, 2, 2, field) == expected) ++exact;
  }
  return {"decode_any_4_of_6", exact == subsets, fmt::format("{}/{} subsets exact", exact, subsets)};
}

CheckResult multiple_rewards_beat_one() {
  CostModel cost;
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  auto homogeneous = auction::make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
  auto gap = auction::winner_take_all_gap(5, dist, cost, 1.0, homogeneous);
  return {"winner_take_all_gap_positive", gap.applicable && gap.gap > 0.0,
          fmt::format("gap = {:.9g} (single {:.9g}, multi {:.9g})", gap.gap, gap.single, gap.multi)};
}

}  // namespace

std::vector<CheckResult> run_all() {
  std::vector<CheckResult> out;
  for (auto check : {order_statistics, bid_round_trip, decode_subsets, multiple_rewards_beat_one}) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

int report(std::ostream& out, const std::vector<CheckResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 2;
}

}  // namespace cdc::selftest
