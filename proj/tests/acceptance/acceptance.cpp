// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cdc/auction.hpp"
#include "cdc/config_io.hpp"
#include "cdc/hedonic.hpp"
#include "cdc/orderstats.hpp"
#include "cdc/polycode.hpp"
#include "cdc/simulate.hpp"
#include "cli.hpp"

using namespace cdc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string config_path(const char* name) { return std::string(CDC_CONFIG_DIR) + "/" + name; }

CostModel unit_cost() {
  CostModel c;
  c.scale = 1.0 / (c.theta_p * c.kappa * c.cycles);
  return c;
}

Outcome switch_sequence() {
  auto config = load_config(config_path("fig2.json"));
  hedonic::Roster roster(config.workers, config.heads);
  auto result = hedonic::form_coalitions(roster, *config.hedonic.initial);
  const double expected[] = {89.0, 14.0, 19.0, 14.4, 16.8};
  const auto& trace = result.utility_trace.at("W1");
  if (trace.size() != 5) return {false, fmt::format("W1 trace has {} entries", trace.size())};
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::fabs(trace[i] - expected[i]));
  return {worst <= 0.05, fmt::format("W1 utilities {:.4g}, max deviation {:.3g}",
                                     fmt::join(trace, " -> "), worst)};
}

Outcome coalition_outcome() {
  auto config = load_config(config_path("fig2.json"));
  hedonic::Roster roster(config.workers, config.heads);
  auto result = hedonic::form_coalitions(roster, *config.hedonic.initial);
  const auto& ch1 = result.partition.members("CH1");
  return {ch1 == std::set<Id>{"W2", "W7"}, fmt::format("CH1 = {{{}}}", fmt::join(ch1, ", "))};
}

Outcome nash_stability() {
  Rng rng(20211);
  int stable = 0, switches = 0;
  const int instances = 100;
  for (int t = 0; t < instances; ++t) {
    auto n_workers = 1 + rng.next() % 12;
    auto n_heads = 1 + rng.next() % 6;
    std::vector<WorkerSpec> ws;
    for (std::size_t j = 0; j < n_workers; ++j) {
      ws.push_back({fmt::format("W{}", j + 1), rng.uniform(100.0, 500.0),
                    rng.uniform(0.0, 0.1), rng.uniform(0.0, 3.0), {}});
    }
    std::vector<ClusterHeadSpec> hs;
    for (std::size_t i = 0; i < n_heads; ++i) {
      hs.push_back({fmt::format("CH{}", i + 1), rng.uniform(500.0, 2000.0),
                    rng.uniform(50.0, 120.0)});
    }
    hedonic::Roster roster(ws, hs);
    auto result = hedonic::form_coalitions(roster, hedonic::RandomInit{rng.next()});
    switches += static_cast<int>(result.log.size());
    stable += hedonic::is_nash_stable(roster, result.partition) ? 1 : 0;
  }
  return {stable == instances,
          fmt::format("{}/{} Nash-stable, {} switches in total", stable, instances, switches)};
}

Outcome order_statistics() {
  using boost::math::quadrature::gauss_kronrod;
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  double worst_cdf = 0.0, worst_sum = 0.0;
  for (int n = 1; n <= 10; ++n) {
    for (int g = 1; g <= 20; ++g) {
      double v = g / 20.0;
      double sum = 0.0;
      for (int k = 1; k <= n; ++k) {
        orderstats::OrderStatQuery q{k, n};
        auto pdf = [&](double t) { return orderstats::pdf_kth_highest(q, dist, t); };
        double integral = gauss_kronrod<double, 61>::integrate(pdf, 0.0, v, 3, 1e-14);
        worst_cdf = std::max(worst_cdf,
                             std::fabs(orderstats::cdf_kth_highest(q, dist, v) - integral));
        sum += pdf(v);
      }
      worst_sum = std::max(worst_sum, std::fabs(sum - n * dist.pdf(v)));
    }
  }
  return {worst_cdf <= 1e-7 && worst_sum <= 1e-9,
          fmt::format("max |cdf - int pdf| = {:.3g}, max |sum pdf - n f| = {:.3g}", worst_cdf,
                      worst_sum)};
}

Outcome winner_take_all_closed_form() {
  auction::EquilibriumBid eq(auction::make_reward_schedule(RewardKind::winner_take_all, 1, 1.0),
                             5, ValuationDistribution::uniform(0.0, 1.0), unit_cost());
  double worst = 0.0;
  bool increasing = true;
  for (std::size_t g = 1; g < eq.grid().size(); ++g) {
    double v = eq.grid()[g];
    double closed = std::sqrt(0.8 * std::pow(v, 5));
    worst = std::max(worst, std::fabs(eq.bids()[g] - closed) / closed);
    increasing = increasing && eq.bids()[g] > eq.bids()[g - 1];
  }
  bool zero_at_lo = eq.bids().front() == 0.0;
  return {worst <= 1e-6 && increasing && zero_at_lo &&
              std::fabs(eq.max_bid() - 0.894427191) < 1e-9,
          fmt::format("max relative error {:.3g}, beta(1) = {:.9f}, increasing {}, beta(0) = {}",
                      worst, eq.max_bid(), increasing, eq.bids().front())};
}

Outcome best_response() {
  const int I = 6;
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  std::vector<RewardSchedule> schedules{
      auction::make_reward_schedule(RewardKind::homogeneous, 4, 1.0),
      auction::make_reward_schedule(RewardKind::arithmetic, 3, 1.0, 0.1),
      auction::make_reward_schedule(RewardKind::geometric, 4, 1.0, 0.8)};
  Rng rng(606);
  double worst = -std::numeric_limits<double>::infinity();
  int checked = 0, failed = 0;
  for (const auto& s : schedules) {
    auction::EquilibriumBid eq(s, I, dist, unit_cost());
    for (int t = 0; t < 10; ++t) {
      double v = rng.uniform();
      double bid = eq.exact(v);
      double at_bid = auction::bidder_expected_utility(v, bid, eq);
      double best = -std::numeric_limits<double>::infinity();
      const int points = 10000;
      for (int j = 0; j < points; ++j) {
        double tau = eq.max_bid() * j / (points - 1);
        best = std::max(best, auction::bidder_expected_utility(v, tau, eq));
      }
      double excess = best - at_bid;
      worst = std::max(worst, excess);
      failed += excess > 1e-9 ? 1 : 0;
      ++checked;
    }
  }
  return {failed == 0, fmt::format("{} valuations, largest grid gain over the equilibrium bid {:.3g}",
                                   checked, worst)};
}

Outcome winner_take_all_gap() {
  auto dist = ValuationDistribution::uniform(0.0, 1.0);
  auto hom = auction::make_reward_schedule(RewardKind::homogeneous, 4, 1.0);
  std::vector<std::string> parts;
  bool all = true;
  for (int I : {5, 10, 15}) {
    auto gap = auction::winner_take_all_gap(I, dist, CostModel{}, 1.0, hom);
    all = all && gap.applicable && gap.gap > 0.0;
    parts.push_back(fmt::format("I={}: {:.6g}", I, gap.gap));
  }
  return {all, fmt::format("gap {}", fmt::join(parts, ", "))};
}

Outcome reward_ordering() {
  auto config = load_config(config_path("reward_structures.json"));
  auto rows = simulate::reward_comparison(config, auction::Method::formula, 0, 0);
  double homogeneous = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> others;
  for (const auto& r : rows) {
    std::string label = r.param.empty() ? r.schedule_kind : r.schedule_kind + ":" + r.param;
    if (r.schedule_kind == "homogeneous") {
      homogeneous = r.master.value;
    } else if (r.schedule_kind != "winner_take_all") {
      others.emplace_back(label, r.master.value);
    }
  }
  bool pass = others.size() == 3 && !std::isnan(homogeneous);
  std::vector<std::string> parts;
  for (const auto& [label, value] : others) {
    pass = pass && homogeneous > value;
    parts.push_back(fmt::format("{} {:.6f}", label, value));
  }
  return {pass, fmt::format("I=10 homogeneous {:.6f} vs {}", homogeneous, fmt::join(parts, ", "))};
}

Outcome code_exactness() {
  Rng rng(909);
  int instances = 0, decodes = 0, mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    polycode::PrimeField field(t % 2 == 0 ? 2147483647ULL : (1ULL << 61) - 1);
    std::size_t heads = 4 + rng.next() % 7;
    std::size_t s = 1 + rng.next() % 5, r = 2 * (1 + rng.next() % 3), c = 2 * (1 + rng.next() % 3);
    auto a = polycode::random_matrix(s, r, field, rng);
    auto b = polycode::random_matrix(s, c, field, rng);
    auto expected = polycode::transpose_multiply(a, b, field);
    auto shares = polycode::encode(a, b, 2, 2, polycode::default_eval_points(heads), field);
    std::vector<polycode::CodedResult> results;
    for (const auto& sh : shares) results.push_back(polycode::local_compute(sh, field));

    auto try_subset = [&](const std::vector<std::size_t>& idx) {
      std::vector<polycode::CodedResult> chosen;
      for (auto i : idx) chosen.push_back(results[i]);
      ++decodes;
      if (!(polycode::decode(chosen, 2, 2, field) == expected)) ++mismatches;
    };
    if (heads <= 8) {
      std::vector<int> mask(heads, 0);
      std::fill(mask.end() - 4, mask.end(), 1);
      do {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < heads; ++i) {
          if (mask[i]) idx.push_back(i);
        }
        try_subset(idx);
      } while (std::next_permutation(mask.begin(), mask.end()));
    } else {
      std::vector<std::size_t> order(heads);
      std::iota(order.begin(), order.end(), 0);
      for (int k = 0; k < 50; ++k) {
        for (std::size_t i = heads - 1; i > 0; --i) std::swap(order[i], order[rng.next() % (i + 1)]);
        try_subset({order.begin(), order.begin() + 4});
      }
    }
    ++instances;
  }
  return {mismatches == 0, fmt::format("{} instances, {} decodes, {} mismatches", instances,
                                       decodes, mismatches)};
}

Outcome scheme_ordering() {
  simulate::Simulation sim(load_config(config_path("fig9.json")));
  auto rows = simulate::compare_schemes(sim, 100, 4);
  double auction = rows[0].mean_allocated_cpu;
  double random = rows[1].mean_allocated_cpu;
  double none = rows[2].mean_allocated_cpu;
  double ratio = auction / random;
  return {auction > random && random > none && ratio >= 1.5,
          fmt::format("mean CPU {:.1f} / {:.1f} / {:.1f} W, ratio {:.3f}", auction, random, none,
                      ratio)};
}

Outcome determinism() {
  struct Case {
    const char* config;
    std::vector<std::string> args;
    bool threaded;
  };
  const std::vector<Case> cases{
      {"fig2.json", {"coalition"}, false},
      {"fig4.json", {"equilibrium"}, false},
      {"fig7.json", {"equilibrium"}, false},
      {"reward_structures.json", {"rewards", "--method", "mc", "--rounds", "2000"}, false},
      {"fig9.json", {"simulate", "--rounds", "100"}, true},
      {"fig9.json", {"compare", "--rounds", "100"}, true},
  };
  auto run = [](std::vector<std::string> args, std::string& text) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    text = out.str();
    return code;
  };
  int runs = 0;
  for (const auto& c : cases) {
    std::vector<std::string> base = c.args;
    base.insert(base.end(), {"--config", config_path(c.config)});
    std::vector<std::vector<std::string>> variants{base, base};
    if (c.threaded) {
      variants[0].insert(variants[0].end(), {"--threads", "1"});
      variants[1].insert(variants[1].end(), {"--threads", "4"});
    }
    std::string first, second;
    if (run(variants[0], first) != 0 || run(variants[1], second) != 0) {
      return {false, fmt::format("{} {} failed", c.args[0], c.config)};
    }
    runs += 2;
    if (first != second || first.empty()) {
      return {false, fmt::format("{} on {} differs between runs", c.args[0], c.config)};
    }
  }
  return {true, fmt::format("{} runs over 5 configs, identical pairs", runs)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {1, "switch sequence of worker 1", 1.0, switch_sequence},
      {2, "coalition of the richest head", 1.0, coalition_outcome},
      {3, "Nash stability on random instances", 30.0, nash_stability},
      {4, "order-statistic consistency", 10.0, order_statistics},
      {5, "winner-take-all closed form", 5.0, winner_take_all_closed_form},
      {6, "equilibrium bids are best responses", 60.0, best_response},
      {7, "single reward is not optimal", 30.0, winner_take_all_gap},
      {8, "homogeneous rewards maximize master utility", 30.0, reward_ordering},
      {9, "polynomial code exactness", 60.0, code_exactness},
      {10, "allocation scheme ordering", 300.0, scheme_ordering},
      {11, "determinism across runs and threads", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = seconds < c.budget_seconds;
    bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %s (%.2f s of %.0f s): %s%s\n", pass ? "PASS" : "FAIL", c.number, c.name,
                seconds, c.budget_seconds, o.detail.c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
