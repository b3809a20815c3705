#include "cdc/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cdc/orderstats.hpp"

namespace cdc::auction {

using orderstats::OrderStatQuery;

double bid_cost(double tau, const CostModel& cost) {
  if (cost.kind == CostModel::Kind::linear) return cost.linear_coeff * tau;
  return cost.quadratic_coeff() * tau * tau;
}

double inverse_cost(double y, const CostModel& cost) {
  if (y < 0.0) throw std::invalid_argument(fmt::format("inverse_cost: negative cost level {}", y));
  if (cost.kind == CostModel::Kind::linear) {
    if (!(cost.linear_coeff > 0.0)) throw std::invalid_argument("inverse_cost: linear_coeff <= 0");
    return y / cost.linear_coeff;
  }
  double q = cost.quadratic_coeff();
  if (!(q > 0.0)) throw std::invalid_argument("inverse_cost: quadratic coefficient <= 0");
  return std::sqrt(y / q);
}

double inverse_cost(double y, const ConvexCost& cost) {
  if (y < 0.0) throw std::invalid_argument(fmt::format("inverse_cost: negative cost level {}", y));
  if (!cost.cost) throw std::invalid_argument("inverse_cost: empty cost function");
  if (cost.cost(cost.tau_max) < y) {
    throw std::invalid_argument(fmt::format(
        "inverse_cost: tau_max = {} does not bracket cost level {}", cost.tau_max, y));
  }
  double lo = 0.0;
  double hi = cost.tau_max;
  for (int i = 0; i < 400 && hi - lo > 1e-10 * hi; ++i) {
    double mid = 0.5 * (lo + hi);
    (cost.cost(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RewardSchedule make_reward_schedule(RewardKind kind, int count, double sigma, double param) {
  if (count < 1) throw std::invalid_argument("rewards: K must be at least 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("rewards: sigma must be positive");
  auto K = static_cast<std::size_t>(count);
  RewardSchedule s{{}, sigma};
  switch (kind) {
    case RewardKind::homogeneous:
      s.rewards.assign(K, sigma / count);
      break;
    case RewardKind::arithmetic: {
      if (!(param > 0.0)) throw std::invalid_argument("rewards: arithmetic gamma must be > 0");
      double first = (sigma + param * count * (count - 1) / 2.0) / count;
      for (std::size_t k = 0; k < K; ++k) s.rewards.push_back(first - param * static_cast<double>(k));
      if (!(s.rewards.back() > 0.0)) {
        throw std::invalid_argument(fmt::format(
            "rewards: arithmetic gamma = {} makes M_{} = {} <= 0", param, K, s.rewards.back()));
      }
      break;
    }
    case RewardKind::geometric: {
      if (!(param >= 0.0 && param <= 1.0)) {
        throw std::invalid_argument("rewards: geometric eta must lie in [0, 1]");
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < K; ++k) norm += std::pow(param, static_cast<double>(k));
      for (std::size_t k = 0; k < K; ++k) {
        s.rewards.push_back(sigma * std::pow(param, static_cast<double>(k)) / norm);
      }
      if (!(s.rewards.back() > 0.0)) {
        throw std::invalid_argument(
            fmt::format("rewards: geometric eta = {} makes M_{} = 0", param, K));
      }
      break;
    }
    case RewardKind::winner_take_all:
      s.rewards = {sigma};
      break;
    case RewardKind::explicit_values:
      throw std::invalid_argument("rewards: explicit schedules are given as values");
  }
  return s;
}

RewardSchedule resolve_rewards(const RewardSpec& spec) {
  if (spec.kind == RewardKind::explicit_values) return RewardSchedule{spec.values, spec.sigma};
  return make_reward_schedule(spec.kind, spec.count, spec.sigma, spec.param);
}

double score_integral(double v, int k, int n_bidders, const ValuationDistribution& dist,
                      double abs_tol) {
  if (k < 1 || k > n_bidders - 1) {
    throw std::out_of_range(
        fmt::format("score_integral: rank {} outside 1..{}", k, n_bidders - 1));
  }
  OrderStatQuery q{k, n_bidders - 1};
  auto bp = dist.breakpoints();
  return integrate_piecewise(
      [&](double t) { return t * orderstats::pdf_kth_highest(q, dist, t); }, dist.lo(), v, bp,
      abs_tol);
}

double equilibrium_bid(double v, const RewardSchedule& rewards, int n_bidders,
                       const ValuationDistribution& dist, const CostModel& cost,
                       double abs_tol) {
  double level = 0.0;
  for (int k = 1; k <= n_bidders - 1; ++k) {
    double step = rewards.at_rank(k) - rewards.at_rank(k + 1);
    if (step != 0.0) level += step * score_integral(v, k, n_bidders, dist, abs_tol);
  }
  return inverse_cost(std::max(level, 0.0), cost);
}

double expected_prize(double w, const RewardSchedule& rewards, int n_bidders,
                      const ValuationDistribution& dist) {
  int n = n_bidders - 1;
  double total = 0.0;
  double below = 0.0;  // F_{k-1:n}(w)
  for (int k = 1; k <= n_bidders; ++k) {
    double upto = orderstats::cdf_kth_highest({k, n}, dist, w);
    total += (upto - below) * rewards.at_rank(k);
    below = upto;
  }
  return total;
}

EquilibriumBid::EquilibriumBid(RewardSchedule rewards, int n_bidders, ValuationDistribution dist,
                               CostModel cost, Options options)
    : rewards_(std::move(rewards)),
      n_bidders_(n_bidders),
      dist_(std::move(dist)),
      cost_(cost),
      options_(options) {
  if (n_bidders_ < 1) throw std::invalid_argument("EquilibriumBid: need at least one bidder");
  if (options_.grid_points < 2) throw std::invalid_argument("EquilibriumBid: grid_points < 2");
  if (rewards_.size() > static_cast<std::size_t>(n_bidders_)) {
    spdlog::warn("auction: K = {} exceeds the {} bidders; prizes beyond rank {} are never paid",
                 rewards_.size(), n_bidders_, n_bidders_);
  }
  for (int k = 1; k <= n_bidders_ - 1; ++k) {
    double step = rewards_.at_rank(k) - rewards_.at_rank(k + 1);
    if (step != 0.0) steps_.emplace_back(k, step);
  }
  breakpoints_ = dist_.breakpoints();

  auto G = static_cast<std::size_t>(options_.grid_points);
  double lo = dist_.lo();
  double hi = dist_.hi();
  grid_.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    grid_[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(G - 1);
  }
  grid_.back() = hi;

  levels_.assign(G, 0.0);
  for (std::size_t g = 0; g + 1 < G; ++g) {
    levels_[g + 1] = level_from_node(g, grid_[g + 1]);
  }
  bids_.resize(G);
  for (std::size_t g = 0; g < G; ++g) bids_[g] = inverse_cost(levels_[g], cost_);
}

// t * sum_k (M_k - M_{k+1}) f_{k:I-1}(t): the derivative of the cost level.
double EquilibriumBid::marginal(double t) const {
  double sum = 0.0;
  for (const auto& [k, step] : steps_) {
    sum += step * orderstats::pdf_kth_highest({k, n_bidders_ - 1}, dist_, t);
  }
  return t * sum;
}

std::size_t EquilibriumBid::node_below(double v) const {
  std::size_t last = grid_.size() - 2;
  double pos = (v - grid_.front()) / (grid_.back() - grid_.front()) *
               static_cast<double>(grid_.size() - 1);
  auto g = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(last)));
  while (g > 0 && grid_[g] > v) --g;
  while (g < last && grid_[g + 1] <= v) ++g;
  return g;
}

double EquilibriumBid::level_from_node(std::size_t node, double v) const {
  if (steps_.empty() || v <= grid_[node]) return levels_[node];
  double tol = options_.abs_tol / static_cast<double>(grid_.size() - 1);
  double seg = integrate_piecewise([this](double t) { return marginal(t); }, grid_[node], v,
                                   breakpoints_, tol);
  return levels_[node] + std::max(seg, 0.0);
}

double EquilibriumBid::operator()(double v) const {
  v = std::clamp(v, grid_.front(), grid_.back());
  std::size_t g = node_below(v);
  double w = (v - grid_[g]) / (grid_[g + 1] - grid_[g]);
  return bids_[g] + std::clamp(w, 0.0, 1.0) * (bids_[g + 1] - bids_[g]);
}

double EquilibriumBid::cost_level(double v) const {
  if (v < grid_.front() || v > grid_.back()) {
    throw std::domain_error(fmt::format("EquilibriumBid: v = {} outside the valuation support", v));
  }
  return level_from_node(node_below(v), v);
}

double EquilibriumBid::exact(double v) const { return inverse_cost(cost_level(v), cost_); }

double EquilibriumBid::valuation_for_bid(double tau) const {
  if (tau < 0.0 || tau > max_bid() * (1.0 + 1e-12)) {
    throw std::domain_error(fmt::format("valuation_for_bid: tau = {:.9g} outside [0, {:.9g}]", tau,
                                        max_bid()));
  }
  double y = bid_cost(tau, cost_);
  if (y <= levels_.front()) return grid_.front();
  if (y >= levels_.back()) return grid_.back();
  auto it = std::lower_bound(levels_.begin() + 1, levels_.end(), y);
  auto g = static_cast<std::size_t>(it - levels_.begin()) - 1;
  double a = grid_[g];
  double b = grid_[g + 1];
  if (levels_[g + 1] <= levels_[g]) return a;
  if (y == levels_[g + 1]) return b;

  double guess = a + (b - a) * (y - levels_[g]) / (levels_[g + 1] - levels_[g]);
  auto residual = [&](double w) {
    return std::make_pair(level_from_node(g, w) - y, marginal(w));
  };
  std::uintmax_t iterations = 64;
  return boost::math::tools::newton_raphson_iterate(residual, guess, a, b, 50, iterations);
}

double bidder_expected_utility(double v, double tau, const EquilibriumBid& eq) {
  double w = eq.valuation_for_bid(tau);
  return v * expected_prize(w, eq.rewards(), eq.n_bidders(), eq.distribution()) -
         bid_cost(tau, eq.cost()) - eq.cost().fixed_cost();
}

MasterUtility master_expected_utility(const EquilibriumBid& eq, double phi, Method method,
                                      std::size_t mc_rounds, std::uint64_t seed) {
  const auto& dist = eq.distribution();
  double sigma = eq.rewards().total;
  std::size_t winners = std::min(eq.rewards().size(), static_cast<std::size_t>(eq.n_bidders()));
  MasterUtility out;
  out.method = method;

  if (method == Method::formula) {
    auto grid = eq.grid();
    auto bp = dist.breakpoints();
    // Bids can be many orders of magnitude above 1, so the tolerance scales with them.
    double tol = eq.options().abs_tol * std::max(1.0, eq.max_bid()) /
                 static_cast<double>(grid.size() - 1);
    double mean_bid = 0.0;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
      mean_bid += integrate_piecewise(
          [&](double v) { return eq.exact(v) * dist.pdf(v); }, grid[g], grid[g + 1], bp, tol);
    }
    out.value = phi * static_cast<double>(winners) * mean_bid - sigma;
    return out;
  }

  if (mc_rounds == 0) throw std::invalid_argument("master_expected_utility: mc_rounds must be >= 1");
  std::vector<double> bids(static_cast<std::size_t>(eq.n_bidders()));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < mc_rounds; ++r) {
    Rng rng(derive_seed(seed, r));
    for (auto& b : bids) b = eq(dist.quantile(rng.uniform()));
    std::partial_sort(bids.begin(), bids.begin() + static_cast<std::ptrdiff_t>(winners), bids.end(),
                      std::greater<>());
    double value =
        phi * std::accumulate(bids.begin(), bids.begin() + static_cast<std::ptrdiff_t>(winners), 0.0) -
        sigma;
    sum += value;
    sum_sq += value * value;
  }
  auto R = static_cast<double>(mc_rounds);
  out.value = sum / R;
  out.rounds = mc_rounds;
  if (mc_rounds > 1) {
    double var = std::max(0.0, (sum_sq - R * out.value * out.value) / (R - 1.0));
    out.std_error = std::sqrt(var / R);
  }
  return out;
}

GapReport winner_take_all_gap(int n_bidders, const ValuationDistribution& dist,
                              const CostModel& cost, double sigma,
                              const RewardSchedule& comparison, double phi,
                              EquilibriumBid::Options options) {
  if (comparison.size() < 2) {
    throw std::invalid_argument("winner_take_all_gap: comparison schedule needs K >= 2");
  }
  if (std::fabs(comparison.total - sigma) > 1e-9 * std::max(1.0, sigma)) {
    throw std::invalid_argument("winner_take_all_gap: comparison total differs from sigma");
  }
  GapReport report;
  report.applicable = cost.strictly_convex();
  EquilibriumBid single(make_reward_schedule(RewardKind::winner_take_all, 1, sigma), n_bidders,
                        dist, cost, options);
  EquilibriumBid multi(comparison, n_bidders, dist, cost, options);
  report.single = master_expected_utility(single, phi, Method::formula).value;
  report.multi = master_expected_utility(multi, phi, Method::formula).value;
  report.gap = report.multi - report.single;
  return report;
}

std::vector<BidderOutcome> settle_auction(std::span<const double> valuations,
                                          std::span<const double> bids,
                                          const RewardSchedule& rewards, const CostModel& cost,
                                          bool comm_cost_on_loss, Rng& rng) {
  if (valuations.size() != bids.size()) {
    throw std::invalid_argument("settle_auction: valuations and bids differ in length");
  }
  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), 0);
  // A uniform shuffle followed by a stable sort breaks exact ties uniformly.
  rng.shuffle(std::span<std::size_t>(order));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });

  std::vector<BidderOutcome> out(bids.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    std::size_t i = order[pos];
    auto rank = static_cast<int>(pos + 1);
    BidderOutcome& o = out[i];
    o.bidder = i;
    o.valuation = valuations[i];
    o.bid = bids[i];
    o.rank = rank;
    o.reward = rewards.at_rank(pos + 1);
    if (pos < rewards.size()) {
      o.utility = o.valuation * o.reward - bid_cost(o.bid, cost) - cost.fixed_cost();
    } else {
      o.utility = -bid_cost(o.bid, cost) - (comm_cost_on_loss ? cost.fixed_cost() : 0.0);
    }
  }
  return out;
}

std::vector<BidderOutcome> run_auction(std::span<const double> valuations,
                                       const EquilibriumBid& eq, Rng& rng,
                                       bool comm_cost_on_loss) {
  if (valuations.size() != static_cast<std::size_t>(eq.n_bidders())) {
    throw std::invalid_argument(fmt::format("run_auction: {} valuations for {} bidders",
                                            valuations.size(), eq.n_bidders()));
  }
  std::vector<double> bids;
  bids.reserve(valuations.size());
  for (double v : valuations) bids.push_back(eq(v));
  return settle_auction(valuations, bids, eq.rewards(), eq.cost(), comm_cost_on_loss, rng);
}

}  // namespace cdc::auction
