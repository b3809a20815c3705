#include "cdc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "cdc/auction.hpp"
#include "cdc/polycode.hpp"

namespace cdc {

double WorkerSpec::comm_cost_to(const Id& head) const {
  auto it = comm_cost_overrides.find(head);
  return it == comm_cost_overrides.end() ? comm_cost : it->second;
}

const std::set<Id>& Partition::members(const Id& head) const {
  auto it = coalitions.find(head);
  if (it == coalitions.end()) {
    throw std::out_of_range(fmt::format("partition: unknown cluster head '{}'", head));
  }
  return it->second;
}

std::optional<Id> Partition::head_of(const Id& worker) const {
  for (const auto& [head, members] : coalitions) {
    if (members.count(worker) != 0) return head;
  }
  return std::nullopt;
}

std::vector<std::string> partition_violations(const Partition& partition,
                                              std::span<const WorkerSpec> workers,
                                              std::span<const ClusterHeadSpec> heads) {
  std::vector<std::string> out;
  std::set<Id> head_ids;
  for (const auto& h : heads) head_ids.insert(h.id);
  std::set<Id> worker_ids;
  for (const auto& w : workers) worker_ids.insert(w.id);

  if (partition.coalitions.size() != head_ids.size()) {
    out.push_back(fmt::format("partition: {} coalitions for {} cluster heads",
                              partition.coalitions.size(), head_ids.size()));
  }
  std::set<Id> seen;
  for (const auto& [head, members] : partition.coalitions) {
    if (head_ids.count(head) == 0) {
      out.push_back(fmt::format("partition: unknown cluster head '{}'", head));
    }
    for (const auto& w : members) {
      if (worker_ids.count(w) == 0) {
        out.push_back(fmt::format("partition: unknown worker '{}' in coalition of '{}'", w, head));
      } else if (!seen.insert(w).second) {
        out.push_back(fmt::format("partition: worker '{}' appears in more than one coalition", w));
      }
    }
  }
  for (const auto& w : worker_ids) {
    if (seen.count(w) == 0) {
      out.push_back(fmt::format("partition: worker '{}' is not assigned to any coalition", w));
    }
  }
  return out;
}

double RewardSchedule::at_rank(std::size_t k) const {
  if (k == 0) throw std::out_of_range("RewardSchedule::at_rank: ranks start at 1");
  return k <= rewards.size() ? rewards[k - 1] : 0.0;
}

std::vector<std::string> reward_schedule_violations(const RewardSchedule& schedule) {
  std::vector<std::string> out;
  const auto& m = schedule.rewards;
  if (m.empty()) {
    out.push_back("rewards: schedule is empty (K must be at least 1)");
    return out;
  }
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (m[k] > m[k - 1]) {
      out.push_back(fmt::format(
          "rewards: ordering violated, M_{} = {:.9g} exceeds M_{} = {:.9g} (need M_1 >= ... >= M_K)",
          k + 1, m[k], k, m[k - 1]));
      break;
    }
  }
  if (!(m.back() > 0.0)) {
    out.push_back(fmt::format("rewards: M_K = {:.9g} must be positive", m.back()));
  }
  double sum = 0.0;
  for (double x : m) sum += x;
  double scale = std::max(1.0, std::fabs(schedule.total));
  if (std::fabs(sum - schedule.total) > 1e-9 * scale) {
    out.push_back(fmt::format("rewards: sum of M_k = {:.9g} differs from sigma = {:.9g}", sum,
                              schedule.total));
  }
  return out;
}

const char* to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::homogeneous: return "homogeneous";
    case RewardKind::arithmetic: return "arithmetic";
    case RewardKind::geometric: return "geometric";
    case RewardKind::winner_take_all: return "winner_take_all";
    case RewardKind::explicit_values: return "explicit";
  }
  return "unknown";
}

std::optional<RewardKind> parse_reward_kind(std::string_view text) {
  for (RewardKind k : {RewardKind::homogeneous, RewardKind::arithmetic, RewardKind::geometric,
                       RewardKind::winner_take_all, RewardKind::explicit_values}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

ValuationDistribution ValuationDistribution::uniform(double lo, double hi) {
  ValuationDistribution d;
  d.kind_ = Kind::uniform;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

ValuationDistribution ValuationDistribution::tabulated(
    std::vector<std::pair<double, double>> knots) {
  ValuationDistribution d;
  d.kind_ = Kind::tabulated;
  if (!knots.empty()) {
    d.lo_ = knots.front().first;
    d.hi_ = knots.back().first;
  }
  d.knots_ = std::move(knots);
  return d;
}

namespace {

// Index of the knot segment [k_i, k_{i+1}] holding v, clamped to the ends.
std::size_t segment_of(const std::vector<std::pair<double, double>>& knots, double v) {
  auto it = std::upper_bound(knots.begin(), knots.end(), v,
                             [](double x, const auto& knot) { return x < knot.first; });
  std::size_t idx = static_cast<std::size_t>(it - knots.begin());
  if (idx == 0) return 0;
  return std::min(idx - 1, knots.size() - 2);
}

}  // namespace

double ValuationDistribution::cdf(double v) const {
  if (v <= lo_) return 0.0;
  if (v >= hi_) return 1.0;
  if (kind_ == Kind::uniform) return (v - lo_) / (hi_ - lo_);
  std::size_t i = segment_of(knots_, v);
  const auto& [x0, f0] = knots_[i];
  const auto& [x1, f1] = knots_[i + 1];
  return f0 + (f1 - f0) * (v - x0) / (x1 - x0);
}

double ValuationDistribution::pdf(double v) const {
  if (v < lo_ || v > hi_) return 0.0;
  if (kind_ == Kind::uniform) return 1.0 / (hi_ - lo_);
  std::size_t i = segment_of(knots_, v);
  const auto& [x0, f0] = knots_[i];
  const auto& [x1, f1] = knots_[i + 1];
  return (f1 - f0) / (x1 - x0);
}

double ValuationDistribution::quantile(double u) const {
  if (u <= 0.0) return lo_;
  if (u >= 1.0) return hi_;
  if (kind_ == Kind::uniform) return lo_ + u * (hi_ - lo_);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const auto& [x0, f0] = knots_[i];
    const auto& [x1, f1] = knots_[i + 1];
    if (u <= f1 && f1 > f0) return x0 + (x1 - x0) * (u - f0) / (f1 - f0);
  }
  return hi_;
}

std::vector<double> ValuationDistribution::breakpoints() const {
  if (kind_ == Kind::uniform) return {lo_, hi_};
  std::vector<double> out;
  out.reserve(knots_.size());
  for (const auto& k : knots_) out.push_back(k.first);
  return out;
}

std::vector<std::string> distribution_violations(const ValuationDistribution& dist) {
  std::vector<std::string> out;
  if (!std::isfinite(dist.lo()) || !std::isfinite(dist.hi()) || !(dist.lo() < dist.hi())) {
    out.push_back(fmt::format("valuation: support [{:.9g}, {:.9g}] is empty or not finite",
                              dist.lo(), dist.hi()));
    return out;
  }
  if (dist.kind() == ValuationDistribution::Kind::tabulated) {
    const auto& k = dist.knots();
    if (k.size() < 2) {
      out.push_back("valuation: tabulated distribution needs at least two knots");
      return out;
    }
    if (k.front().second != 0.0 || k.back().second != 1.0) {
      out.push_back("valuation: tabulated CDF must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < k.size(); ++i) {
      if (!(k[i].first > k[i - 1].first)) {
        out.push_back("valuation: tabulated knots must have strictly increasing valuations");
        break;
      }
      if (k[i].second < k[i - 1].second) {
        out.push_back("valuation: tabulated CDF must be nondecreasing");
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> validate(const ScenarioConfig& config) {
  std::vector<std::string> out;
  auto add = [&](std::string msg) { out.push_back(std::move(msg)); };
  auto append = [&](const std::vector<std::string>& more) {
    out.insert(out.end(), more.begin(), more.end());
  };

  std::set<Id> head_ids;
  for (const auto& h : config.heads) {
    if (h.id.empty()) add("heads: empty cluster-head id");
    if (!head_ids.insert(h.id).second) add(fmt::format("heads: duplicate id '{}'", h.id));
    if (!(h.cpu_power > 0.0)) add(fmt::format("heads['{}'].cpu_power must be > 0", h.id));
    if (!(h.reward_pool >= 0.0)) add(fmt::format("heads['{}'].reward_pool must be >= 0", h.id));
  }
  std::set<Id> worker_ids;
  for (const auto& w : config.workers) {
    if (w.id.empty()) add("workers: empty worker id");
    if (!worker_ids.insert(w.id).second) add(fmt::format("workers: duplicate id '{}'", w.id));
    if (!(w.cpu_power > 0.0)) add(fmt::format("workers['{}'].cpu_power must be > 0", w.id));
    if (!(w.unit_cost >= 0.0)) add(fmt::format("workers['{}'].unit_cost must be >= 0", w.id));
    if (!(w.comm_cost >= 0.0)) add(fmt::format("workers['{}'].comm_cost must be >= 0", w.id));
    for (const auto& [head, mu] : w.comm_cost_overrides) {
      if (head_ids.count(head) == 0) {
        add(fmt::format("workers['{}'].comm_cost: unknown cluster head '{}'", w.id, head));
      }
      if (!(mu >= 0.0)) {
        add(fmt::format("workers['{}'].comm_cost['{}'] must be >= 0", w.id, head));
      }
    }
  }

  const auto& c = config.cost;
  for (auto [name, value] : {std::pair{"theta_p", c.theta_p}, {"theta_c", c.theta_c},
                             {"kappa", c.kappa}, {"cycles", c.cycles},
                             {"comm_energy", c.comm_energy}, {"scale", c.scale},
                             {"linear_coeff", c.linear_coeff}}) {
    if (!(value >= 0.0)) add(fmt::format("cost.{} must be >= 0", name));
  }
  if (c.kind == CostModel::Kind::quadratic && !(c.quadratic_coeff() > 0.0)) {
    add("cost: theta_p * kappa * cycles * scale must be > 0 for the quadratic cost to be invertible");
  }
  if (c.kind == CostModel::Kind::linear && !(c.linear_coeff > 0.0)) {
    add("cost.linear_coeff must be > 0 for the linear cost");
  }

  append(distribution_violations(config.valuation));

  try {
    RewardSchedule schedule = auction::resolve_rewards(config.rewards);
    append(reward_schedule_violations(schedule));
  } catch (const std::exception& e) {
    add(e.what());
  }
  if (config.rewards.count > 0 &&
      static_cast<std::size_t>(config.rewards.count) > config.heads.size()) {
    add(fmt::format("rewards.K = {} exceeds the number of cluster heads I = {}",
                    config.rewards.count, config.heads.size()));
  }

  const auto& code = config.code;
  if (code.m < 1 || code.n < 1) add("code: m and n must be >= 1");
  if (code.s < 1 || code.r < 1 || code.t < 1) add("code: matrix dimensions s, r, t must be >= 1");
  if (code.m >= 1 && code.r % code.m != 0) {
    add(fmt::format("code: m = {} does not divide r = {}", code.m, code.r));
  }
  if (code.n >= 1 && code.t % code.n != 0) {
    add(fmt::format("code: n = {} does not divide t = {}", code.n, code.t));
  }
  if (code.m * code.n > config.heads.size()) {
    add(fmt::format("code: recovery threshold m*n = {} exceeds the number of cluster heads I = {}",
                    code.m * code.n, config.heads.size()));
  }
  if (!polycode::is_prime(code.modulus)) {
    add(fmt::format("code.modulus = {} is not prime", code.modulus));
  }

  if (config.latency.kind == LatencyModel::Kind::shifted_exponential &&
      !(config.latency.jitter_rate > 0.0)) {
    add("latency.jitter_rate must be > 0 for the shifted-exponential model");
  }

  const auto& a = config.auction;
  if (!(a.phi >= 0.0)) add("auction.phi must be >= 0");
  if (!(a.quad_tol > 0.0)) add("auction.quad_tol must be > 0");
  if (a.grid_points < 256) add("auction.grid_points must be >= 256");

  if (config.hedonic.initial) {
    append(partition_violations(*config.hedonic.initial, config.workers, config.heads));
  }
  if (!config.workers.empty() && config.heads.empty()) {
    add("heads: at least one cluster head is needed to place workers");
  }

  if (config.sweep) {
    static const std::set<std::string> axes{"n_heads", "K", "reward_kind", "gamma", "eta"};
    if (axes.count(config.sweep->axis) == 0) {
      add(fmt::format("sweep.axis '{}' is not one of n_heads, K, reward_kind, gamma, eta",
                      config.sweep->axis));
    }
    if (config.sweep->values.empty()) add("sweep.values is empty");
  }

  if (!config.rng_seed) add("rng_seed: missing (set it in the config or pass --seed)");
  if (config.mc_rounds < 1) add("mc_rounds must be >= 1");
  return out;
}

ScenarioConfig reference_scenario() {
  ScenarioConfig cfg;
  const double head_power[] = {750, 1000, 1250, 1500, 1750};
  const double head_pool[] = {100, 90, 80, 70, 60};
  for (int i = 0; i < 5; ++i) {
    cfg.heads.push_back({fmt::format("CH{}", i + 1), head_power[i], head_pool[i]});
  }
  for (int j = 0; j < 8; ++j) {
    WorkerSpec w;
    w.id = fmt::format("W{}", j + 1);
    w.cpu_power = 100.0 + 50.0 * j;
    w.unit_cost = 0.01 * (j + 1);
    w.comm_cost = 2.0;
    cfg.workers.push_back(std::move(w));
  }
  cfg.rewards = {RewardKind::homogeneous, 4, 1.0, 0.0, {}};
  cfg.rng_seed = 2021;
  return cfg;
}

}  // namespace cdc
