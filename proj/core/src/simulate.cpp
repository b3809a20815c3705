#include "cdc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cdc/csv.hpp"
#include "cdc/polycode.hpp"

namespace cdc::simulate {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr std::size_t kCurvePoints = 101;
constexpr std::uint64_t kDecodeCheckEvery = 10;

auction::EquilibriumBid::Options bid_options(const AuctionOptions& a) {
  return {a.grid_points, a.quad_tol};
}

std::string param_label(const RewardSpec& spec) {
  if (spec.kind == RewardKind::arithmetic || spec.kind == RewardKind::geometric) {
    return format_real(spec.param);
  }
  return "";
}

double parse_number(const std::string& axis, const std::string& value) {
  try {
    std::size_t used = 0;
    double x = std::stod(value, &used);
    if (used == value.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(fmt::format("sweep: {} value '{}' is not a number", axis, value));
}

int parse_count(const std::string& axis, const std::string& value) {
  double x = parse_number(axis, value);
  if (x < 1.0 || x != std::floor(x) || x > 1e6) {
    throw std::invalid_argument(
        fmt::format("sweep: {} value '{}' is not a positive integer", axis, value));
  }
  return static_cast<int>(x);
}

void decode_into(RunResult& r, const Simulation& sim) {
  const ScenarioConfig& cfg = sim.config();
  const auto& code = cfg.code;
  std::size_t threshold = polycode::recovery_threshold(code.m, code.n);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < r.heads.size(); ++i) {
    if (std::isfinite(r.heads[i].completion_time)) order.push_back(i);
  }
  // Ties in completion time go to the smaller head id.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.heads[a].completion_time < r.heads[b].completion_time;
  });
  if (order.size() < threshold) {
    r.decode_ok = false;
    return;
  }
  order.resize(threshold);

  polycode::PrimeField field(code.modulus);
  auto task = coded_task(cfg, r.round);
  std::vector<polycode::CodedResult> results;
  for (std::size_t i : order) {
    results.push_back(polycode::local_compute(task.shares[i], field));
    r.heads[i].in_fastest = true;
    r.fastest.push_back(r.heads[i].head);
  }
  try {
    auto C = polycode::decode(results, code.m, code.n, field);
    r.decode_ok = true;
    if (r.round % kDecodeCheckEvery == 0) {
      r.decode_checked = true;
      if (C != polycode::transpose_multiply(task.a, task.b, field)) {
        spdlog::error("round {}: decoded product differs from A^T B", r.round);
        r.decode_ok = false;
      }
    }
  } catch (const polycode::DecodeError& e) {
    spdlog::warn("round {}: {}", r.round, e.what());
    r.decode_ok = false;
  }
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::coalition_auction: return "coalition_auction";
    case Scheme::coalition_random: return "coalition_random";
    case Scheme::no_coalition_random: return "no_coalition_random";
  }
  return "?";
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t round, Stream stream) {
  return derive_seed(derive_seed(seed, round), static_cast<std::uint64_t>(stream));
}

CodedTask coded_task(const ScenarioConfig& config, std::uint64_t round) {
  if (!config.rng_seed) throw std::invalid_argument("coded_task: rng_seed is required");
  const auto& code = config.code;
  polycode::PrimeField field(code.modulus);
  Rng rng(stream_seed(*config.rng_seed, round, Stream::matrices));
  CodedTask task;
  task.a = polycode::random_matrix(code.s, code.r, field, rng);
  task.b = polycode::random_matrix(code.s, code.t, field, rng);
  std::vector<Id> ids;
  for (const auto& h : config.heads) ids.push_back(h.id);
  std::sort(ids.begin(), ids.end());
  task.shares = polycode::encode(task.a, task.b, code.m, code.n,
                                 polycode::default_eval_points(ids.size()), field);
  for (std::size_t i = 0; i < ids.size(); ++i) task.shares[i].head = ids[i];
  return task;
}

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config)),
      seed_(config_.rng_seed ? *config_.rng_seed
                             : throw std::invalid_argument("simulation: rng_seed is required")),
      roster_(config_.workers, config_.heads),
      schedule_(auction::resolve_rewards(config_.rewards)),
      equilibrium_(schedule_, static_cast<int>(config_.heads.size()), config_.valuation,
                   config_.cost, bid_options(config_.auction)),
      formula_utility_(auction::master_expected_utility(equilibrium_, config_.auction.phi,
                                                        auction::Method::formula)
                           .value) {}

RunResult Simulation::run_round(Scheme scheme, std::uint64_t round) const {
  RunResult r;
  r.round = round;
  r.scheme = scheme;

  if (scheme == Scheme::no_coalition_random) {
    r.partition = hedonic::empty_partition(roster_);
  } else {
    hedonic::InitialAssignment init =
        config_.hedonic.initial
            ? hedonic::InitialAssignment{*config_.hedonic.initial}
            : hedonic::InitialAssignment{
                  hedonic::RandomInit{stream_seed(seed_, round, Stream::hedonic)}};
    r.partition = hedonic::form_coalitions(roster_, init).partition;
  }

  const auto& heads = roster_.heads();
  std::size_t I = heads.size();
  r.heads.resize(I);
  Rng val_rng(stream_seed(seed_, round, Stream::valuations));
  Rng bid_rng(stream_seed(seed_, round, Stream::random_bids));
  std::vector<double> valuations(I), bids(I);
  for (std::size_t i = 0; i < I; ++i) {
    HeadRound& h = r.heads[i];
    h.head = heads[i].id;
    const auto& members = r.partition.members(h.head);
    h.members.assign(members.begin(), members.end());
    h.budget = hedonic::coalition_value(r.partition, roster_, h.head);
    h.valuation = valuations[i] = config_.valuation.quantile(val_rng.uniform());
    double random_bid = bid_rng.uniform(0.0, h.budget);
    double bid = scheme == Scheme::coalition_auction ? equilibrium_(h.valuation) : random_bid;
    if (bid > h.budget) {
      bid = h.budget;
      ++r.clamped;
    }
    h.bid = bids[i] = bid;
  }
  if (r.clamped > 0) {
    spdlog::debug("round {} {}: {} of {} bids clamped to the coalition budget", round,
                  to_string(scheme), r.clamped, I);
  }

  Rng tie_rng(stream_seed(seed_, round, Stream::ties));
  auto outcomes = auction::settle_auction(valuations, bids, schedule_, config_.cost,
                                          config_.auction.include_comm_cost_on_loss, tie_rng);
  double paid = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    HeadRound& h = r.heads[i];
    h.rank = outcomes[i].rank;
    h.reward = outcomes[i].reward;
    h.utility = outcomes[i].utility;
    paid += h.reward;
    if (static_cast<std::size_t>(h.rank) <= schedule_.size()) r.total_allocated_cpu += h.bid;
  }

  Rng lat_rng(stream_seed(seed_, round, Stream::latency));
  for (auto& h : r.heads) {
    double jitter = config_.latency.kind == LatencyModel::Kind::shifted_exponential
                        ? lat_rng.exponential(config_.latency.jitter_rate)
                        : 0.0;
    h.completion_time = h.bid > 0.0 ? config_.cost.cycles / h.bid + jitter : kInfinity;
  }
  decode_into(r, *this);

  r.master_utility_formula = scheme == Scheme::coalition_auction
                                 ? formula_utility_
                                 : std::numeric_limits<double>::quiet_NaN();
  r.master_utility_realized = config_.auction.phi * r.total_allocated_cpu - paid;
  return r;
}

std::vector<RunResult> simulate_rounds(const Simulation& sim, Scheme scheme, std::size_t rounds,
                                       std::size_t threads) {
  std::vector<RunResult> out(rounds);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(rounds, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < rounds; i = next++) {
      try {
        out[i] = sim.run_round(scheme, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = rounds;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<SchemeSummary> compare_schemes(const Simulation& sim, std::size_t rounds,
                                           std::size_t threads) {
  if (rounds < 1) throw std::invalid_argument("compare_schemes: rounds must be >= 1");
  std::vector<SchemeSummary> out;
  for (Scheme scheme : kAllSchemes) {
    auto results = simulate_rounds(sim, scheme, rounds, threads);
    SchemeSummary s{scheme, rounds, 0.0, 0.0, 0.0};
    double sum = 0.0, sum_sq = 0.0, ok = 0.0;
    for (const auto& r : results) {
      sum += r.total_allocated_cpu;
      sum_sq += r.total_allocated_cpu * r.total_allocated_cpu;
      ok += r.decode_ok ? 1.0 : 0.0;
    }
    auto n = static_cast<double>(rounds);
    s.mean_allocated_cpu = sum / n;
    if (rounds > 1) {
      double var = std::max(0.0, (sum_sq - n * s.mean_allocated_cpu * s.mean_allocated_cpu) / (n - 1));
      s.std_error = std::sqrt(var / n);
    }
    s.decode_rate = ok / n;
    out.push_back(s);
  }
  return out;
}

std::vector<SweepPoint> expand_sweep(const ScenarioConfig& config) {
  int heads = static_cast<int>(config.heads.size());
  if (!config.sweep) return {{"", config, heads}};
  const auto& axis = config.sweep->axis;
  std::vector<SweepPoint> out;
  for (const auto& value : config.sweep->values) {
    SweepPoint p{value, config, heads};
    p.config.sweep.reset();
    RewardSpec& rw = p.config.rewards;
    if (axis == "n_heads") {
      p.bidders = parse_count(axis, value);
    } else if (axis == "K") {
      rw.count = parse_count(axis, value);
    } else if (axis == "gamma") {
      rw.kind = RewardKind::arithmetic;
      rw.param = parse_number(axis, value);
    } else if (axis == "eta") {
      rw.kind = RewardKind::geometric;
      rw.param = parse_number(axis, value);
    } else if (axis == "reward_kind") {
      // "kind" or "kind:param", e.g. "arithmetic:0.05".
      auto colon = value.find(':');
      auto kind = parse_reward_kind(value.substr(0, colon));
      if (!kind || *kind == RewardKind::explicit_values) {
        throw std::invalid_argument(fmt::format("sweep: unknown reward_kind '{}'", value));
      }
      rw.kind = *kind;
      if (colon != std::string::npos) rw.param = parse_number(axis, value.substr(colon + 1));
    } else {
      throw std::invalid_argument(fmt::format("sweep: unknown axis '{}'", axis));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CurveRow> equilibrium_curves(const ScenarioConfig& config) {
  std::vector<CurveRow> rows;
  for (const auto& p : expand_sweep(config)) {
    auto schedule = auction::resolve_rewards(p.config.rewards);
    auction::EquilibriumBid eq(schedule, p.bidders, p.config.valuation, p.config.cost,
                               bid_options(p.config.auction));
    const auto& dist = p.config.valuation;
    for (std::size_t g = 0; g < kCurvePoints; ++g) {
      double v = g + 1 == kCurvePoints
                     ? dist.hi()
                     : dist.lo() + (dist.hi() - dist.lo()) * static_cast<double>(g) /
                                       static_cast<double>(kCurvePoints - 1);
      rows.push_back({v, eq.exact(v), to_string(p.config.rewards.kind),
                      static_cast<int>(schedule.size()), p.bidders, param_label(p.config.rewards)});
    }
  }
  return rows;
}

std::vector<RewardRow> reward_comparison(const ScenarioConfig& config, auction::Method method,
                                         std::size_t mc_rounds, std::uint64_t seed) {
  std::vector<RewardRow> rows;
  for (const auto& p : expand_sweep(config)) {
    auto schedule = auction::resolve_rewards(p.config.rewards);
    auction::EquilibriumBid eq(schedule, p.bidders, p.config.valuation, p.config.cost,
                               bid_options(p.config.auction));
    rows.push_back({to_string(p.config.rewards.kind), p.bidders, param_label(p.config.rewards),
                    schedule,
                    auction::master_expected_utility(eq, p.config.auction.phi, method, mc_rounds,
                                                     seed)});
  }
  return rows;
}

void write_rounds_csv(std::ostream& out, std::span<const RunResult> rounds) {
  out << "round,scheme,head_id,members,budget_watts,valuation,bid_watts,rank,reward,utility,"
         "completion_time,in_fastest,decode_ok,total_allocated_cpu,master_utility_formula,"
         "master_utility_realized\n";
  for (const auto& r : rounds) {
    for (const auto& h : r.heads) {
      out << r.round << ',' << to_string(r.scheme) << ',' << h.head << ','
          << join_strings(h.members) << ',' << format_real(h.budget) << ','
          << format_real(h.valuation) << ',' << format_real(h.bid) << ',' << h.rank << ','
          << format_real(h.reward) << ',' << format_real(h.utility) << ','
          << format_real(h.completion_time) << ',' << (h.in_fastest ? 1 : 0) << ','
          << (r.decode_ok ? 1 : 0) << ',' << format_real(r.total_allocated_cpu) << ','
          << format_real(r.master_utility_formula) << ','
          << format_real(r.master_utility_realized) << '\n';
    }
  }
}

void write_schemes_csv(std::ostream& out, std::span<const SchemeSummary> summaries) {
  out << "scheme,rounds,mean_allocated_cpu,std_error,decode_rate\n";
  for (const auto& s : summaries) {
    out << to_string(s.scheme) << ',' << s.rounds << ',' << format_real(s.mean_allocated_cpu)
        << ',' << format_real(s.std_error) << ',' << format_real(s.decode_rate) << '\n';
  }
}

void write_curves_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "valuation,bid_watts,schedule_kind,K,I,param\n";
  for (const auto& r : rows) {
    out << format_real(r.valuation) << ',' << format_real(r.bid) << ',' << r.schedule_kind << ','
        << r.K << ',' << r.I << ',' << r.param << '\n';
  }
}

void write_rewards_csv(std::ostream& out, std::span<const RewardRow> rows) {
  out << "schedule_kind,K,I,param,rewards,sigma,method,master_utility,std_error,mc_rounds\n";
  for (const auto& r : rows) {
    out << r.schedule_kind << ',' << r.schedule.size() << ',' << r.I << ',' << r.param << ','
        << join_reals(r.schedule.rewards) << ',' << format_real(r.schedule.total) << ','
        << (r.master.method == auction::Method::formula ? "formula" : "mc") << ','
        << format_real(r.master.value) << ',' << format_real(r.master.std_error) << ','
        << r.master.rounds << '\n';
  }
}

}  // namespace cdc::simulate
