#pragma once

// End-to-end rounds: coalition formation, valuation draws, the auction,
// coded execution on the heads and the resulting metrics.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdc/auction.hpp"
#include "cdc/hedonic.hpp"
#include "cdc/model.hpp"
#include "cdc/polycode.hpp"

namespace cdc::simulate {

enum class Scheme { coalition_auction, coalition_random, no_coalition_random };

const char* to_string(Scheme scheme);
inline constexpr Scheme kAllSchemes[] = {Scheme::coalition_auction, Scheme::coalition_random,
                                         Scheme::no_coalition_random};

struct HeadRound {
  Id head;
  std::vector<Id> members;
  double budget = 0.0;  // v(S_i)
  double valuation = 0.0;
  double bid = 0.0;     // after clamping to the budget
  int rank = 0;
  double reward = 0.0;
  double utility = 0.0;
  double completion_time = 0.0;  // inf when the head allocates nothing
  bool in_fastest = false;
};

struct RunResult {
  std::uint64_t round = 0;
  Scheme scheme = Scheme::coalition_auction;
  Partition partition;
  std::vector<HeadRound> heads;  // head id order
  std::vector<Id> fastest;       // the mn heads whose results were decoded
  bool decode_ok = false;
  bool decode_checked = false;   // decoded product compared against A^T B
  std::size_t clamped = 0;       // bids cut back to the coalition budget
  double total_allocated_cpu = 0.0;  // sum of the top-K bids
  double master_utility_formula = 0.0;  // nan for the random schemes
  double master_utility_realized = 0.0;
};

/// Per-stream seeds inside one round, so that schemes run on the same round
/// index share the partition, the valuations and the coded matrices.
enum class Stream : std::uint64_t { hedonic = 1, valuations, random_bids, ties, latency, matrices };

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t round, Stream stream);

/// Scenario plus everything that is shared by all rounds (the roster and
/// the tabulated equilibrium). Requires config.rng_seed.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);

  RunResult run_round(Scheme scheme, std::uint64_t round) const;

  const ScenarioConfig& config() const { return config_; }
  const hedonic::Roster& roster() const { return roster_; }
  const RewardSchedule& schedule() const { return schedule_; }
  const auction::EquilibriumBid& equilibrium() const { return equilibrium_; }
  double formula_utility() const { return formula_utility_; }

 private:
  ScenarioConfig config_;
  std::uint64_t seed_;
  hedonic::Roster roster_;
  RewardSchedule schedule_;
  auction::EquilibriumBid equilibrium_;
  double formula_utility_;
};

/// The coded task of a round: A, B and one share per head (head id order).
struct CodedTask {
  polycode::FieldMatrix a;
  polycode::FieldMatrix b;
  std::vector<polycode::Share> shares;
};
CodedTask coded_task(const ScenarioConfig& config, std::uint64_t round);

/// Rounds 0..rounds-1, spread over `threads` workers. Output is ordered by
/// round and does not depend on the thread count.
std::vector<RunResult> simulate_rounds(const Simulation& sim, Scheme scheme, std::size_t rounds,
                                       std::size_t threads = 1);

struct SchemeSummary {
  Scheme scheme = Scheme::coalition_auction;
  std::size_t rounds = 0;
  double mean_allocated_cpu = 0.0;
  double std_error = 0.0;
  double decode_rate = 0.0;
};

std::vector<SchemeSummary> compare_schemes(const Simulation& sim, std::size_t rounds,
                                           std::size_t threads = 1);

struct CurveRow {
  double valuation = 0.0;
  double bid = 0.0;
  std::string schedule_kind;
  int K = 0;
  int I = 0;
  std::string param;  // gamma or eta; empty for the other kinds
};

/// One equilibrium problem of a sweep: the configuration a sweep value
/// stands for plus the bidder count (the n_heads axis changes only that).
struct SweepPoint {
  std::string value;
  ScenarioConfig config;
  int bidders = 0;
};

/// The configured scenario alone when there is no sweep. Throws
/// std::invalid_argument for an unknown axis or an unparsable value.
std::vector<SweepPoint> expand_sweep(const ScenarioConfig& config);

/// Bid curves on 101 evenly spaced valuations, one per sweep point.
std::vector<CurveRow> equilibrium_curves(const ScenarioConfig& config);

struct RewardRow {
  std::string schedule_kind;
  int I = 0;
  std::string param;
  RewardSchedule schedule;
  auction::MasterUtility master;
};

/// Master expected utility of every sweep point's schedule.
std::vector<RewardRow> reward_comparison(const ScenarioConfig& config, auction::Method method,
                                         std::size_t mc_rounds, std::uint64_t seed);

void write_rounds_csv(std::ostream& out, std::span<const RunResult> rounds);
void write_schemes_csv(std::ostream& out, std::span<const SchemeSummary> summaries);
void write_curves_csv(std::ostream& out, std::span<const CurveRow> rows);
void write_rewards_csv(std::ostream& out, std::span<const RewardRow> rows);

}  // namespace cdc::simulate
