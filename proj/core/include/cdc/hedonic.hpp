#pragma once

// Lower-level hedonic coalition formation: workers pick one cluster head
// each, earning a CPU-power-proportional share of that head's reward pool,
// and move between coalitions by the switch rule until no worker can gain.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cdc/model.hpp"

namespace cdc::hedonic {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

/// Workers and heads of one game instance, held in id order.
class Roster {
 public:
  Roster(std::vector<WorkerSpec> workers, std::vector<ClusterHeadSpec> heads);

  std::span<const WorkerSpec> workers() const { return workers_; }
  std::span<const ClusterHeadSpec> heads() const { return heads_; }

  std::size_t worker_index(const Id& id) const;
  std::size_t head_index(const Id& id) const;
  const WorkerSpec& worker(const Id& id) const { return workers_[worker_index(id)]; }
  const ClusterHeadSpec& head(const Id& id) const { return heads_[head_index(id)]; }

 private:
  std::vector<WorkerSpec> workers_;
  std::vector<ClusterHeadSpec> heads_;
  std::map<Id, std::size_t> worker_pos_;
  std::map<Id, std::size_t> head_pos_;
};

/// Identity of a coalition as remembered in a history set: the head plus
/// the full member set, including the worker that remembers it.
struct CoalitionKey {
  Id head;
  std::vector<Id> members;  // sorted, duplicate-free

  auto operator<=>(const CoalitionKey&) const = default;
};

/// h(j) for every worker j, keyed by worker id.
using HistorySet = std::map<Id, std::set<CoalitionKey>>;

/// v(S_i) = z_i + sum of member z_j.
double coalition_value(const Partition& partition, const Roster& roster, const Id& head);

/// x_j = z_j / (sum of member z) * rho_i - delta_j z_j - mu_ij.
/// `members` must contain `worker`.
double worker_utility(const Roster& roster, const Id& worker, const Id& head,
                      const std::set<Id>& members);

/// worker_utility for coalitions outside h(j), kMinusInfinity otherwise.
double preference_value(const Roster& roster, const Id& worker, const CoalitionKey& key,
                        const HistorySet& history);

struct SwitchOutcome {
  Partition partition;
  Id from;
  Id to;
  double old_utility = 0.0;
  double new_utility = 0.0;
};

/// One switch-rule step for `worker`: scans the other heads in id order and
/// moves the worker to the first one it strictly prefers. On success the
/// departed coalition is added to the worker's history.
std::optional<SwitchOutcome> try_switch(const Roster& roster, const Id& worker,
                                        const Partition& partition, HistorySet& history);

/// Nash-stability oracle; ignores history sets.
bool is_nash_stable(const Roster& roster, const Partition& partition);

struct SwitchRecord {
  std::size_t step = 0;  // 1-based
  Id worker;
  Id from;
  Id to;
  double old_utility = 0.0;
  double new_utility = 0.0;
  int phase = 0;
};

struct RandomInit {
  std::uint64_t seed = 0;
};

using InitialAssignment = std::variant<Partition, RandomInit>;

struct CoalitionResult {
  Partition partition;
  std::vector<SwitchRecord> log;
  HistorySet history;  // histories of the last phase
  /// Per worker: utility at each of its own turns plus right after each of
  /// its switches, with consecutive repeats dropped.
  std::map<Id, std::vector<double>> utility_trace;
  int phases = 1;
};

/// Switch-rule dynamics from the given (or uniformly random) initial
/// partition. Workers take turns in id order until a full pass changes
/// nothing. Should history sets leave a partition some worker still wants to
/// leave, histories are cleared and the dynamics resume (a new phase).
CoalitionResult form_coalitions(const Roster& roster, const InitialAssignment& initial,
                                int max_phases = 64);

Partition random_partition(const Roster& roster, std::uint64_t seed);
/// Every head with an empty coalition (the partition of a worker-free game).
Partition empty_partition(const Roster& roster);

/// CSV with columns step,worker_id,from_head,to_head,old_utility,new_utility.
void write_switch_log_csv(std::ostream& out, std::span<const SwitchRecord> log);

}  // namespace cdc::hedonic
