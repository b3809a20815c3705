#include "cdc/hedonic.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cdc/csv.hpp"
#include "cdc/numeric.hpp"

namespace cdc::hedonic {

Roster::Roster(std::vector<WorkerSpec> workers, std::vector<ClusterHeadSpec> heads)
    : workers_(std::move(workers)), heads_(std::move(heads)) {
  std::sort(workers_.begin(), workers_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(heads_.begin(), heads_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    if (!worker_pos_.emplace(workers_[i].id, i).second) {
      throw std::invalid_argument(fmt::format("roster: duplicate worker id '{}'", workers_[i].id));
    }
  }
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    if (!head_pos_.emplace(heads_[i].id, i).second) {
      throw std::invalid_argument(fmt::format("roster: duplicate head id '{}'", heads_[i].id));
    }
  }
}

std::size_t Roster::worker_index(const Id& id) const {
  auto it = worker_pos_.find(id);
  if (it == worker_pos_.end()) throw std::out_of_range(fmt::format("unknown worker '{}'", id));
  return it->second;
}

std::size_t Roster::head_index(const Id& id) const {
  auto it = head_pos_.find(id);
  if (it == head_pos_.end()) throw std::out_of_range(fmt::format("unknown cluster head '{}'", id));
  return it->second;
}

namespace {

using Members = std::vector<std::size_t>;  // sorted worker indices

// Index-based view of a partition. All utilities are evaluated from sorted
// member lists so that the same coalition always yields bit-identical values.
struct State {
  const Roster* roster;
  std::vector<Members> members;  // per head
  std::vector<std::size_t> where;

  double utility(std::size_t j, std::size_t head, const Members& coalition) const {
    double total = 0.0;
    for (std::size_t m : coalition) total += roster->workers()[m].cpu_power;
    const WorkerSpec& w = roster->workers()[j];
    const ClusterHeadSpec& h = roster->heads()[head];
    return w.cpu_power / total * h.reward_pool - w.unit_cost * w.cpu_power -
           w.comm_cost_to(h.id);
  }

  double current_utility(std::size_t j) const { return utility(j, where[j], members[where[j]]); }

  CoalitionKey key(std::size_t head, const Members& coalition) const {
    CoalitionKey k{roster->heads()[head].id, {}};
    k.members.reserve(coalition.size());
    for (std::size_t m : coalition) k.members.push_back(roster->workers()[m].id);
    return k;
  }

  Partition to_partition() const {
    Partition p;
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& set = p.coalitions[roster->heads()[i].id];
      for (std::size_t m : members[i]) set.insert(roster->workers()[m].id);
    }
    return p;
  }
};

Members with(const Members& coalition, std::size_t j) {
  Members out = coalition;
  out.insert(std::upper_bound(out.begin(), out.end(), j), j);
  return out;
}

State make_state(const Roster& roster, const Partition& partition) {
  auto problems = partition_violations(partition, roster.workers(), roster.heads());
  if (!problems.empty()) throw std::invalid_argument(problems.front());
  State s{&roster, std::vector<Members>(roster.heads().size()),
          std::vector<std::size_t>(roster.workers().size())};
  for (const auto& [head, ids] : partition.coalitions) {
    std::size_t h = roster.head_index(head);
    for (const auto& id : ids) {
      std::size_t j = roster.worker_index(id);
      s.members[h].push_back(j);
      s.where[j] = h;
    }
    std::sort(s.members[h].begin(), s.members[h].end());
  }
  return s;
}

struct Move {
  std::size_t from, to;
  double old_utility, new_utility;
};

// First-improvement switch for worker j; heads scanned in id order.
std::optional<Move> step(State& s, std::size_t j, std::set<CoalitionKey>& history) {
  std::size_t from = s.where[j];
  double current = s.current_utility(j);
  for (std::size_t to = 0; to < s.members.size(); ++to) {
    if (to == from) continue;
    Members candidate = with(s.members[to], j);
    double gain = s.utility(j, to, candidate);
    if (!(gain > current)) continue;
    if (history.count(s.key(to, candidate)) != 0) continue;
    history.insert(s.key(from, s.members[from]));
    auto& old_members = s.members[from];
    old_members.erase(std::find(old_members.begin(), old_members.end(), j));
    s.members[to] = std::move(candidate);
    s.where[j] = to;
    return Move{from, to, current, gain};
  }
  return std::nullopt;
}

bool nash_stable(const State& s) {
  for (std::size_t j = 0; j < s.where.size(); ++j) {
    double current = s.current_utility(j);
    for (std::size_t to = 0; to < s.members.size(); ++to) {
      if (to == s.where[j]) continue;
      if (s.utility(j, to, with(s.members[to], j)) > current) return false;
    }
  }
  return true;
}

}  // namespace

double coalition_value(const Partition& partition, const Roster& roster, const Id& head) {
  const auto& members = partition.members(head);
  double value = roster.head(head).cpu_power;
  for (const auto& id : members) value += roster.worker(id).cpu_power;
  return value;
}

double worker_utility(const Roster& roster, const Id& worker, const Id& head,
                      const std::set<Id>& members) {
  if (members.count(worker) == 0) {
    throw std::invalid_argument(
        fmt::format("worker_utility: worker '{}' is not a member of the coalition of '{}'", worker,
                    head));
  }
  State s{&roster, {}, {}};
  Members idx;
  for (const auto& id : members) idx.push_back(roster.worker_index(id));
  std::sort(idx.begin(), idx.end());
  return s.utility(roster.worker_index(worker), roster.head_index(head), idx);
}

double preference_value(const Roster& roster, const Id& worker, const CoalitionKey& key,
                        const HistorySet& history) {
  auto it = history.find(worker);
  if (it != history.end() && it->second.count(key) != 0) return kMinusInfinity;
  return worker_utility(roster, worker, key.head, std::set<Id>(key.members.begin(), key.members.end()));
}

std::optional<SwitchOutcome> try_switch(const Roster& roster, const Id& worker,
                                        const Partition& partition, HistorySet& history) {
  State s = make_state(roster, partition);
  auto move = step(s, roster.worker_index(worker), history[worker]);
  if (!move) return std::nullopt;
  return SwitchOutcome{s.to_partition(), roster.heads()[move->from].id,
                       roster.heads()[move->to].id, move->old_utility, move->new_utility};
}

bool is_nash_stable(const Roster& roster, const Partition& partition) {
  return nash_stable(make_state(roster, partition));
}

Partition empty_partition(const Roster& roster) {
  Partition p;
  for (const auto& h : roster.heads()) p.coalitions[h.id];
  return p;
}

Partition random_partition(const Roster& roster, std::uint64_t seed) {
  if (roster.heads().empty() && !roster.workers().empty()) {
    throw std::invalid_argument("random_partition: workers present but no cluster heads");
  }
  Partition p = empty_partition(roster);
  Rng rng(seed);
  for (const auto& w : roster.workers()) {
    p.coalitions[roster.heads()[rng.below(roster.heads().size())].id].insert(w.id);
  }
  return p;
}

CoalitionResult form_coalitions(const Roster& roster, const InitialAssignment& initial,
                                int max_phases) {
  Partition start = std::holds_alternative<Partition>(initial)
                        ? std::get<Partition>(initial)
                        : random_partition(roster, std::get<RandomInit>(initial).seed);
  State s = make_state(roster, start);
  CoalitionResult result;
  const auto& workers = roster.workers();
  std::vector<std::set<CoalitionKey>> history(workers.size());
  std::vector<std::vector<double>> trace(workers.size());
  auto note = [&](std::size_t j, double u) {
    if (trace[j].empty() || trace[j].back() != u) trace[j].push_back(u);
  };

  int phase = 0;
  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t j = 0; j < workers.size(); ++j) {
        note(j, s.current_utility(j));
        if (auto move = step(s, j, history[j])) {
          note(j, move->new_utility);
          result.log.push_back({result.log.size() + 1, workers[j].id,
                                roster.heads()[move->from].id, roster.heads()[move->to].id,
                                move->old_utility, move->new_utility, phase});
          changed = true;
        }
      }
    }
    if (nash_stable(s)) break;
    if (++phase >= max_phases) {
      throw std::runtime_error(fmt::format(
          "form_coalitions: no Nash-stable partition after {} phases", max_phases));
    }
    spdlog::debug("form_coalitions: history sets blocked a profitable switch; clearing them "
                  "(phase {})", phase);
    for (auto& h : history) h.clear();
  }

  result.partition = s.to_partition();
  result.phases = phase + 1;
  for (std::size_t j = 0; j < workers.size(); ++j) {
    result.history[workers[j].id] = std::move(history[j]);
    result.utility_trace[workers[j].id] = std::move(trace[j]);
  }
  return result;
}

void write_switch_log_csv(std::ostream& out, std::span<const SwitchRecord> log) {
  out << "step,worker_id,from_head,to_head,old_utility,new_utility\n";
  for (const auto& r : log) {
    out << r.step << ',' << r.worker << ',' << r.from << ',' << r.to << ','
        << format_real(r.old_utility) << ',' << format_real(r.new_utility) << '\n';
  }
}

}  // namespace cdc::hedonic
