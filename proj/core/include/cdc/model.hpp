#pragma once

// Domain types shared by every module: worker / cluster-head specs, the
// coalition partition, reward schedules, the valuation prior, the energy cost
// model and the aggregate scenario configuration.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cdc {

// Worker and cluster-head identifiers are opaque strings. Wherever iteration
// order matters they are visited in lexicographic order.
using Id = std::string;

struct WorkerSpec {
  Id id;
  double cpu_power = 0.0;  // z_j [W]
  double unit_cost = 0.0;  // delta_j [utility / W]
  double comm_cost = 0.0;  // mu_ij applied to every head without an override
  std::map<Id, double> comm_cost_overrides;

  double comm_cost_to(const Id& head) const;

  bool operator==(const WorkerSpec&) const = default;
};

struct ClusterHeadSpec {
  Id id;
  double cpu_power = 0.0;    // z_i [W]
  double reward_pool = 0.0;  // rho_i [utility]

  bool operator==(const ClusterHeadSpec&) const = default;
};

/// Assignment of every worker to exactly one cluster head's coalition.
/// Every head has an entry, possibly with an empty member set.
struct Partition {
  std::map<Id, std::set<Id>> coalitions;

  /// Throws std::out_of_range for an unknown head.
  const std::set<Id>& members(const Id& head) const;
  std::optional<Id> head_of(const Id& worker) const;

  bool operator==(const Partition&) const = default;
};

std::vector<std::string> partition_violations(const Partition& partition,
                                              std::span<const WorkerSpec> workers,
                                              std::span<const ClusterHeadSpec> heads);

/// Ordered reward vector M_1 >= ... >= M_K with total sigma.
struct RewardSchedule {
  std::vector<double> rewards;
  double total = 0.0;

  std::size_t size() const { return rewards.size(); }
  /// 1-based rank; ranks beyond K (the padding M_{K+1} = ... = 0) return 0.
  double at_rank(std::size_t k) const;

  bool operator==(const RewardSchedule&) const = default;
};

std::vector<std::string> reward_schedule_violations(const RewardSchedule& schedule);

enum class RewardKind { homogeneous, arithmetic, geometric, winner_take_all, explicit_values };

const char* to_string(RewardKind kind);
std::optional<RewardKind> parse_reward_kind(std::string_view text);

/// Reward-structure descriptor as it appears in a scenario file.
struct RewardSpec {
  RewardKind kind = RewardKind::homogeneous;
  int count = 4;         // K
  double sigma = 1.0;
  double param = 0.0;    // gamma (arithmetic) or eta (geometric)
  std::vector<double> values;  // explicit_values only

  bool operator==(const RewardSpec&) const = default;
};

/// Common prior F(v) of the cluster heads' private valuations.
/// Tabulated distributions are piecewise-linear CDFs through the given knots.
class ValuationDistribution {
 public:
  enum class Kind { uniform, tabulated };

  ValuationDistribution() = default;
  static ValuationDistribution uniform(double lo, double hi);
  /// Knots (v, F(v)) in ascending v; F must run from 0 to 1.
  static ValuationDistribution tabulated(std::vector<std::pair<double, double>> knots);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double cdf(double v) const;
  double pdf(double v) const;
  double quantile(double u) const;
  /// Points where the density may be discontinuous, including both ends.
  std::vector<double> breakpoints() const;

  bool operator==(const ValuationDistribution&) const = default;

 private:
  Kind kind_ = Kind::uniform;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
};

std::vector<std::string> distribution_violations(const ValuationDistribution& dist);

/// Energy cost of a cluster head.
struct CostModel {
  enum class Kind { quadratic, linear };

  Kind kind = Kind::quadratic;
  double theta_p = 1.0;       // unit cost of computational energy
  double theta_c = 1.0;       // unit cost of communication energy
  double kappa = 1e-25;       // effective switch coefficient
  double cycles = 5e9;        // a, CPU cycles per subtask
  double comm_energy = 5.0;   // c_i
  double scale = 1.0;         // effective-cost multiplier on theta_p * kappa * a
  double linear_coeff = 0.0;  // lambda, Kind::linear only

  /// Coefficient q of the bid-dependent cost q * tau^2.
  double quadratic_coeff() const { return theta_p * kappa * cycles * scale; }
  /// theta_c * c_i, the bid-independent participation cost.
  double fixed_cost() const { return theta_c * comm_energy; }
  bool strictly_convex() const { return kind == Kind::quadratic; }

  bool operator==(const CostModel&) const = default;
};

/// Polynomial-code parameters and the matrix dimensions of the coded task.
struct CodeSpec {
  std::size_t m = 2;
  std::size_t n = 2;
  std::uint64_t modulus = 2147483647ULL;
  std::size_t s = 4;
  std::size_t r = 4;
  std::size_t t = 4;

  bool operator==(const CodeSpec&) const = default;
};

struct LatencyModel {
  enum class Kind { deterministic, shifted_exponential };

  Kind kind = Kind::deterministic;
  double jitter_rate = 1.0;

  bool operator==(const LatencyModel&) const = default;
};

struct AuctionOptions {
  double phi = 1.0;  // unit worth of CPU power to the master
  double quad_tol = 1e-10;
  int grid_points = 512;
  bool include_comm_cost_on_loss = true;

  bool operator==(const AuctionOptions&) const = default;
};

struct HedonicOptions {
  std::optional<Partition> initial;  // empty means uniform random assignment

  bool operator==(const HedonicOptions&) const = default;
};

struct SweepSpec {
  std::string axis;
  std::vector<std::string> values;

  bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
  std::vector<WorkerSpec> workers;
  std::vector<ClusterHeadSpec> heads;
  CostModel cost;
  ValuationDistribution valuation = ValuationDistribution::uniform(0.0, 1.0);
  RewardSpec rewards;
  CodeSpec code;
  LatencyModel latency;
  AuctionOptions auction;
  HedonicOptions hedonic;
  std::optional<SweepSpec> sweep;
  std::optional<std::uint64_t> rng_seed;
  std::size_t mc_rounds = 100;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Lists every invariant breach in the configuration; empty when valid.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Reference instance: 5 heads, 8 workers, default costs, U[0,1]
/// valuations, homogeneous K = 4 rewards with sigma = 1, m = n = 2.
ScenarioConfig reference_scenario();

}  // namespace cdc
