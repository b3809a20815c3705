#pragma once

// Upper-level all-pay auction. Cluster heads bid CPU power; every bid is
// paid as energy cost and the K largest bids win M_1 >= ... >= M_K.
//
// The symmetric equilibrium bid satisfies
//
//   c(beta(v)) = sum_{k=1}^{I-1} (M_k - M_{k+1}) * int_{v_lo}^{v} t f_{k:I-1}(t) dt
//
// where only the bid-dependent cost c(tau) = q tau^2 is inverted; the fixed
// communication cost theta_c * c_i enters realized and expected utilities as
// a participation constant.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cdc/model.hpp"
#include "cdc/numeric.hpp"

namespace cdc::auction {

/// Bid-dependent energy cost of allocating tau Watts.
double bid_cost(double tau, const CostModel& cost);

/// Inverse of bid_cost; closed form for the quadratic and linear models.
double inverse_cost(double y, const CostModel& cost);

/// A user-supplied increasing convex cost with cost(0) = 0.
struct ConvexCost {
  std::function<double(double)> cost;
  double tau_max = 0.0;
};

/// Bisection root of cost(tau) = y on [0, tau_max], relative tolerance 1e-10.
double inverse_cost(double y, const ConvexCost& cost);

RewardSchedule make_reward_schedule(RewardKind kind, int count, double sigma, double param = 0.0);
/// make_reward_schedule for generated kinds; explicit values are taken as-is
/// (check them with reward_schedule_violations).
RewardSchedule resolve_rewards(const RewardSpec& spec);

/// int_{v_lo}^{v} t f_{k:I-1}(t) dt for 1 <= k <= I-1.
double score_integral(double v, int k, int n_bidders, const ValuationDistribution& dist,
                      double abs_tol = 1e-10);

/// Equilibrium bid by direct quadrature of every score integral (no table).
double equilibrium_bid(double v, const RewardSchedule& rewards, int n_bidders,
                       const ValuationDistribution& dist, const CostModel& cost,
                       double abs_tol = 1e-10);

/// sum_{k=1}^{I} [F_{k:I-1}(w) - F_{k-1:I-1}(w)] M_k: the expected prize of a
/// bidder who ranks as a valuation-w bidder would.
double expected_prize(double w, const RewardSchedule& rewards, int n_bidders,
                      const ValuationDistribution& dist);

/// Equilibrium bid function tabulated on a uniform valuation grid.
/// The table stores the equilibrium cost level at each node; values between
/// nodes are either interpolated (operator()) or refined by quadrature from
/// the node below (exact()).
class EquilibriumBid {
 public:
  struct Options {
    int grid_points = 512;
    double abs_tol = 1e-10;
  };

  EquilibriumBid(RewardSchedule rewards, int n_bidders, ValuationDistribution dist,
                 CostModel cost, Options options);
  EquilibriumBid(RewardSchedule rewards, int n_bidders, ValuationDistribution dist,
                 CostModel cost)
      : EquilibriumBid(std::move(rewards), n_bidders, std::move(dist), std::move(cost),
                       Options{}) {}

  /// Piecewise-linear interpolation of the tabulated bids.
  double operator()(double v) const;
  /// Bid from the exact cost level (quadrature from the nearest node below).
  double exact(double v) const;
  double cost_level(double v) const;
  /// beta^{-1}(tau): the valuation whose equilibrium bid is tau. The table
  /// brackets the root; Newton steps on the exact cost level refine it.
  double valuation_for_bid(double tau) const;

  double max_bid() const { return bids_.back(); }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> bids() const { return bids_; }
  std::span<const double> cost_levels() const { return levels_; }

  const RewardSchedule& rewards() const { return rewards_; }
  int n_bidders() const { return n_bidders_; }
  const ValuationDistribution& distribution() const { return dist_; }
  const CostModel& cost() const { return cost_; }
  const Options& options() const { return options_; }

 private:
  double marginal(double t) const;
  std::size_t node_below(double v) const;
  double level_from_node(std::size_t node, double v) const;

  RewardSchedule rewards_;
  int n_bidders_;
  ValuationDistribution dist_;
  CostModel cost_;
  Options options_;
  std::vector<std::pair<int, double>> steps_;  // (k, M_k - M_{k+1}) with nonzero step
  std::vector<double> breakpoints_;
  std::vector<double> grid_;
  std::vector<double> levels_;
  std::vector<double> bids_;
};

/// v * expected_prize(beta^{-1}(tau)) - bid_cost(tau) - theta_c c_i.
/// Throws std::domain_error for tau outside [0, beta(v_hi)].
double bidder_expected_utility(double v, double tau, const EquilibriumBid& eq);

enum class Method { formula, monte_carlo };

struct MasterUtility {
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::formula;
  std::size_t rounds = 0;
};

/// formula:     phi * K * int beta dF - sigma
/// monte_carlo: mean over rounds of phi * (sum of the top-K bids) - sigma
/// The two coincide only when K = I.
MasterUtility master_expected_utility(const EquilibriumBid& eq, double phi, Method method,
                                      std::size_t mc_rounds = 0, std::uint64_t seed = 0);

struct GapReport {
  double single = 0.0;  // master utility with M_1 = sigma alone
  double multi = 0.0;   // master utility under the comparison schedule
  double gap = 0.0;     // multi - single
  bool applicable = true;  // false when the cost is not strictly convex
};

GapReport winner_take_all_gap(int n_bidders, const ValuationDistribution& dist,
                              const CostModel& cost, double sigma,
                              const RewardSchedule& comparison, double phi = 1.0,
                              EquilibriumBid::Options options = {});

struct BidderOutcome {
  std::size_t bidder = 0;
  double valuation = 0.0;
  double bid = 0.0;
  int rank = 0;  // 1 = largest bid
  double reward = 0.0;
  double utility = 0.0;
};

/// Ranks the given bids (exact ties broken uniformly at random), pays
/// M_1..M_K to the top K and fills realized utilities. Outcomes are returned
/// in bidder order.
std::vector<BidderOutcome> settle_auction(std::span<const double> valuations,
                                          std::span<const double> bids,
                                          const RewardSchedule& rewards, const CostModel& cost,
                                          bool comm_cost_on_loss, Rng& rng);

/// Equilibrium bids for the given valuations, then settle_auction.
std::vector<BidderOutcome> run_auction(std::span<const double> valuations,
                                       const EquilibriumBid& eq, Rng& rng,
                                       bool comm_cost_on_loss = true);

}  // namespace cdc::auction
