#pragma once

#include "fpa/distributions.hpp"
#include "fpa/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fpa {

struct FullIntegration
{};

struct MonteCarlo
{
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

struct OutcomeConfig
{
  double rate = 0.0;
  BidFunctions tables;
  Distribution discounted;
  Distribution undiscounted;
  //! number of undiscounted bidders
  int n = 4;
  std::variant<FullIntegration, MonteCarlo> method = FullIntegration{};
};

//! Unconditional per-auction statistics. Win rates, surpluses and costs of
//! the undiscounted class are per bidder.
struct AuctionOutcomeStats
{
  double expected_revenue = 0.0;
  double efficiency = 0.0;
  double win_disc = 0.0;
  double win_other = 0.0;
  double surplus_disc = 0.0;
  double surplus_other = 0.0;
  double cost_disc = 0.0;
  double cost_other = 0.0;

  // conditional on winning
  double cond_cost_disc() const { return cost_disc / win_disc; }
  double cond_cost_other() const { return cost_other / win_other; }
  double cond_surplus_disc() const { return surplus_disc / win_disc; }
  double cond_surplus_other() const { return surplus_other / win_other; }
};

//! Exact expectation over the product of valuation distributions with each
//! bidder bidding the knot nearest to their valuation. Equal knot bids tie
//! and split the win 1/k.
AuctionOutcomeStats integrate_outcomes(const OutcomeConfig& cfg);

struct SimulatedOutcomes
{
  AuctionOutcomeStats mean;
  AuctionOutcomeStats standard_error;
  std::size_t samples = 0;
};

//! Monte Carlo estimate under the same discretization, resolving each
//! sampled auction with fpa::resolve. Needs at least 10^4 samples.
SimulatedOutcomes simulate_outcomes(const OutcomeConfig& cfg);

//! Dispatches on cfg.method. Monte Carlo runs return the mean.
AuctionOutcomeStats evaluate_outcomes(const OutcomeConfig& cfg);

struct SweepRow
{
  double rate = 0.0;
  std::optional<AuctionOutcomeStats> stats;
  std::optional<SolveReport> solve;
  //! set when the row failed
  std::string error;
};

//! Solves and integrates one row per rate; a failed solve marks its row and
//! the sweep continues.
std::vector<SweepRow> sweep(std::span<const double> rates,
                            const SolverConfig& base,
                            std::size_t probe_count = 101,
                            const std::variant<FullIntegration, MonteCarlo>& method =
                              FullIntegration{});

} // namespace fpa
