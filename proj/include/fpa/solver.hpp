#pragma once

#include "fpa/distributions.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpa {

//! Bidder class in the two-class model: one bidder with a post-auction
//! price reduction against n identical undiscounted bidders.
enum class Role
{
  discounted,
  undiscounted
};

std::string to_string(Role role);
Role role_from_string(const std::string& name);

struct SolverConfig
{
  //! number of undiscounted bidders
  int n = 4;
  //! post-auction multiplicative price reduction of the discounted bidder
  double rate = 0.0;
  Distribution discounted = Distribution::uniform(0.0, 1.0);
  Distribution undiscounted = Distribution::uniform(0.0, 1.0);
  int steps = 10000;
  //! relative width at which the b* bisection stops
  double bstar_tolerance = 1e-15;
  //! defaults to (1e-6 * v2*, v2*)
  std::optional<std::pair<double, double>> bracket;
  int max_iterations = 60;

  //! Throws std::invalid_argument / std::domain_error on a bad setup.
  void validate() const;
};

//! Raised when the inverse-bid ODE is evaluated where it is undefined.
class SingularityError : public std::domain_error
{
public:
  SingularityError(const std::string& what, double b, double v1, double v2);
  double b;
  double v1;
  double v2;
};

//! The b* search bracket does not straddle the feasibility boundary.
class BracketError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Derivatives
{
  double v1 = 0.0;
  double v2 = 0.0;
};

//! Derivatives of the two inverse bid functions with respect to the bid,
//! from the first-order conditions of both bidder classes.
Derivatives ode_rhs(double b, double v1, double v2, const SolverConfig& cfg);

enum class Infeasibility
{
  none,
  //! a valuation fell to its price (v1 <= (1-r) b or v2 <= b)
  singular,
  //! an inverse bid function stopped decreasing as the bid decreased
  not_decreasing
};

//! Euler path of both inverse bid functions from b* down to zero. Index k
//! holds bid b* (steps - k) / steps.
struct Trajectory
{
  double bstar = 0.0;
  std::vector<double> bids;
  std::vector<double> v1;
  std::vector<double> v2;
  bool feasible = false;
  Infeasibility failure = Infeasibility::none;
  std::size_t failed_step = 0;
  //! first index at which a role reached its support minimum
  std::optional<std::size_t> clamp1;
  std::optional<std::size_t> clamp2;
};

//! Integrates backward from (v1*, v2*) at b = candidate with
//! step candidate / steps. An infeasible candidate is reported through the
//! returned marker, not by throwing.
Trajectory euler_integrate(double candidate, const SolverConfig& cfg);

//! Greatest candidate b* whose trajectory is feasible, by bisection.
double find_bstar(const SolverConfig& cfg);

//! Strictly increasing (valuation -> bid) table.
class TabulatedBidFunction
{
public:
  TabulatedBidFunction(Role role,
                       std::vector<double> valuations,
                       std::vector<double> bids);

  Role role() const { return role_; }
  std::size_t size() const { return valuations_.size(); }
  const std::vector<double>& valuations() const { return valuations_; }
  const std::vector<double>& bids() const { return bids_; }

  //! Linear interpolation between knots; clamps outside the table.
  double bid_at(double valuation) const;
  //! Inverse of bid_at on [min bid, max bid].
  double valuation_at(double bid) const;

  //! Index of the knot nearest to `valuation`. Cells are split at knot
  //! midpoints; this is the discretization used for outcome statistics.
  std::size_t knot_for(double valuation) const;
  //! Lower and upper valuation edge of knot i's cell, clipped to `support`.
  std::pair<double, double> cell(std::size_t i,
                                 std::pair<double, double> support) const;

  double bid_range() const { return bids_.back() - bids_.front(); }

private:
  Role role_;
  std::vector<double> valuations_;
  std::vector<double> bids_;
};

struct BidFunctions
{
  TabulatedBidFunction discounted;
  TabulatedBidFunction undiscounted;
};

//! Swaps trajectory coordinates into (valuation -> bid) tables. Knots
//! clamped at the support minimum collapse into one knot.
BidFunctions invert(const Trajectory& trajectory);

struct BestResponseGaps
{
  //! max over probes of |best response - tabulated bid| / bid range
  double gap1 = 0.0;
  double gap2 = 0.0;
  double mean_gap1 = 0.0;
  double mean_gap2 = 0.0;
};

//! Best response of probe valuations against the opponents' tables,
//! searched over the role's own tabulated bid grid.
BestResponseGaps best_response_audit(const BidFunctions& functions,
                                     const SolverConfig& cfg,
                                     std::size_t probe_count);

struct SolveReport
{
  double bstar = 0.0;
  bool feasible = false;
  std::optional<BidFunctions> bid_functions;
  BestResponseGaps gaps;
  bool clamped = false;
  Trajectory trajectory;
};

//! find_bstar + euler_integrate + invert + best_response_audit. Throws
//! BracketError when no feasible b* exists in the bracket.
SolveReport solve(const SolverConfig& cfg, std::size_t probe_count = 1001);

} // namespace fpa
