#include "fpa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fpa {

std::string
to_string(Role role)
{
  return role == Role::discounted ? "discounted" : "undiscounted";
}

Role
role_from_string(const std::string& name)
{
  if (name == "discounted") {
    return Role::discounted;
  }
  if (name == "undiscounted") {
    return Role::undiscounted;
  }
  throw std::invalid_argument("unknown role '" + name + "'");
}

SingularityError::SingularityError(const std::string& what,
                                   double b_,
                                   double v1_,
                                   double v2_)
  : std::domain_error(
      fmt::format("{} at b={}, v1={}, v2={}", what, b_, v1_, v2_))
  , b(b_)
  , v1(v1_)
  , v2(v2_)
{
}

void
SolverConfig::validate() const
{
  if (n < 1) {
    throw std::invalid_argument("need at least one undiscounted bidder");
  }
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::domain_error("price reduction rate must be in [0, 1)");
  }
  if (steps < 100) {
    throw std::invalid_argument("steps must be >= 100");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  for (const auto* d : { &discounted, &undiscounted }) {
    if (!d->bounded()) {
      throw std::invalid_argument(
        "solver needs bounded supports; truncate the distribution: " +
        d->describe());
    }
    if (d->support().first < 0.0) {
      throw std::invalid_argument("valuation supports must be non-negative");
    }
  }
  if (bracket && !(bracket->first > 0.0 && bracket->second > bracket->first)) {
    throw std::invalid_argument("bracket needs 0 < lo < hi");
  }
}

namespace {

// Derivatives with the F2 factor cancelled in the second equation:
// (n-1) f2 v2' / F2 = (n-1)(1-r) / (n [v1 - (1-r) b]). Identical algebra,
// but well defined where F2 vanishes at the bottom of the support.
Derivatives
rhs(double b, double v1, double v2, const SolverConfig& cfg)
{
  const double keep = 1.0 - cfg.rate;
  const double n = cfg.n;
  const double margin1 = v1 - keep * b;
  const double margin2 = v2 - b;
  const double F1 = cfg.discounted.cdf(v1);
  const double f1 = cfg.discounted.pdf(v1);
  const double F2 = cfg.undiscounted.cdf(v2);
  const double f2 = cfg.undiscounted.pdf(v2);

  Derivatives d;
  d.v2 = keep * F2 / (n * f2 * margin1);
  d.v1 = (F1 / f1) * (1.0 / margin2 - (n - 1.0) * keep / (n * margin1));
  return d;
}

} // namespace

Derivatives
ode_rhs(double b, double v1, double v2, const SolverConfig& cfg)
{
  const double keep = 1.0 - cfg.rate;
  if (!(v1 > keep * b)) {
    throw SingularityError("v1 <= (1-r) b", b, v1, v2);
  }
  if (!(v2 > b)) {
    throw SingularityError("v2 <= b", b, v1, v2);
  }
  if (!(cfg.discounted.pdf(v1) > 0.0) || !(cfg.undiscounted.pdf(v2) > 0.0)) {
    throw SingularityError("zero density", b, v1, v2);
  }
  if (!(cfg.undiscounted.cdf(v2) > 0.0)) {
    throw SingularityError("F2 = 0", b, v1, v2);
  }
  const Derivatives d = rhs(b, v1, v2, cfg);
  if (!std::isfinite(d.v1) || !std::isfinite(d.v2)) {
    throw SingularityError("non-finite derivative", b, v1, v2);
  }
  return d;
}

Trajectory
euler_integrate(double candidate, const SolverConfig& cfg)
{
  const auto [min1, max1] = cfg.discounted.support();
  const auto [min2, max2] = cfg.undiscounted.support();
  if (!(candidate > 0.0 && candidate < max2)) {
    throw std::domain_error("candidate b* must lie in (0, v2*)");
  }

  const std::size_t steps = static_cast<std::size_t>(cfg.steps);
  const double keep = 1.0 - cfg.rate;

  Trajectory t;
  t.bstar = candidate;
  t.bids.reserve(steps + 1);
  t.v1.reserve(steps + 1);
  t.v2.reserve(steps + 1);

  auto bid_at_step = [&](std::size_t k) {
    return candidate * static_cast<double>(steps - k) /
           static_cast<double>(steps);
  };

  double v1 = max1;
  double v2 = max2;
  t.bids.push_back(candidate);
  t.v1.push_back(v1);
  t.v2.push_back(v2);

  auto fail = [&](Infeasibility why, std::size_t k) {
    t.feasible = false;
    t.failure = why;
    t.failed_step = k;
    return t;
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double b = t.bids.back();
    if (!(v1 > keep * b) || !(v2 > b)) {
      return fail(Infeasibility::singular, k);
    }
    const Derivatives d = rhs(b, v1, v2, cfg);
    const double next_b = bid_at_step(k + 1);
    const double db = b - next_b;

    if (!t.clamp1) {
      if (!(d.v1 > 0.0)) {
        return fail(Infeasibility::not_decreasing, k);
      }
      v1 -= d.v1 * db;
      if (v1 <= min1) {
        v1 = min1;
        t.clamp1 = k + 1;
      }
    }
    if (!t.clamp2) {
      if (!(d.v2 > 0.0)) {
        return fail(Infeasibility::not_decreasing, k);
      }
      v2 -= d.v2 * db;
      if (v2 <= min2) {
        v2 = min2;
        t.clamp2 = k + 1;
      }
    }
    t.bids.push_back(next_b);
    t.v1.push_back(v1);
    t.v2.push_back(v2);
  }
  // the last knot sits at b = 0; both margins must still be positive there
  if (!(v1 > 0.0) || !(v2 > 0.0)) {
    return fail(Infeasibility::singular, steps);
  }
  t.feasible = true;
  return t;
}

double
find_bstar(const SolverConfig& cfg)
{
  cfg.validate();
  const double top = cfg.undiscounted.support().second;
  double lo = cfg.bracket ? cfg.bracket->first : 1e-6 * top;
  double hi = cfg.bracket ? std::min(cfg.bracket->second, top) : top;

  if (!euler_integrate(lo, cfg).feasible) {
    throw BracketError(fmt::format(
      "lower bracket end {} is infeasible; lower the bracket", lo));
  }
  // a candidate at v2* is singular by construction
  if (hi < top && euler_integrate(hi, cfg).feasible) {
    throw BracketError(fmt::format(
      "upper bracket end {} is feasible; widen the bracket", hi));
  }

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (hi - lo <= cfg.bstar_tolerance * hi) {
      break;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (euler_integrate(mid, cfg).feasible) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

TabulatedBidFunction::TabulatedBidFunction(Role role,
                                           std::vector<double> valuations,
                                           std::vector<double> bids)
  : role_(role)
  , valuations_(std::move(valuations))
  , bids_(std::move(bids))
{
  if (valuations_.size() != bids_.size() || valuations_.size() < 2) {
    throw std::invalid_argument(
      "bid table needs >= 2 knots and matching column lengths");
  }
  for (std::size_t i = 1; i < valuations_.size(); ++i) {
    if (!(valuations_[i] > valuations_[i - 1]) || !(bids_[i] > bids_[i - 1])) {
      throw std::invalid_argument(
        fmt::format("bid table is not strictly increasing at knot {}", i));
    }
  }
}

namespace {

double
interpolate(const std::vector<double>& xs,
            const std::vector<double>& ys,
            double x)
{
  if (x <= xs.front()) {
    return ys.front();
  }
  if (x >= xs.back()) {
    return ys.back();
  }
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

} // namespace

double
TabulatedBidFunction::bid_at(double valuation) const
{
  return interpolate(valuations_, bids_, valuation);
}

double
TabulatedBidFunction::valuation_at(double bid) const
{
  return interpolate(bids_, valuations_, bid);
}

std::size_t
TabulatedBidFunction::knot_for(double valuation) const
{
  // first knot whose upper cell edge is above the valuation
  std::size_t lo = 0;
  std::size_t hi = valuations_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double edge = 0.5 * (valuations_[mid] + valuations_[mid + 1]);
    if (valuation < edge) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::pair<double, double>
TabulatedBidFunction::cell(std::size_t i, std::pair<double, double> support) const
{
  double lower = support.first;
  double upper = support.second;
  if (i > 0) {
    lower = 0.5 * (valuations_[i - 1] + valuations_[i]);
  }
  if (i + 1 < valuations_.size()) {
    upper = 0.5 * (valuations_[i] + valuations_[i + 1]);
  }
  return { std::clamp(lower, support.first, support.second),
           std::clamp(upper, support.first, support.second) };
}

namespace {

TabulatedBidFunction
invert_role(Role role,
            const std::vector<double>& bids,
            const std::vector<double>& values)
{
  std::vector<double> vs;
  std::vector<double> bs;
  vs.reserve(values.size());
  bs.reserve(values.size());
  // walk from b = 0 upward; knots clamped at the support minimum share one
  // valuation and keep the highest bid, where the path reached the minimum
  for (std::size_t k = values.size(); k-- > 0;) {
    if (!vs.empty() && values[k] == vs.back()) {
      bs.back() = bids[k];
      continue;
    }
    vs.push_back(values[k]);
    bs.push_back(bids[k]);
  }
  return TabulatedBidFunction(role, std::move(vs), std::move(bs));
}

} // namespace

BidFunctions
invert(const Trajectory& trajectory)
{
  if (!trajectory.feasible) {
    throw std::logic_error("cannot invert an infeasible trajectory");
  }
  return { invert_role(Role::discounted, trajectory.bids, trajectory.v1),
           invert_role(Role::undiscounted, trajectory.bids, trajectory.v2) };
}

namespace {

// P(opponent with this table and distribution bids strictly below `bid`)
double
below_probability(const TabulatedBidFunction& table,
                  const Distribution& dist,
                  double bid)
{
  if (bid <= table.bids().front()) {
    return 0.0;
  }
  if (bid > table.bids().back()) {
    return 1.0;
  }
  return dist.cdf(table.valuation_at(bid));
}

struct AuditResult
{
  double max_gap = 0.0;
  double mean_gap = 0.0;
};

AuditResult
audit_role(const TabulatedBidFunction& own,
           const std::vector<double>& win,
           double keep,
           std::size_t probe_count)
{
  const auto& bids = own.bids();
  const auto& values = own.valuations();
  const std::size_t size = own.size();
  const std::size_t probes = std::min(std::max<std::size_t>(probe_count, 1), size);
  const double range = own.bid_range();

  AuditResult out;
  for (std::size_t p = 0; p < probes; ++p) {
    // evenly spaced, always including the top knot
    const std::size_t idx =
      probes == 1 ? size - 1 : (size - 1) - p * (size - 1) / (probes - 1);
    const double v = values[idx];
    std::size_t best = 0;
    double best_utility = -1.0;
    for (std::size_t j = 0; j < size; ++j) {
      const double u = (v - keep * bids[j]) * win[j];
      if (u > best_utility) {
        best_utility = u;
        best = j;
      }
    }
    const double gap = std::abs(bids[best] - bids[idx]) / range;
    out.max_gap = std::max(out.max_gap, gap);
    out.mean_gap += gap / static_cast<double>(probes);
  }
  return out;
}

} // namespace

BestResponseGaps
best_response_audit(const BidFunctions& functions,
                    const SolverConfig& cfg,
                    std::size_t probe_count)
{
  const auto& t1 = functions.discounted;
  const auto& t2 = functions.undiscounted;

  std::vector<double> win1(t1.size());
  for (std::size_t j = 0; j < t1.size(); ++j) {
    win1[j] =
      std::pow(below_probability(t2, cfg.undiscounted, t1.bids()[j]), cfg.n);
  }
  std::vector<double> win2(t2.size());
  for (std::size_t j = 0; j < t2.size(); ++j) {
    const double b = t2.bids()[j];
    win2[j] = below_probability(t1, cfg.discounted, b) *
              std::pow(below_probability(t2, cfg.undiscounted, b), cfg.n - 1);
  }

  const auto a1 = audit_role(t1, win1, 1.0 - cfg.rate, probe_count);
  const auto a2 = audit_role(t2, win2, 1.0, probe_count);
  return { a1.max_gap, a2.max_gap, a1.mean_gap, a2.mean_gap };
}

SolveReport
solve(const SolverConfig& cfg, std::size_t probe_count)
{
  SolveReport report;
  report.bstar = find_bstar(cfg);
  report.trajectory = euler_integrate(report.bstar, cfg);
  report.feasible = report.trajectory.feasible;
  if (!report.feasible) {
    throw std::logic_error("bisection returned an infeasible b*");
  }
  report.clamped =
    report.trajectory.clamp1.has_value() || report.trajectory.clamp2.has_value();
  report.bid_functions = invert(report.trajectory);
  report.gaps = best_response_audit(*report.bid_functions, cfg, probe_count);
  return report;
}

} // namespace fpa
