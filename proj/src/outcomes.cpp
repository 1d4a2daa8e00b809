#include "fpa/outcomes.hpp"

#include "fpa/auction.hpp"
#include "fpa/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace fpa {

namespace {

// Per-knot cells of one bidder class.
struct ClassGrid
{
  const TabulatedBidFunction* table;
  const Distribution* dist;
  std::pair<double, double> support;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> mass;
  std::vector<double> partial_mean;

  ClassGrid(const TabulatedBidFunction& t, const Distribution& d)
    : table(&t)
    , dist(&d)
    , support(d.support())
  {
    const std::size_t size = t.size();
    lo.resize(size);
    hi.resize(size);
    mass.resize(size);
    partial_mean.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const auto [a, b] = t.cell(i, support);
      lo[i] = a;
      hi[i] = b;
      mass[i] = d.cdf(b) - d.cdf(a);
      partial_mean[i] = d.partial_mean(a, b);
    }
  }
};

// How an opponent class relates to one bid: valuations below `edge` bid
// strictly less; valuations in [edge, tie_hi] bid exactly the same.
struct Standing
{
  double edge = 0.0;
  double tie_hi = 0.0;
  bool tie = false;
};

Standing
standing(const ClassGrid& g, double bid)
{
  const auto& bids = g.table->bids();
  const auto it = std::lower_bound(bids.begin(), bids.end(), bid);
  const std::size_t j = static_cast<std::size_t>(it - bids.begin());
  Standing s;
  if (j == bids.size()) {
    s.edge = g.support.second;
    s.tie_hi = s.edge;
    return s;
  }
  s.edge = g.lo[j];
  s.tie = bids[j] == bid;
  s.tie_hi = s.tie ? g.hi[j] : s.edge;
  return s;
}

// Expected share of the win, sum_k P(k opponents tie, rest below) / (k + 1),
// for independent opponents with P(below) = below[i], P(tie) = tie[i].
double
tie_split(std::span<const double> below, std::span<const double> tie)
{
  std::array<double, 64> poly{};
  if (below.size() + 1 > poly.size()) {
    throw std::invalid_argument("too many opponents");
  }
  poly[0] = 1.0;
  std::size_t degree = 0;
  for (std::size_t i = 0; i < below.size(); ++i) {
    for (std::size_t k = degree + 1; k-- > 0;) {
      poly[k + 1] += poly[k] * tie[i];
      poly[k] *= below[i];
    }
    ++degree;
  }
  double share = 0.0;
  for (std::size_t k = 0; k <= degree; ++k) {
    share += poly[k] / static_cast<double>(k + 1);
  }
  return share;
}

constexpr std::array<double, 4> gl_nodes = { -0.8611363115940526,
                                             -0.3399810435848563,
                                             0.3399810435848563,
                                             0.8611363115940526 };
constexpr std::array<double, 4> gl_weights = { 0.3478548451374538,
                                               0.6521451548625461,
                                               0.6521451548625461,
                                               0.3478548451374538 };

struct Opponent
{
  const ClassGrid* grid;
  Standing standing;
  int count;
};

// Integral over the winner's cell of f(v) * P(win and every opponent's
// valuation <= v). Split at every point where an opponent term has a kink.
double
efficient_win_mass(const ClassGrid& own,
                   std::size_t i,
                   std::span<const Opponent> opponents)
{
  const double a = own.lo[i];
  const double b = own.hi[i];
  if (!(b > a)) {
    return 0.0;
  }
  std::vector<double> cuts = { a, b };
  for (const auto& o : opponents) {
    for (double x : { o.standing.edge,
                      o.standing.tie_hi,
                      o.grid->support.first,
                      o.grid->support.second }) {
      if (x > a && x < b) {
        cuts.push_back(x);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<double> below;
  std::vector<double> tie;
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double x0 = cuts[c];
    const double x1 = cuts[c + 1];
    if (!(x1 > x0)) {
      continue;
    }
    const double half = 0.5 * (x1 - x0);
    const double mid = 0.5 * (x1 + x0);
    for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
      const double v = mid + half * gl_nodes[q];
      below.clear();
      tie.clear();
      for (const auto& o : opponents) {
        const auto& s = o.standing;
        const auto& d = *o.grid->dist;
        const double l = d.cdf(std::min(v, s.edge));
        const double t =
          s.tie ? std::max(0.0, d.cdf(std::clamp(v, s.edge, s.tie_hi)) -
                                  d.cdf(s.edge))
                : 0.0;
        for (int k = 0; k < o.count; ++k) {
          below.push_back(l);
          tie.push_back(t);
        }
      }
      total += gl_weights[q] * half * own.dist->pdf(v) * tie_split(below, tie);
    }
  }
  return total;
}

struct ClassSums
{
  double win = 0.0;
  double cost = 0.0;
  double surplus = 0.0;
  double efficient = 0.0;
};

ClassSums
integrate_class(const ClassGrid& own,
                double keep,
                const ClassGrid& g1,
                int n1,
                const ClassGrid& g2,
                int n2)
{
  ClassSums sums;
  std::vector<double> below;
  std::vector<double> tie;
  const auto& bids = own.table->bids();
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (own.mass[i] <= 0.0) {
      continue;
    }
    const double bid = bids[i];
    const std::array<Opponent, 2> opponents = {
      Opponent{ &g1, standing(g1, bid), n1 },
      Opponent{ &g2, standing(g2, bid), n2 }
    };
    below.clear();
    tie.clear();
    for (const auto& o : opponents) {
      const auto& d = *o.grid->dist;
      const double l = d.cdf(o.standing.edge);
      const double t = o.standing.tie ? d.cdf(o.standing.tie_hi) - l : 0.0;
      for (int k = 0; k < o.count; ++k) {
        below.push_back(l);
        tie.push_back(t);
      }
    }
    const double share = tie_split(below, tie);
    const double price = keep * bid;
    sums.win += own.mass[i] * share;
    sums.cost += own.mass[i] * share * price;
    sums.surplus += share * (own.partial_mean[i] - own.mass[i] * price);
    sums.efficient += efficient_win_mass(own, i, opponents);
  }
  return sums;
}

void
check_config(const OutcomeConfig& cfg)
{
  if (cfg.n < 1) {
    throw std::invalid_argument("need at least one undiscounted bidder");
  }
  if (!(cfg.rate >= 0.0 && cfg.rate < 1.0)) {
    throw std::domain_error("price reduction rate must be in [0, 1)");
  }
  if (!cfg.discounted.bounded() || !cfg.undiscounted.bounded()) {
    throw std::invalid_argument("outcome statistics need bounded supports");
  }
}

} // namespace

AuctionOutcomeStats
integrate_outcomes(const OutcomeConfig& cfg)
{
  check_config(cfg);
  if (!std::holds_alternative<FullIntegration>(cfg.method)) {
    throw std::invalid_argument("integrate_outcomes needs the FullIntegration method");
  }
  const ClassGrid g1(cfg.tables.discounted, cfg.discounted);
  const ClassGrid g2(cfg.tables.undiscounted, cfg.undiscounted);

  const ClassSums s1 = integrate_class(g1, 1.0 - cfg.rate, g1, 0, g2, cfg.n);
  const ClassSums s2 = integrate_class(g2, 1.0, g1, 1, g2, cfg.n - 1);

  AuctionOutcomeStats st;
  st.win_disc = s1.win;
  st.win_other = s2.win;
  st.cost_disc = s1.cost;
  st.cost_other = s2.cost;
  st.surplus_disc = s1.surplus;
  st.surplus_other = s2.surplus;
  st.expected_revenue = s1.cost + cfg.n * s2.cost;
  st.efficiency = s1.efficient + cfg.n * s2.efficient;
  return st;
}

namespace {

struct Moments
{
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x)
  {
    sum += x;
    sum_sq += x * x;
  }
  double mean(double n) const { return sum / n; }
  double standard_error(double n) const
  {
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
  }
};

} // namespace

SimulatedOutcomes
simulate_outcomes(const OutcomeConfig& cfg)
{
  check_config(cfg);
  const auto* mc = std::get_if<MonteCarlo>(&cfg.method);
  if (mc == nullptr) {
    throw std::invalid_argument("simulate_outcomes needs a MonteCarlo method");
  }
  if (mc->samples < 10'000) {
    throw std::invalid_argument("Monte Carlo needs at least 10000 samples");
  }

  const std::size_t bidders = static_cast<std::size_t>(cfg.n) + 1;
  Rng rng(mc->seed);

  AuctionInstance auction;
  auction.valuations.resize(bidders);
  auction.bids.resize(bidders);
  auction.discount = DiscountSpec::none(bidders);
  auction.discount.amounts[0] = cfg.rate;

  std::array<Moments, 8> m{};
  const double others = static_cast<double>(cfg.n);
  for (std::size_t s = 0; s < mc->samples; ++s) {
    for (std::size_t i = 0; i < bidders; ++i) {
      const auto& dist = i == 0 ? cfg.discounted : cfg.undiscounted;
      const auto& table =
        i == 0 ? cfg.tables.discounted : cfg.tables.undiscounted;
      const double v = dist.quantile(rng.uniform());
      auction.valuations[i] = v;
      auction.bids[i] = table.bids()[table.knot_for(v)];
    }
    const AuctionResult res = resolve(auction);
    const double top = *std::max_element(auction.valuations.begin(),
                                         auction.valuations.end());
    double revenue = 0.0;
    double efficient = 0.0;
    double win_other = 0.0;
    double cost_other = 0.0;
    double surplus_other = 0.0;
    for (std::size_t i = 0; i < bidders; ++i) {
      const double paid = res.win_probability[i] * res.price[i];
      revenue += paid;
      if (auction.valuations[i] >= top) {
        efficient += res.win_probability[i];
      }
      if (i > 0) {
        win_other += res.win_probability[i] / others;
        cost_other += paid / others;
        surplus_other += res.utility[i] / others;
      }
    }
    m[0].add(revenue);
    m[1].add(efficient);
    m[2].add(res.win_probability[0]);
    m[3].add(win_other);
    m[4].add(res.utility[0]);
    m[5].add(surplus_other);
    m[6].add(res.win_probability[0] * res.price[0]);
    m[7].add(cost_other);
  }

  const double n = static_cast<double>(mc->samples);
  auto pack = [&](auto&& get) {
    AuctionOutcomeStats st;
    st.expected_revenue = get(m[0]);
    st.efficiency = get(m[1]);
    st.win_disc = get(m[2]);
    st.win_other = get(m[3]);
    st.surplus_disc = get(m[4]);
    st.surplus_other = get(m[5]);
    st.cost_disc = get(m[6]);
    st.cost_other = get(m[7]);
    return st;
  };
  SimulatedOutcomes out;
  out.samples = mc->samples;
  out.mean = pack([n](const Moments& x) { return x.mean(n); });
  out.standard_error =
    pack([n](const Moments& x) { return x.standard_error(n); });
  return out;
}

AuctionOutcomeStats
evaluate_outcomes(const OutcomeConfig& cfg)
{
  if (std::holds_alternative<MonteCarlo>(cfg.method)) {
    return simulate_outcomes(cfg).mean;
  }
  return integrate_outcomes(cfg);
}

std::vector<SweepRow>
sweep(std::span<const double> rates,
      const SolverConfig& base,
      std::size_t probe_count,
      const std::variant<FullIntegration, MonteCarlo>& method)
{
  std::vector<SweepRow> rows;
  rows.reserve(rates.size());
  for (double rate : rates) {
    SweepRow row;
    row.rate = rate;
    try {
      SolverConfig cfg = base;
      cfg.rate = rate;
      SolveReport report = solve(cfg, probe_count);
      OutcomeConfig oc{ rate,
                        *report.bid_functions,
                        cfg.discounted,
                        cfg.undiscounted,
                        cfg.n,
                        method };
      row.stats = evaluate_outcomes(oc);
      row.solve = std::move(report);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace fpa
