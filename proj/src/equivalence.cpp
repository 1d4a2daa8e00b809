#include "fpa/equivalence.hpp"
#include "fpa/analytic.hpp"
#include "fpa/auction.hpp"
#include "fpa/outcomes.hpp"
#include "fpa/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fpa {

namespace {

constexpr double lattice = 0x1.0p-16;

void
require_same_size(std::size_t a, std::size_t b, std::size_t c)
{
  if (a != b || a != c)
    throw std::invalid_argument("valuation, bid and discount vectors differ in length");
  if (a == 0)
    throw std::domain_error("an auction needs at least one bidder");
}

DiscountSpec
make_spec(Regime regime, Form form, std::vector<double> amounts)
{
  DiscountSpec s;
  s.regime = regime;
  s.form = form;
  s.amounts = std::move(amounts);
  return s;
}

struct Draws
{
  std::vector<double> v, b, d;
  bool tie = false;
};

// uniform lattice point in [0, hi)
double
lattice_below(Rng& rng, double hi)
{
  auto steps = static_cast<std::uint64_t>(hi / lattice);
  if (steps == 0)
    return 0.0;
  return static_cast<double>(rng.below(steps)) * lattice;
}

// first k entries of a random permutation of 0..n-1
std::vector<std::size_t>
pick(Rng& rng, std::size_t n, std::size_t k)
{
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = 0; i < k; ++i)
    std::swap(p[i], p[i + rng.below(n - i)]);
  p.resize(k);
  return p;
}

Draws
draw_additive(Rng& rng, bool tie)
{
  std::size_t n = 2 + rng.below(5);
  Draws d;
  d.tie = tie;
  d.v.resize(n);
  d.b.resize(n);
  d.d.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    d.v[i] = lattice_below(rng, 4.0);
  if (!tie) {
    for (std::size_t i = 0; i < n; ++i) {
      d.b[i] = lattice_below(rng, 4.0);
      d.d[i] = rng.below(2) ? lattice_below(rng, d.b[i]) : 0.0;
    }
    return d;
  }
  double top = 1.0 + lattice_below(rng, 3.0);
  std::size_t k = std::min<std::size_t>(n, 2 + rng.below(3));
  std::vector<bool> tied(n, false);
  for (auto i : pick(rng, n, k))
    tied[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    d.b[i] = tied[i] ? top : lattice_below(rng, top);
    d.d[i] = lattice_below(rng, d.b[i]);
  }
  return d;
}

Draws
draw_multiplicative(Rng& rng, bool tie)
{
  std::size_t n = 2 + rng.below(5);
  Draws d;
  d.tie = tie;
  d.v.resize(n);
  d.b.resize(n);
  d.d.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    d.v[i] = lattice_below(rng, 4.0);
  if (!tie) {
    for (std::size_t i = 0; i < n; ++i) {
      d.b[i] = lattice_below(rng, 4.0);
      d.d[i] = rng.below(2) ? lattice_below(rng, 1.0) : 0.0;
    }
    return d;
  }
  // every 1 + a divides the top effective bid exactly
  constexpr std::array<double, 5> rates{ 0.0, 0.25, 0.5, 1.0, 3.0 };
  double top = static_cast<double>(1 + rng.below(64)) * 15.0 * 0x1.0p-8;
  std::size_t k = std::min<std::size_t>(n, 2 + rng.below(3));
  std::vector<bool> tied(n, false);
  for (auto i : pick(rng, n, k))
    tied[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    double a = rates[rng.below(rates.size())];
    d.d[i] = a;
    if (tied[i]) {
      d.b[i] = top / (1.0 + a);
    } else {
      double b = lattice_below(rng, top / (1.0 + a));
      d.b[i] = b * (1.0 + a) < top ? b : 0.0;
    }
  }
  return d;
}

} // namespace

InstanceCheck
check_additive_equivalence(std::span<const double> v,
                           std::span<const double> b,
                           std::span<const double> r)
{
  require_same_size(v.size(), b.size(), r.size());
  std::vector<double> lowered(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] >= r[i]))
      throw std::domain_error("additive check requires bid >= reduction");
    lowered[i] = b[i] - r[i];
  }
  std::vector<double> amounts(r.begin(), r.end());
  AuctionInstance post{ { v.begin(), v.end() },
                        { b.begin(), b.end() },
                        make_spec(Regime::post_auction, Form::additive, amounts) };
  AuctionInstance pre{ { v.begin(), v.end() },
                       lowered,
                       make_spec(Regime::pre_auction, Form::additive, amounts) };
  auto up = resolve(post);
  auto ua = resolve(pre);

  InstanceCheck out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.max_deviation = std::max(out.max_deviation, std::abs(up.utility[i] - ua.utility[i]));
  auto wp = winner_set(post.bids, post.discount);
  auto wa = winner_set(pre.bids, pre.discount);
  out.winner_sets_match = wp == wa;
  out.winners = wp.size();
  return out;
}

InstanceCheck
check_multiplicative_equivalence(std::span<const double> v,
                                 std::span<const double> b,
                                 std::span<const double> a)
{
  require_same_size(v.size(), b.size(), a.size());
  std::vector<double> scaled(b.size()), paired(a.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    paired[i] = analytic::augmentation_to_reduction(a[i]);
    scaled[i] = b[i] * (1.0 + a[i]);
  }
  AuctionInstance pre{ { v.begin(), v.end() },
                       { b.begin(), b.end() },
                       make_spec(Regime::pre_auction, Form::multiplicative, { a.begin(), a.end() }) };
  AuctionInstance post{ { v.begin(), v.end() },
                        scaled,
                        make_spec(Regime::post_auction, Form::multiplicative, paired) };
  auto ua = resolve(pre);
  auto up = resolve(post);

  InstanceCheck out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double scale = std::max({ std::abs(v[i]), std::abs(b[i]), 1e-300 });
    out.max_deviation = std::max(out.max_deviation, std::abs(ua.utility[i] - up.utility[i]) / scale);
  }
  auto wa = winner_set(pre.bids, pre.discount);
  auto wp = winner_set(post.bids, post.discount);
  out.winner_sets_match = wa == wp;
  out.winners = wa.size();
  return out;
}

std::string
to_string(Theorem t)
{
  return t == Theorem::additive ? "additive" : "multiplicative";
}

SuiteReport
run_equivalence_suite(Theorem theorem, std::size_t trials, std::uint64_t seed)
{
  if (trials == 0)
    throw std::invalid_argument("trials must be positive");
  SuiteReport rep;
  rep.check = to_string(theorem);
  rep.trials = trials;
  rep.seed = seed;
  rep.tolerance = theorem == Theorem::additive ? 0.0 : 1e-12;

  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    bool tie = t % 50 == 49;
    Draws d = theorem == Theorem::additive ? draw_additive(rng, tie) : draw_multiplicative(rng, tie);
    InstanceCheck c = theorem == Theorem::additive
                        ? check_additive_equivalence(d.v, d.b, d.d)
                        : check_multiplicative_equivalence(d.v, d.b, d.d);
    rep.max_deviation = std::max(rep.max_deviation, c.max_deviation);
    rep.winner_sets_match = rep.winner_sets_match && c.winner_sets_match;
    if (tie)
      ++rep.constructed_ties;
    if (c.winners > 1)
      ++rep.tie_trials;
  }
  rep.passed = rep.winner_sets_match && rep.max_deviation <= rep.tolerance;
  return rep;
}

EqualRateReport
equal_rate_sweep(std::span<const double> rates, const SolverConfig& base)
{
  EqualRateReport rep;
  auto utility = [&](double rate) {
    SolverConfig cfg = base;
    cfg.rate = rate;
    SolveReport s = solve(cfg, 101);
    OutcomeConfig oc{ rate, *s.bid_functions, cfg.discounted, cfg.undiscounted, cfg.n, FullIntegration{} };
    return integrate_outcomes(oc).surplus_disc;
  };

  bool ok = true;
  for (double r : rates) {
    EqualRateRow row;
    row.rate = r;
    try {
      row.paired_rate = analytic::augmentation_to_reduction(r);
      row.rate_gap = r - row.paired_rate;
      row.utility_reduction = utility(r);
      row.utility_augmentation = r == row.paired_rate ? row.utility_reduction : utility(row.paired_rate);
      row.loss = row.utility_reduction - row.utility_augmentation;
    } catch (const std::exception& e) {
      row.error = e.what();
      ok = false;
    }
    rep.rows.push_back(std::move(row));
  }

  rep.nonnegative = ok;
  rep.increasing = ok;
  for (std::size_t i = 0; ok && i < rep.rows.size(); ++i) {
    if (rep.rows[i].loss < 0.0)
      rep.nonnegative = false;
    if (i > 0 && !(rep.rows[i].rate > rep.rows[i - 1].rate && rep.rows[i].loss > rep.rows[i - 1].loss))
      rep.increasing = false;
  }
  rep.passed = ok && rep.nonnegative && rep.increasing;
  return rep;
}

std::string
format_report(const SuiteReport& r)
{
  return fmt::format("check={} trials={} seed={} constructed_ties={} tie_trials={} "
                     "max_deviation={} tolerance={} winner_sets={} result={}\n",
                     r.check,
                     r.trials,
                     r.seed,
                     r.constructed_ties,
                     r.tie_trials,
                     r.max_deviation,
                     r.tolerance,
                     r.winner_sets_match ? "identical" : "differ",
                     r.passed ? "PASS" : "FAIL");
}

std::string
format_report(const EqualRateReport& r)
{
  std::string out;
  for (const auto& row : r.rows) {
    if (!row.error.empty()) {
      out += fmt::format("check=equal-rate rate={} error=\"{}\"\n", row.rate, row.error);
      continue;
    }
    out += fmt::format("check=equal-rate rate={} paired_rate={} rate_gap={} "
                       "utility_reduction={} utility_augmentation={} loss={}\n",
                       row.rate,
                       row.paired_rate,
                       row.rate_gap,
                       row.utility_reduction,
                       row.utility_augmentation,
                       row.loss);
  }
  out += fmt::format("check=equal-rate rows={} nonnegative={} increasing={} result={}\n",
                     r.rows.size(),
                     r.nonnegative,
                     r.increasing,
                     r.passed ? "PASS" : "FAIL");
  return out;
}

} // namespace fpa
