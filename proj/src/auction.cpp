#include "fpa/auction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpa {

DiscountSpec
DiscountSpec::none(std::size_t bidders)
{
  return { Regime::post_auction, Form::multiplicative,
           std::vector<double>(bidders, 0.0) };
}

void
DiscountSpec::validate() const
{
  for (double a : amounts) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::domain_error("discount amounts must be finite and >= 0");
    }
    if (form == Form::multiplicative && regime == Regime::post_auction &&
        a >= 1.0) {
      throw std::domain_error("price reduction rate must be in [0, 1)");
    }
  }
}

double
effective_bid(double bid, const BidderDiscount& discount)
{
  if (!(bid >= 0.0)) {
    throw std::domain_error("bid must be non-negative");
  }
  if (discount.regime == Regime::post_auction) {
    return bid;
  }
  if (discount.form == Form::multiplicative) {
    return bid * (1.0 + discount.amount);
  }
  return bid + discount.amount;
}

double
winning_price(double bid, const BidderDiscount& discount)
{
  if (!(bid >= 0.0)) {
    throw std::domain_error("bid must be non-negative");
  }
  if (discount.regime == Regime::pre_auction) {
    return bid;
  }
  if (discount.form == Form::multiplicative) {
    return bid * (1.0 - discount.amount);
  }
  return std::max(bid - discount.amount, 0.0);
}

std::vector<std::size_t>
winner_set(std::span<const double> bids, const DiscountSpec& discount)
{
  std::vector<std::size_t> winners;
  double best = -1.0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    // exact comparison: ties on the discrete bid grid are real events
    const double eb = effective_bid(bids[i], discount.entry(i));
    if (eb > best) {
      best = eb;
      winners.assign(1, i);
    } else if (eb == best) {
      winners.push_back(i);
    }
  }
  return winners;
}

AuctionResult
resolve(const AuctionInstance& instance)
{
  const std::size_t n = instance.bids.size();
  if (n == 0) {
    throw std::domain_error("auction needs at least one bidder");
  }
  if (instance.valuations.size() != n || instance.discount.amounts.size() != n) {
    throw std::invalid_argument(
      "valuations, bids and discount amounts must have equal lengths");
  }

  AuctionResult result;
  result.win_probability.assign(n, 0.0);
  result.price.resize(n);
  result.utility.resize(n);

  const auto winners = winner_set(instance.bids, instance.discount);
  const double share = 1.0 / static_cast<double>(winners.size());
  for (std::size_t i : winners) {
    result.win_probability[i] = share;
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.price[i] =
      winning_price(instance.bids[i], instance.discount.entry(i));
    result.utility[i] =
      result.win_probability[i] * (instance.valuations[i] - result.price[i]);
  }
  return result;
}

double
virtual_valuation(double valuation, double bid, const BidderDiscount& discount)
{
  if (!(bid >= 0.0)) {
    throw std::domain_error("bid must be non-negative");
  }
  if (discount.amount == 0.0) {
    return valuation;
  }
  if (discount.form == Form::additive) {
    throw std::invalid_argument(
      "virtual valuations are defined for multiplicative discounts only");
  }
  const double a = discount.amount;
  if (discount.regime == Regime::pre_auction) {
    const double augmented = bid * (1.0 + a);
    return valuation + augmented * (a / (1.0 + a));
  }
  return valuation + bid * a;
}

} // namespace fpa
