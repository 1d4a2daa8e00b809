#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpa {

//! When a discount is applied: to the bid used for winner selection
//! (pre-auction, bid augmentation) or to the winner's price (post-auction,
//! price reduction).
enum class Regime
{
  pre_auction,
  post_auction
};

enum class Form
{
  additive,
  multiplicative
};

//! Discount terms for one bidder. `amount` is a currency amount for the
//! additive form and a rate for the multiplicative form. A bidder without a
//! discount has amount 0.
struct BidderDiscount
{
  Regime regime = Regime::post_auction;
  Form form = Form::multiplicative;
  double amount = 0.0;
};

//! Mechanism configuration: one regime and form shared by all bidders,
//! with per-bidder amounts.
struct DiscountSpec
{
  Regime regime = Regime::post_auction;
  Form form = Form::multiplicative;
  std::vector<double> amounts;

  static DiscountSpec none(std::size_t bidders);

  BidderDiscount entry(std::size_t bidder) const
  {
    return { regime, form, amounts.at(bidder) };
  }

  //! Throws std::domain_error if any amount is out of range for the form.
  void validate() const;
};

struct AuctionInstance
{
  std::vector<double> valuations;
  std::vector<double> bids;
  DiscountSpec discount;
};

struct AuctionResult
{
  std::vector<double> win_probability;
  std::vector<double> price;
  std::vector<double> utility;
};

//! Bid used to rank bidders.
double effective_bid(double bid, const BidderDiscount& discount);

//! Price a bidder pays if they win with `bid`. The additive post-auction
//! price floors at zero; equilibrium bids satisfy bid >= amount so the floor
//! does not bind there.
double winning_price(double bid, const BidderDiscount& discount);

//! Resolves a single auction. Every bidder tied at the maximum effective bid
//! wins with probability 1/k; utilities are expected utilities.
AuctionResult resolve(const AuctionInstance& instance);

//! Valuation under which the discounted utility takes the undiscounted
//! form p * (value - allocation bid). Multiplicative forms only.
double virtual_valuation(double valuation,
                         double bid,
                         const BidderDiscount& discount);

//! Indices attaining the maximum effective bid.
std::vector<std::size_t> winner_set(std::span<const double> bids,
                                    const DiscountSpec& discount);

} // namespace fpa
