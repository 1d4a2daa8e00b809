#pragma once

namespace fpa::analytic {

//! Price-reduction rate giving the same outcomes as bid augmentation rate
//! `a`: r = a / (1 + a).
double augmentation_to_reduction(double a);

//! Inverse of augmentation_to_reduction: a = r / (1 - r).
double reduction_to_augmentation(double r);

//! Effective loss of augmentation rate, a^2 / (1 + a), when an augmentation
//! `a` is replaced by the same nominal price reduction.
double equal_rate_penalty(double a);

//! Equilibrium bid ((n-1)/n) * v / (1 - r) for n bidders, each with
//! valuations U[0, 1 - r_i] and price reduction r_i. The bidder's own
//! support is tied to its own rate; v outside [0, 1 - r] is a domain error.
double uniform_equilibrium_bid(int n, double r, double v);

//! Expected utility (n/(n-1))^(n-1) b^(n-1) [v - b(1 - r)] of bidding b
//! against n - 1 opponents that follow uniform_equilibrium_bid.
double uniform_expected_utility(int n, double r, double v, double b);

//! d/db of uniform_expected_utility.
double uniform_expected_utility_derivative(int n, double r, double v, double b);

} // namespace fpa::analytic
