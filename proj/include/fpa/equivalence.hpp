#pragma once

#include "fpa/distributions.hpp"
#include "fpa/solver.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fpa {

struct InstanceCheck
{
  double max_deviation = 0.0;
  bool winner_sets_match = true;
  //! size of the winner set
  std::size_t winners = 0;
};

//! Utilities under post-auction reductions r with bids b against
//! pre-auction augmentations r with bids b - r. Deviation is absolute.
//! Requires b >= r elementwise.
InstanceCheck check_additive_equivalence(std::span<const double> v,
                                         std::span<const double> b,
                                         std::span<const double> r);

//! Utilities under pre-auction augmentation rates a with bids b against
//! post-auction rates a / (1 + a) with bids (1 + a) b. Deviation is
//! relative to max(v_i, b_i) per bidder.
InstanceCheck check_multiplicative_equivalence(std::span<const double> v,
                                               std::span<const double> b,
                                               std::span<const double> a);

enum class Theorem
{
  additive,
  multiplicative
};

std::string to_string(Theorem t);

struct SuiteReport
{
  std::string check;
  std::size_t trials = 0;
  //! trials built so that two to four bidders share the top effective bid
  std::size_t constructed_ties = 0;
  //! trials with more than one winner, constructed or not
  std::size_t tie_trials = 0;
  std::uint64_t seed = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool winner_sets_match = true;
  bool passed = false;
};

//! Random instances with 2 to 6 bidders. Every 50th trial is a constructed
//! tie. Draws lie on a dyadic lattice so sums and the scalings used by the
//! tie construction are exact in double precision.
SuiteReport run_equivalence_suite(Theorem theorem,
                                  std::size_t trials,
                                  std::uint64_t seed);

struct EqualRateRow
{
  double rate = 0.0;
  //! post-auction rate equivalent to an augmentation of `rate`
  double paired_rate = 0.0;
  double utility_reduction = 0.0;
  double utility_augmentation = 0.0;
  //! utility_reduction - utility_augmentation
  double loss = 0.0;
  //! rate - paired_rate
  double rate_gap = 0.0;
  std::string error;
};

struct EqualRateReport
{
  std::vector<EqualRateRow> rows;
  bool nonnegative = false;
  bool increasing = false;
  bool passed = false;
};

//! For each rate r, the discounted bidder's equilibrium expected utility
//! with a price reduction of r and with an augmentation of r, the latter
//! solved as the paired reduction r / (1 + r).
EqualRateReport equal_rate_sweep(std::span<const double> rates,
                                 const SolverConfig& base);

std::string format_report(const SuiteReport& report);
std::string format_report(const EqualRateReport& report);

} // namespace fpa
