#pragma once

#include "fpa/distributions.hpp"
#include "fpa/kde.hpp"
#include "fpa/solver.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpa {

enum class BidderClass
{
  discounted,
  other
};

std::string to_string(BidderClass c);

struct BidRecord
{
  std::string auction_id;
  BidderClass bidder_class = BidderClass::other;
  double bid = 0.0;
};

struct RowError
{
  std::size_t line = 0;
  std::string message;
};

struct IngestResult
{
  std::vector<BidRecord> records;
  std::vector<RowError> errors;
};

//! File-level input failure, such as a missing header.
class IngestError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* bid_log_header = "auction_id,bidder_class,bid";

//! Reads a bid log line by line. Each row is validated as it is read; bad
//! rows are collected with their 1-based line number and skipped. Throws
//! IngestError when the header is missing.
IngestResult ingest(std::istream& in);

struct EstimationConfig
{
  //! price reduction rate of the discounted bidder in the observed auctions
  double rate = 0.05;
  std::optional<double> bandwidth;
  int participants = 5;
  std::pair<double, double> trim{ 0.01, 0.99 };

  void validate() const;
};

//! Per-class bid densities and the opposing-maximum cdf each class faces,
//! assuming one discounted bidder and participants - 1 others per auction.
class BidDensity
{
public:
  BidDensity(std::span<const double> discounted,
             std::span<const double> other,
             const EstimationConfig& cfg);

  const KernelDensity& kernel(BidderClass c) const;
  const EmpiricalCdf& empirical(BidderClass c) const;

  //! cdf and density of the highest bid among the opponents of class c
  double opposing_cdf(BidderClass c, double b) const;
  double opposing_pdf(BidderClass c, double b) const;

private:
  KernelDensity disc_;
  KernelDensity other_;
  EmpiricalCdf disc_ecdf_;
  EmpiricalCdf other_ecdf_;
  int others_;
};

//! Throws EstimationError if either class has fewer than 100 bids.
BidDensity estimate_bid_density(std::span<const double> discounted,
                                std::span<const double> other,
                                const EstimationConfig& cfg);

//! Valuation at which bidding b satisfies the first-order condition of
//! (v - (1 - r) b) M(b). Empty when M' <= 0.
std::optional<double> pseudo_value(double b, double m, double m_prime, double rate);

//! |d/db (v - (1 - r) b) M(b)| / M(b) by central difference.
double foc_residual(double v,
                    double b,
                    double rate,
                    const std::function<double(double)>& opposing_cdf);

struct ClassEstimate
{
  LogNormalFit fit;
  //! retained pseudo-values and their bids, in input order
  std::vector<double> pseudo_values;
  std::vector<double> bids;
  std::size_t sample_count = 0;
  std::size_t trimmed_quantile = 0;
  std::size_t trimmed_undefined = 0;
  std::size_t monotonicity_violations = 0;
  double bandwidth = 0.0;
  double max_foc_residual = 0.0;
};

struct EstimationResult
{
  ClassEstimate discounted;
  ClassEstimate other;
  //! auctions dropped for having a single record
  std::size_t singleton_auctions = 0;
};

EstimationResult run_estimation(std::span<const BidRecord> records,
                                const EstimationConfig& cfg);

//! Synthetic bid log: each auction draws one discounted and
//! participants - 1 other valuations and bids through the tables.
std::vector<BidRecord> simulate_bid_log(const BidFunctions& tables,
                                        const Distribution& discounted,
                                        const Distribution& other,
                                        int participants,
                                        std::size_t auctions,
                                        std::uint64_t seed);

} // namespace fpa
