#include "fpa/estimation.hpp"
#include "fpa/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <string_view>
#include <unordered_map>

namespace fpa {

std::string
to_string(BidderClass c)
{
  return c == BidderClass::discounted ? "discounted" : "other";
}

namespace {

std::string_view
trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view>
split(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
      return out;
    start = comma + 1;
  }
}

// the same row validation for every line; empty string when the row is good
std::string
parse_row(std::string_view line, BidRecord& rec)
{
  auto fields = split(line);
  if (fields.size() != 3)
    return fmt::format("expected 3 fields, got {}", fields.size());
  if (fields[0].empty())
    return "empty auction_id";
  if (fields[1] == "discounted")
    rec.bidder_class = BidderClass::discounted;
  else if (fields[1] == "other")
    rec.bidder_class = BidderClass::other;
  else
    return fmt::format("unknown bidder_class '{}'", fields[1]);

  double bid = 0.0;
  auto [end, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), bid);
  if (ec != std::errc() || end != fields[2].data() + fields[2].size() || !std::isfinite(bid))
    return fmt::format("unparseable bid '{}'", fields[2]);
  if (bid <= 0.0)
    return fmt::format("bid must be positive, got {}", bid);
  rec.auction_id.assign(fields[0]);
  rec.bid = bid;
  return {};
}

double
quantile_of_sorted(const std::vector<double>& sorted, double p)
{
  double pos = p * static_cast<double>(sorted.size() - 1);
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size())
    return sorted.back();
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

} // namespace

IngestResult
ingest(std::istream& in)
{
  IngestResult out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty())
      break;
  }
  std::string_view header = trim(line);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF")
    header.remove_prefix(3);
  auto cols = split(header);
  if (cols.size() != 3 || cols[0] != "auction_id" || cols[1] != "bidder_class" || cols[2] != "bid")
    throw IngestError(fmt::format("missing header: expected columns {}", bid_log_header));

  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty())
      continue;
    BidRecord rec;
    std::string problem = parse_row(line, rec);
    if (problem.empty())
      out.records.push_back(std::move(rec));
    else
      out.errors.push_back({ number, std::move(problem) });
  }
  return out;
}

void
EstimationConfig::validate() const
{
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::domain_error(fmt::format("rate must lie in [0, 1), got {}", rate));
  if (participants < 2)
    throw std::domain_error("participants must be at least 2");
  if (bandwidth && !(*bandwidth > 0.0))
    throw std::domain_error("bandwidth must be positive");
  if (!(trim.first >= 0.0 && trim.first < trim.second && trim.second <= 1.0))
    throw std::domain_error("trim quantiles must satisfy 0 <= lo < hi <= 1");
}

BidDensity::BidDensity(std::span<const double> discounted,
                       std::span<const double> other,
                       const EstimationConfig& cfg)
  : disc_(discounted, cfg.bandwidth)
  , other_(other, cfg.bandwidth)
  , disc_ecdf_({ discounted.begin(), discounted.end() })
  , other_ecdf_({ other.begin(), other.end() })
  , others_(cfg.participants - 1)
{
}

const KernelDensity&
BidDensity::kernel(BidderClass c) const
{
  return c == BidderClass::discounted ? disc_ : other_;
}

const EmpiricalCdf&
BidDensity::empirical(BidderClass c) const
{
  return c == BidderClass::discounted ? disc_ecdf_ : other_ecdf_;
}

// A discounted bidder faces others_ others. An other bidder faces the
// discounted bidder and others_ - 1 others.
double
BidDensity::opposing_cdf(BidderClass c, double b) const
{
  double go = other_.cdf(b);
  if (c == BidderClass::discounted)
    return std::pow(go, others_);
  return disc_.cdf(b) * std::pow(go, others_ - 1);
}

double
BidDensity::opposing_pdf(BidderClass c, double b) const
{
  double go = other_.cdf(b), g = other_.pdf(b);
  int k = others_;
  if (c == BidderClass::discounted)
    return k * std::pow(go, k - 1) * g;
  double gd = disc_.cdf(b);
  double d = disc_.pdf(b) * std::pow(go, k - 1);
  if (k >= 2)
    d += gd * (k - 1) * std::pow(go, k - 2) * g;
  return d;
}

BidDensity
estimate_bid_density(std::span<const double> discounted,
                     std::span<const double> other,
                     const EstimationConfig& cfg)
{
  cfg.validate();
  if (discounted.size() < 100 || other.size() < 100)
    throw EstimationError(fmt::format(
      "need at least 100 bids per class, got {} discounted and {} other",
      discounted.size(),
      other.size()));
  return BidDensity(discounted, other, cfg);
}

std::optional<double>
pseudo_value(double b, double m, double m_prime, double rate)
{
  if (!(m_prime > 0.0) || !std::isfinite(m_prime))
    return std::nullopt;
  return (1.0 - rate) * (b + m / m_prime);
}

double
foc_residual(double v,
             double b,
             double rate,
             const std::function<double(double)>& opposing_cdf)
{
  double eta = 1e-6 * b;
  auto u = [&](double x) { return (v - (1.0 - rate) * x) * opposing_cdf(x); };
  double slope = (u(b + eta) - u(b - eta)) / (2.0 * eta);
  double m = opposing_cdf(b);
  if (!(m > 0.0))
    return std::abs(slope) > 0.0 ? INFINITY : 0.0;
  return std::abs(slope) / m;
}

EstimationResult
run_estimation(std::span<const BidRecord> records, const EstimationConfig& cfg)
{
  cfg.validate();
  EstimationResult result;

  std::unordered_map<std::string, std::size_t> per_auction;
  for (const auto& r : records)
    ++per_auction[r.auction_id];

  std::vector<std::size_t> idx[2];
  std::vector<double> bids[2];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (per_auction[r.auction_id] < 2)
      continue;
    auto c = static_cast<int>(r.bidder_class);
    idx[c].push_back(i);
    bids[c].push_back(r.bid);
  }
  for (const auto& [id, count] : per_auction)
    if (count < 2)
      ++result.singleton_auctions;

  if (bids[0].empty())
    throw EstimationError("no bids from the discounted class");
  if (bids[1].empty())
    throw EstimationError("no bids from the other class");

  BidDensity density = estimate_bid_density(bids[0], bids[1], cfg);

  for (int c = 0; c < 2; ++c) {
    auto cls = static_cast<BidderClass>(c);
    double rate = cls == BidderClass::discounted ? cfg.rate : 0.0;
    ClassEstimate& est = c == 0 ? result.discounted : result.other;
    est.sample_count = bids[c].size();
    est.bandwidth = density.kernel(cls).bandwidth();

    const auto& sorted = density.empirical(cls).sorted();
    double lo = quantile_of_sorted(sorted, cfg.trim.first);
    double hi = quantile_of_sorted(sorted, cfg.trim.second);

    struct Kept
    {
      std::size_t order;
      double bid;
      double value;
    };
    std::vector<Kept> kept;
    for (std::size_t k = 0; k < bids[c].size(); ++k) {
      double b = bids[c][k];
      if (b < lo || b > hi) {
        ++est.trimmed_quantile;
        continue;
      }
      auto v = pseudo_value(b, density.opposing_cdf(cls, b), density.opposing_pdf(cls, b), rate);
      if (!v) {
        ++est.trimmed_undefined;
        continue;
      }
      kept.push_back({ k, b, *v });
    }

    std::stable_sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
      return a.bid < b.bid;
    });
    std::vector<Kept> monotone;
    monotone.reserve(kept.size());
    double running = -INFINITY;
    for (const auto& k : kept) {
      if (k.value < running) {
        ++est.monotonicity_violations;
        continue;
      }
      running = k.value;
      monotone.push_back(k);
    }
    std::sort(monotone.begin(), monotone.end(), [](const Kept& a, const Kept& b) {
      return a.order < b.order;
    });

    auto cdf = [&](double x) { return density.opposing_cdf(cls, x); };
    est.pseudo_values.reserve(monotone.size());
    est.bids.reserve(monotone.size());
    for (const auto& k : monotone) {
      est.pseudo_values.push_back(k.value);
      est.bids.push_back(k.bid);
      est.max_foc_residual = std::max(est.max_foc_residual, foc_residual(k.value, k.bid, rate, cdf));
    }
    if (est.pseudo_values.size() < 2)
      throw EstimationError(fmt::format("too few {} pseudo-values survive trimming", to_string(cls)));
    est.fit = fit_lognormal_mle(est.pseudo_values);
  }
  return result;
}

std::vector<BidRecord>
simulate_bid_log(const BidFunctions& tables,
                 const Distribution& discounted,
                 const Distribution& other,
                 int participants,
                 std::size_t auctions,
                 std::uint64_t seed)
{
  if (participants < 2)
    throw std::domain_error("participants must be at least 2");
  Rng rng(seed);
  std::vector<BidRecord> out;
  out.reserve(auctions * static_cast<std::size_t>(participants));
  for (std::size_t a = 0; a < auctions; ++a) {
    std::string id = fmt::format("a{}", a);
    double v = discounted.quantile(rng.uniform());
    out.push_back({ id, BidderClass::discounted, tables.discounted.bid_at(v) });
    for (int j = 1; j < participants; ++j) {
      v = other.quantile(rng.uniform());
      out.push_back({ id, BidderClass::other, tables.undiscounted.bid_at(v) });
    }
  }
  return out;
}

} // namespace fpa
