#include "fpa/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fpa {

namespace {

double
sample_quantile(const std::vector<double>& sorted, double p)
{
  double pos = p * static_cast<double>(sorted.size() - 1);
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size())
    return sorted.back();
  double t = pos - static_cast<double>(i);
  return sorted[i] + t * (sorted[i + 1] - sorted[i]);
}

} // namespace

double
silverman_bandwidth(std::span<const double> samples)
{
  if (samples.size() < 2)
    throw std::invalid_argument("bandwidth needs at least two samples");
  auto n = static_cast<double>(samples.size());
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples)
    ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double iqr = sample_quantile(sorted, 0.75) - sample_quantile(sorted, 0.25);

  double spread = sd;
  if (iqr > 0.0)
    spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    throw std::invalid_argument("bandwidth undefined for a sample with no spread");
  return 0.9 * spread * std::pow(n, -0.2);
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples)
  : sorted_(std::move(samples))
{
  if (sorted_.empty())
    throw std::invalid_argument("empirical cdf of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double
EmpiricalCdf::operator()(double x) const
{
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

KernelDensity::KernelDensity(std::span<const double> samples,
                             std::optional<double> bandwidth,
                             std::size_t grid_size)
{
  if (samples.size() < 2)
    throw std::invalid_argument("kernel density needs at least two samples");
  if (grid_size < 16)
    throw std::invalid_argument("kernel density grid too small");
  h_ = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw std::invalid_argument("bandwidth must be positive");

  auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  // 8 bandwidths of margin puts the kernel tails below double resolution
  lo_ = *mn - 8.0 * h_;
  double hi = *mx + 8.0 * h_;
  step_ = (hi - lo_) / static_cast<double>(grid_size - 1);

  std::vector<double> counts(grid_size, 0.0);
  for (double x : samples) {
    double pos = (x - lo_) / step_;
    auto i = std::min(static_cast<std::size_t>(pos), grid_size - 2);
    double t = pos - static_cast<double>(i);
    counts[i] += 1.0 - t;
    counts[i + 1] += t;
  }

  auto n = static_cast<double>(samples.size());
  auto reach = static_cast<std::ptrdiff_t>(std::ceil(8.0 * h_ / step_));
  std::vector<double> kernel(2 * reach + 1), tail(2 * reach + 1);
  for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
    double z = static_cast<double>(d) * step_ / h_;
    kernel[d + reach] = std::exp(-0.5 * z * z) / (h_ * std::sqrt(2.0 * std::numbers::pi));
    tail[d + reach] = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }

  auto size = static_cast<std::ptrdiff_t>(grid_size);
  cdf_.assign(grid_size, 0.0);
  pdf_.assign(grid_size, 0.0);
  double below = 0.0;
  for (std::ptrdiff_t i = 0; i < size; ++i) {
    double dens = 0.0, mass = 0.0;
    std::ptrdiff_t from = std::max<std::ptrdiff_t>(0, i - reach);
    std::ptrdiff_t to = std::min<std::ptrdiff_t>(size - 1, i + reach);
    for (std::ptrdiff_t j = from; j <= to; ++j) {
      dens += counts[j] * kernel[i - j + reach];
      mass += counts[j] * tail[i - j + reach];
    }
    if (i - reach - 1 >= 0)
      below += counts[i - reach - 1];
    pdf_[i] = dens / n;
    cdf_[i] = std::min(1.0, (mass + below) / n);
  }
}

double
KernelDensity::cdf(double x) const
{
  double pos = (x - lo_) / step_;
  if (pos <= 0.0)
    return 0.0;
  if (pos >= static_cast<double>(cdf_.size() - 1))
    return 1.0;
  auto i = static_cast<std::size_t>(pos);
  double t = pos - static_cast<double>(i);
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * cdf_[i] + (t3 - 2 * t2 + t) * step_ * pdf_[i] +
         (-2 * t3 + 3 * t2) * cdf_[i + 1] + (t3 - t2) * step_ * pdf_[i + 1];
}

double
KernelDensity::pdf(double x) const
{
  double pos = (x - lo_) / step_;
  if (pos <= 0.0 || pos >= static_cast<double>(cdf_.size() - 1))
    return 0.0;
  auto i = static_cast<std::size_t>(pos);
  double t = pos - static_cast<double>(i);
  double t2 = t * t;
  return ((6 * t2 - 6 * t) * (cdf_[i] - cdf_[i + 1])) / step_ +
         (3 * t2 - 4 * t + 1) * pdf_[i] + (3 * t2 - 2 * t) * pdf_[i + 1];
}

} // namespace fpa
