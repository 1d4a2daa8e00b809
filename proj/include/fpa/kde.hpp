#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fpa {

//! Silverman's rule of thumb, 0.9 min(sd, IQR / 1.34) n^(-1/5).
//! Throws std::invalid_argument for fewer than two samples or zero spread.
double silverman_bandwidth(std::span<const double> samples);

//! Right-continuous step cdf of a sample.
class EmpiricalCdf
{
public:
  explicit EmpiricalCdf(std::vector<double> samples);

  double operator()(double x) const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

private:
  std::vector<double> sorted_;
};

//! Gaussian kernel density estimate evaluated on a fine grid by linear
//! binning. Between grid nodes the cdf is the cubic Hermite interpolant of
//! the node cdf values and densities, and pdf() is its exact derivative,
//! so the pair stays consistent under differentiation.
class KernelDensity
{
public:
  KernelDensity(std::span<const double> samples,
                std::optional<double> bandwidth = std::nullopt,
                std::size_t grid_size = 8192);

  double bandwidth() const { return h_; }
  double cdf(double x) const;
  double pdf(double x) const;

  double grid_lo() const { return lo_; }
  double grid_hi() const { return lo_ + step_ * static_cast<double>(cdf_.size() - 1); }

private:
  double h_ = 0.0;
  double lo_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

} // namespace fpa
