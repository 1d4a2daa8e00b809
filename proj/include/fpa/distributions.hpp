#pragma once

#include <span>
#include <string>
#include <utility>
#include <variant>

namespace fpa {

struct Uniform
{
  double lo = 0.0;
  double hi = 1.0;
};

//! Log-normal with shape `sigma` (sd of log value) and scale `m` (median).
struct LogNormal
{
  double sigma = 1.0;
  double scale = 1.0;
};

//! Log-normal restricted to the parent quantile range [lower_q, upper_q]
//! and renormalized.
struct TruncatedLogNormal
{
  double sigma = 1.0;
  double scale = 1.0;
  double lower_q = 0.001;
  double upper_q = 0.999;
};

//! Immutable valuation distribution. All evaluations are closed forms.
class Distribution
{
public:
  using Kind = std::variant<Uniform, LogNormal, TruncatedLogNormal>;

  Distribution(Kind kind);

  static Distribution uniform(double lo, double hi);
  static Distribution lognormal(double sigma, double scale);
  static Distribution truncated_lognormal(double sigma,
                                          double scale,
                                          double lower_q = 0.001,
                                          double upper_q = 0.999);

  const Kind& kind() const { return kind_; }

  double cdf(double x) const;
  double pdf(double x) const;
  //! Throws std::domain_error for p outside [0, 1].
  double quantile(double p) const;
  std::pair<double, double> support() const { return support_; }
  bool bounded() const;

  //! E[X; lo < X <= hi], the partial first moment over an interval.
  double partial_mean(double lo, double hi) const;

  std::string describe() const;

private:
  Kind kind_;
  // truncated log-normal: parent cdf at the cut points
  double mass_lo_ = 0.0;
  double mass_hi_ = 1.0;
  std::pair<double, double> support_;
};

struct LogNormalFit
{
  double sigma = 0.0;
  double scale = 0.0;
  bool degenerate = false;
};

//! Closed-form maximum likelihood fit: scale = exp(mean log x), sigma =
//! population sd of log x. Needs at least two strictly positive samples.
LogNormalFit fit_lognormal_mle(std::span<const double> samples);

} // namespace fpa
