#include "fpa/distributions.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fpa {

namespace {

double
std_normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double
std_normal_pdf(double z)
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double
std_normal_quantile(double p)
{
  if (p <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (p >= 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double
ln_cdf(double sigma, double scale, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  return std_normal_cdf(std::log(x / scale) / sigma);
}

double
ln_pdf(double sigma, double scale, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  const double z = std::log(x / scale) / sigma;
  return std_normal_pdf(z) / (x * sigma);
}

double
ln_quantile(double sigma, double scale, double p)
{
  if (p <= 0.0) {
    return 0.0;
  }
  return scale * std::exp(sigma * std_normal_quantile(p));
}

// E[X; X <= x] for the untruncated log-normal
double
ln_lower_moment(double sigma, double scale, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  const double mean = scale * std::exp(0.5 * sigma * sigma);
  if (std::isinf(x)) {
    return mean;
  }
  return mean * std_normal_cdf((std::log(x / scale) - sigma * sigma) / sigma);
}

void
check_lognormal(double sigma, double scale)
{
  if (!(sigma > 0.0) || !(scale > 0.0) || !std::isfinite(sigma) ||
      !std::isfinite(scale)) {
    throw std::domain_error("log-normal needs sigma > 0 and scale > 0");
  }
}

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

Distribution::Distribution(Kind kind)
  : kind_(kind)
{
  std::visit(overloaded{
               [](const Uniform& u) {
                 if (!(u.hi > u.lo) || !std::isfinite(u.lo) ||
                     !std::isfinite(u.hi)) {
                   throw std::domain_error("uniform needs finite lo < hi");
                 }
               },
               [](const LogNormal& d) { check_lognormal(d.sigma, d.scale); },
               [this](const TruncatedLogNormal& d) {
                 check_lognormal(d.sigma, d.scale);
                 if (!(d.lower_q >= 0.0 && d.lower_q < d.upper_q &&
                       d.upper_q < 1.0)) {
                   throw std::domain_error(
                     "truncation quantiles need 0 <= lower < upper < 1");
                 }
                 mass_lo_ = d.lower_q;
                 mass_hi_ = d.upper_q;
               } },
             kind_);
  support_ = std::visit(
    overloaded{
      [](const Uniform& u) { return std::pair{ u.lo, u.hi }; },
      [](const LogNormal&) {
        return std::pair{ 0.0, std::numeric_limits<double>::infinity() };
      },
      [](const TruncatedLogNormal& d) {
        return std::pair{ ln_quantile(d.sigma, d.scale, d.lower_q),
                          ln_quantile(d.sigma, d.scale, d.upper_q) };
      } },
    kind_);
}

Distribution
Distribution::uniform(double lo, double hi)
{
  return Distribution(Uniform{ lo, hi });
}

Distribution
Distribution::lognormal(double sigma, double scale)
{
  return Distribution(LogNormal{ sigma, scale });
}

Distribution
Distribution::truncated_lognormal(double sigma,
                                  double scale,
                                  double lower_q,
                                  double upper_q)
{
  return Distribution(TruncatedLogNormal{ sigma, scale, lower_q, upper_q });
}

bool
Distribution::bounded() const
{
  return std::isfinite(support().second);
}

double
Distribution::cdf(double x) const
{
  return std::visit(
    overloaded{
      [x](const Uniform& u) {
        if (x <= u.lo) {
          return 0.0;
        }
        if (x >= u.hi) {
          return 1.0;
        }
        return (x - u.lo) / (u.hi - u.lo);
      },
      [x](const LogNormal& d) { return ln_cdf(d.sigma, d.scale, x); },
      [this, x](const TruncatedLogNormal& d) {
        const auto [lo, hi] = support();
        if (x <= lo) {
          return 0.0;
        }
        if (x >= hi) {
          return 1.0;
        }
        return (ln_cdf(d.sigma, d.scale, x) - mass_lo_) / (mass_hi_ - mass_lo_);
      } },
    kind_);
}

double
Distribution::pdf(double x) const
{
  return std::visit(
    overloaded{
      [x](const Uniform& u) {
        return (x < u.lo || x > u.hi) ? 0.0 : 1.0 / (u.hi - u.lo);
      },
      [x](const LogNormal& d) { return ln_pdf(d.sigma, d.scale, x); },
      [this, x](const TruncatedLogNormal& d) {
        const auto [lo, hi] = support();
        if (x < lo || x > hi) {
          return 0.0;
        }
        return ln_pdf(d.sigma, d.scale, x) / (mass_hi_ - mass_lo_);
      } },
    kind_);
}

double
Distribution::quantile(double p) const
{
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("quantile probability must be in [0, 1]");
  }
  return std::visit(
    overloaded{
      [p](const Uniform& u) {
        return p == 1.0 ? u.hi : u.lo + p * (u.hi - u.lo);
      },
      [p](const LogNormal& d) {
        if (p == 1.0) {
          return std::numeric_limits<double>::infinity();
        }
        return ln_quantile(d.sigma, d.scale, p);
      },
      [this, p](const TruncatedLogNormal& d) {
        const auto [lo, hi] = support();
        if (p == 0.0) {
          return lo;
        }
        if (p == 1.0) {
          return hi;
        }
        const double parent = mass_lo_ + p * (mass_hi_ - mass_lo_);
        return std::clamp(ln_quantile(d.sigma, d.scale, parent), lo, hi);
      } },
    kind_);
}

double
Distribution::partial_mean(double lo, double hi) const
{
  if (!(hi > lo)) {
    return 0.0;
  }
  return std::visit(
    overloaded{
      [lo, hi](const Uniform& u) {
        const double a = std::clamp(lo, u.lo, u.hi);
        const double b = std::clamp(hi, u.lo, u.hi);
        return 0.5 * (b * b - a * a) / (u.hi - u.lo);
      },
      [lo, hi](const LogNormal& d) {
        return ln_lower_moment(d.sigma, d.scale, hi) -
               ln_lower_moment(d.sigma, d.scale, lo);
      },
      [this, lo, hi](const TruncatedLogNormal& d) {
        const auto [slo, shi] = support();
        const double a = std::clamp(lo, slo, shi);
        const double b = std::clamp(hi, slo, shi);
        return (ln_lower_moment(d.sigma, d.scale, b) -
                ln_lower_moment(d.sigma, d.scale, a)) /
               (mass_hi_ - mass_lo_);
      } },
    kind_);
}

std::string
Distribution::describe() const
{
  return std::visit(
    overloaded{
      [](const Uniform& u) { return fmt::format("U[{}, {}]", u.lo, u.hi); },
      [](const LogNormal& d) {
        return fmt::format("LogNormal(sigma={}, m={})", d.sigma, d.scale);
      },
      [](const TruncatedLogNormal& d) {
        return fmt::format("LogNormal(sigma={}, m={}) truncated to q[{}, {}]",
                           d.sigma,
                           d.scale,
                           d.lower_q,
                           d.upper_q);
      } },
    kind_);
}

LogNormalFit
fit_lognormal_mle(std::span<const double> samples)
{
  if (samples.size() < 2) {
    throw std::domain_error("log-normal fit needs at least two samples");
  }
  double sum = 0.0;
  for (double x : samples) {
    if (!(x > 0.0)) {
      throw std::domain_error("log-normal fit needs strictly positive samples");
    }
    sum += std::log(x);
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : samples) {
    const double d = std::log(x) - mean;
    ss += d * d;
  }
  LogNormalFit fit;
  fit.sigma = std::sqrt(ss / n);
  fit.scale = std::exp(mean);
  fit.degenerate = fit.sigma == 0.0;
  return fit;
}

} // namespace fpa
