#include "fpa/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpa::analytic {

namespace {

void
check_setting(int n, double r)
{
  if (n < 2) {
    throw std::domain_error("need at least two bidders");
  }
  if (!(r >= 0.0 && r < 1.0)) {
    throw std::domain_error("price reduction rate must be in [0, 1)");
  }
}

double
max_bid(int n)
{
  return static_cast<double>(n - 1) / static_cast<double>(n);
}

void
check_bid(int n, double b)
{
  // opponents' win probability n b / (n-1) must stay a probability
  if (!(b >= 0.0) || b > max_bid(n)) {
    throw std::domain_error("bid must lie in [0, (n-1)/n]");
  }
}

} // namespace

double
augmentation_to_reduction(double a)
{
  if (!(a >= 0.0)) {
    throw std::domain_error("augmentation rate must be >= 0");
  }
  return a / (1.0 + a);
}

double
reduction_to_augmentation(double r)
{
  if (!(r >= 0.0 && r < 1.0)) {
    throw std::domain_error("price reduction rate must be in [0, 1)");
  }
  return r / (1.0 - r);
}

double
equal_rate_penalty(double a)
{
  if (!(a >= 0.0)) {
    throw std::domain_error("augmentation rate must be >= 0");
  }
  return a * a / (1.0 + a);
}

double
uniform_equilibrium_bid(int n, double r, double v)
{
  check_setting(n, r);
  if (!(v >= 0.0 && v <= 1.0 - r)) {
    throw std::domain_error("valuation outside U[0, 1 - r]");
  }
  return std::min(max_bid(n) * v / (1.0 - r), max_bid(n));
}

double
uniform_expected_utility(int n, double r, double v, double b)
{
  check_setting(n, r);
  check_bid(n, b);
  const double win = std::pow(b / max_bid(n), n - 1);
  return win * (v - b * (1.0 - r));
}

double
uniform_expected_utility_derivative(int n, double r, double v, double b)
{
  check_setting(n, r);
  check_bid(n, b);
  const double k = std::pow(1.0 / max_bid(n), n - 1);
  const double surplus = v - b * (1.0 - r);
  return k * ((n - 1) * std::pow(b, n - 2) * surplus -
              std::pow(b, n - 1) * (1.0 - r));
}

} // namespace fpa::analytic
