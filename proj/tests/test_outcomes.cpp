#include "fpa/outcomes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fpa;

namespace {

const SolveReport&
symmetric_solve()
{
  static const SolveReport rep = solve(SolverConfig{}, 2);
  return rep;
}

OutcomeConfig
symmetric_config()
{
  return { 0.0,
           *symmetric_solve().bid_functions,
           Distribution::uniform(0, 1),
           Distribution::uniform(0, 1),
           4,
           FullIntegration{} };
}

void
expect_identities(const AuctionOutcomeStats& s, int n)
{
  EXPECT_NEAR(s.win_disc + n * s.win_other, 1.0, 1e-6);
  EXPECT_NEAR(s.expected_revenue, s.cost_disc + n * s.cost_other, 1e-6 * s.expected_revenue);
  EXPECT_GT(s.efficiency, 0.0);
  EXPECT_LE(s.efficiency, 1.0 + 1e-12);
  EXPECT_GE(s.surplus_disc, 0.0);
  EXPECT_GE(s.surplus_other, 0.0);
}

} // namespace

TEST(Integrate, SymmetricUniformClosedForms)
{
  auto s = integrate_outcomes(symmetric_config());
  // E[0.8 max of 5 uniforms] = 0.8 * 5/6
  EXPECT_NEAR(s.expected_revenue, 2.0 / 3.0, 1e-3);
  EXPECT_NEAR(s.win_disc, 0.2, 1e-3);
  EXPECT_NEAR(s.win_other, 0.2, 1e-3);
  EXPECT_GE(s.efficiency, 0.999);
  // E[(v - 0.8 v) 1{v max}] = 0.2 * 1/6
  EXPECT_NEAR(s.surplus_disc, 1.0 / 30.0, 1e-3);
  EXPECT_NEAR(s.surplus_other, 1.0 / 30.0, 1e-3);
  EXPECT_NEAR(s.cond_cost_disc(), 2.0 / 3.0, 1e-3);
  expect_identities(s, 4);
}

TEST(Integrate, IdenticalLogNormalsAreSymmetric)
{
  SolverConfig c;
  c.discounted = Distribution::truncated_lognormal(0.4, 3.0);
  c.undiscounted = c.discounted;
  auto rep = solve(c, 2);
  auto s = integrate_outcomes({ 0.0, *rep.bid_functions, c.discounted, c.undiscounted, 4, FullIntegration{} });
  EXPECT_LT(std::abs(s.win_disc - s.win_other), 1e-3);
  EXPECT_GT(s.efficiency, 0.999);
  expect_identities(s, 4);
}

TEST(Integrate, RejectsMonteCarloMethod)
{
  auto cfg = symmetric_config();
  cfg.method = MonteCarlo{};
  EXPECT_THROW(integrate_outcomes(cfg), std::invalid_argument);
}

TEST(Simulate, SampleCountBounds)
{
  auto cfg = symmetric_config();
  cfg.method = MonteCarlo{ 0, 1 };
  EXPECT_THROW(simulate_outcomes(cfg), std::invalid_argument);
  cfg.method = MonteCarlo{ 9999, 1 };
  EXPECT_THROW(simulate_outcomes(cfg), std::invalid_argument);
  cfg.method = FullIntegration{};
  EXPECT_THROW(simulate_outcomes(cfg), std::invalid_argument);
}

TEST(Simulate, SeedDeterminism)
{
  auto cfg = symmetric_config();
  cfg.method = MonteCarlo{ 20000, 99 };
  auto a = simulate_outcomes(cfg), b = simulate_outcomes(cfg);
  EXPECT_EQ(a.mean.expected_revenue, b.mean.expected_revenue);
  EXPECT_EQ(a.mean.efficiency, b.mean.efficiency);
  EXPECT_EQ(a.mean.surplus_other, b.mean.surplus_other);
  cfg.method = MonteCarlo{ 20000, 100 };
  EXPECT_NE(simulate_outcomes(cfg).mean.expected_revenue, a.mean.expected_revenue);
}

TEST(Simulate, AgreesWithIntegration)
{
  SolverConfig c;
  c.rate = 0.15;
  auto rep = solve(c, 2);
  OutcomeConfig cfg{ 0.15, *rep.bid_functions, c.discounted, c.undiscounted, 4, FullIntegration{} };
  auto exact = integrate_outcomes(cfg);
  cfg.method = MonteCarlo{ 200000, 5 };
  auto mc = simulate_outcomes(cfg);
  auto check = [](const char* name, double e, double m, double se) {
    EXPECT_LE(std::abs(e - m), 3 * se + 1e-12) << name << " exact=" << e << " mc=" << m << " se=" << se;
  };
  check("revenue", exact.expected_revenue, mc.mean.expected_revenue, mc.standard_error.expected_revenue);
  check("efficiency", exact.efficiency, mc.mean.efficiency, mc.standard_error.efficiency);
  check("win_disc", exact.win_disc, mc.mean.win_disc, mc.standard_error.win_disc);
  check("win_other", exact.win_other, mc.mean.win_other, mc.standard_error.win_other);
  check("surplus_disc", exact.surplus_disc, mc.mean.surplus_disc, mc.standard_error.surplus_disc);
  check("surplus_other", exact.surplus_other, mc.mean.surplus_other, mc.standard_error.surplus_other);
  check("cost_disc", exact.cost_disc, mc.mean.cost_disc, mc.standard_error.cost_disc);
  check("cost_other", exact.cost_other, mc.mean.cost_other, mc.standard_error.cost_other);
}

TEST(Sweep, EmptyGrid)
{
  std::vector<double> none;
  EXPECT_TRUE(sweep(none, SolverConfig{}).empty());
}

TEST(Sweep, FailedRowsAreMarked)
{
  SolverConfig c;
  c.bracket = std::pair{ 0.9, 0.99 };
  std::vector<double> rates{ 0.0, 0.1 };
  auto rows = sweep(rates, c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.stats);
    EXPECT_FALSE(r.error.empty());
  }
}

TEST(Sweep, UniformTrends)
{
  std::vector<double> rates{ 0.0, 0.05, 0.10, 0.15, 0.20, 0.25 };
  auto rows = sweep(rates, SolverConfig{});
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].stats) << rows[i].error;
    expect_identities(*rows[i].stats, 4);
    if (i == 0)
      continue;
    const auto& a = *rows[i - 1].stats;
    const auto& b = *rows[i].stats;
    EXPECT_LE(b.expected_revenue, a.expected_revenue);
    EXPECT_GT(b.win_disc, a.win_disc);
    EXPECT_LT(b.win_other, a.win_other);
    EXPECT_LE(b.efficiency, a.efficiency);
    EXPECT_GT(b.surplus_disc, a.surplus_disc);
  }
}

TEST(Integrate, StableUnderGridRefinement)
{
  SolverConfig c;
  c.rate = 0.15;
  c.discounted = Distribution::truncated_lognormal(0.4, 3.0);
  c.undiscounted = c.discounted;
  auto stats = [&](int steps) {
    auto cc = c;
    cc.steps = steps;
    auto rep = solve(cc, 2);
    return integrate_outcomes({ c.rate, *rep.bid_functions, c.discounted, c.undiscounted, 4, FullIntegration{} });
  };
  auto a = stats(10000), b = stats(20000);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::abs(x); };
  EXPECT_LT(rel(a.expected_revenue, b.expected_revenue), 2e-3);
  EXPECT_LT(rel(a.efficiency, b.efficiency), 2e-3);
  EXPECT_LT(rel(a.win_disc, b.win_disc), 2e-3);
  EXPECT_LT(rel(a.win_other, b.win_other), 2e-3);
  EXPECT_LT(rel(a.surplus_disc, b.surplus_disc), 2e-3);
  EXPECT_LT(rel(a.surplus_other, b.surplus_other), 2e-3);
  EXPECT_LT(rel(a.cost_disc, b.cost_disc), 2e-3);
  EXPECT_LT(rel(a.cost_other, b.cost_other), 2e-3);
}
