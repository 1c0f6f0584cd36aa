#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "osctrack/integrator.hpp"
#include "osctrack/scenarios.hpp"

using namespace osctrack;

namespace {

Trajectory run(const Scenario & sc, const ReferenceCurve & c, double eps, double horizon, std::size_t substeps = 0,
  const Vector * x0 = nullptr, double alpha = 0)
{
  ControllerParams p = sc.default_params;
  p.epsilon          = eps;
  if (alpha > 0) { p.alpha = alpha; }
  OscillatingFeedback law(sc.system, sc.scheme, p);
  return simulate(law, c, x0 ? *x0 : sc.default_x0, SamplerGrid::for_scheme(sc.scheme, eps, horizon, substeps));
}

// Unicycle closed loop on one interval with frozen coefficients, written out by hand.
Vector unicycle_interval(const Vector & x0, const Vector & a, double t0, double eps, int steps)
{
  const double amp = std::sqrt(4 * std::numbers::pi * std::abs(a[2]) / eps);
  const double sg  = a[2] > 0 ? 1.0 : (a[2] < 0 ? -1.0 : 0.0);
  auto f           = [&](double t, const Vector & x) {
    const double w  = 2 * std::numbers::pi * t / eps;
    const double u1 = a[0] + amp * std::cos(w);
    const double u2 = a[1] + sg * amp * std::sin(w);
    Vector v(3);
    v << u1 * std::cos(x[2]), u1 * std::sin(x[2]), u2;
    return v;
  };
  Vector x       = x0;
  const double h = eps / steps;
  for (int k = 0; k < steps; ++k) {
    const double t  = t0 + eps * k / steps;
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + h / 2, x + h / 2 * k1);
    const Vector k3 = f(t + h / 2, x + h / 2 * k2);
    const Vector k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST(SamplerGrid, DefaultSubsteps)
{
  EXPECT_EQ(SamplerGrid::for_scheme(unicycle().scheme, 0.1, 1).substeps, 200u);
  BracketScheme fast;
  fast.s1 = {0, 1};
  fast.s2 = {{0, 1, 9}};
  EXPECT_EQ(SamplerGrid::for_scheme(fast, 0.1, 1).substeps, 360u);
  EXPECT_EQ(SamplerGrid::for_scheme(fast, 0.1, 1, 500).substeps, 500u);
}

TEST(SamplerGrid, Intervals)
{
  EXPECT_EQ((SamplerGrid{0.1, 40, 200}.intervals()), 400u);
  EXPECT_EQ((SamplerGrid{0.3, 1, 200}.intervals()), 4u);
  EXPECT_EQ((SamplerGrid{0.5, 60, 200}.intervals()), 120u);
}

TEST(SamplerGrid, Validation)
{
  const auto sc = unicycle();
  EXPECT_THROW((SamplerGrid{0.1, 1, 10}.validate(sc.scheme)), ValidationError);
  EXPECT_THROW((SamplerGrid{0.0, 1, 200}.validate(sc.scheme)), ValidationError);
  OscillatingFeedback law(sc.system, sc.scheme, {15, 0.1});
  EXPECT_THROW(simulate(law, curve_gamma1(), sc.default_x0, SamplerGrid{0.05, 1, 200}), ValidationError);
  EXPECT_THROW(simulate(law, curve_gamma4_car(), sc.default_x0, SamplerGrid{0.1, 1, 200}), StructuralError);
}

TEST(Simulate, EquilibriumStaysPut)
{
  for (const auto & name : scenario_names()) {
    const auto sc = scenario_by_name(name);
    const auto c  = constant_curve(sc.default_x0, 5);
    const auto tr = run(sc, c, sc.default_params.epsilon, 5);
    ASSERT_TRUE(tr.completed()) << name;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      ASSERT_LT((tr.states[k] - sc.default_x0).norm(), 1e-9) << name;
      ASSERT_EQ(tr.controls[k].norm(), 0.0) << name;
    }
  }
}

TEST(Simulate, RowCount)
{
  const auto sc = unicycle();
  const auto tr = run(sc, curve_gamma1(), 0.1, 2, 250);
  EXPECT_EQ(tr.size(), 250u * 20u + 1u);
  EXPECT_NEAR(tr.times.back(), 2.0, 1e-12);
  EXPECT_EQ(tr.coefficients.size(), 20u);
}

TEST(Simulate, PartialFinalInterval)
{
  const auto sc = unicycle();
  const auto tr = run(sc, curve_gamma1(), 0.3, 1.0);
  EXPECT_EQ(tr.coefficient_evaluations, 4u);
  EXPECT_LE(tr.times.back(), 1.0 + 1e-12);
  EXPECT_GT(tr.times.back(), 1.0 - 0.3 / 200);
}

TEST(Simulate, FrozenCoefficientsMatchFineOracle)
{
  const auto sc = unicycle();
  const auto c  = curve_gamma1();
  const auto tr = run(sc, c, 0.1, 1.0);
  ASSERT_TRUE(tr.completed());
  for (std::size_t j = 0; j < 10; ++j) {
    const Vector & xj = tr.states[j * tr.substeps];
    const Vector a    = coefficients(sc.system, sc.scheme, sc.default_params, xj, c(0.1 * j));
    EXPECT_LT((a - tr.coefficients[j]).norm(), 1e-14);
    const Vector oracle = unicycle_interval(xj, a, 0.1 * j, 0.1, 2000);
    EXPECT_LT((tr.states[(j + 1) * tr.substeps] - oracle).norm(), 1e-8) << "interval " << j;
  }
}

TEST(Simulate, OneCoefficientEvaluationPerInterval)
{
  const auto sc = underwater_vehicle();
  OscillatingFeedback law(sc.system, sc.scheme, sc.default_params);
  const auto grid = SamplerGrid::for_scheme(sc.scheme, 0.1, 3);
  std::vector<std::size_t> seen;
  std::vector<Vector> states;
  SimulationHooks hooks;
  hooks.on_coefficients = [&](std::size_t j, double, const Vector & x) {
    seen.push_back(j);
    states.push_back(x);
  };
  const auto tr = simulate(law, curve_gamma4_underwater(), sc.default_x0, grid, hooks);
  ASSERT_TRUE(tr.completed());
  ASSERT_EQ(seen.size(), grid.intervals());
  EXPECT_EQ(tr.coefficient_evaluations, grid.intervals());
  for (std::size_t j = 0; j < seen.size(); ++j) {
    EXPECT_EQ(seen[j], j);
    EXPECT_EQ((states[j] - tr.states[j * tr.substeps]).norm(), 0.0);
  }
}

TEST(Simulate, SubstepRefinement)
{
  for (const auto & name : {"unicycle", "underwater"}) {
    const auto sc = scenario_by_name(name);
    const auto c  = parse_curve(sc.default_curve, 10);
    const auto a  = run(sc, c, sc.default_params.epsilon, 10);
    const auto b  = run(sc, c, sc.default_params.epsilon, 10, 2 * a.substeps);
    ASSERT_TRUE(a.completed() && b.completed());
    EXPECT_LT((a.states.back() - b.states.back()).norm(), 1e-6 * a.states.back().norm()) << name;
  }
}

TEST(Simulate, DomainExitReturnsPartialTrajectory)
{
  const auto sc = rear_wheel_car();
  const auto tr = run(sc, curve_gamma4_car(), 0.5, 60);
  EXPECT_EQ(tr.termination, Termination::domain_exit);
  EXPECT_FALSE(tr.diagnostic.empty());
  EXPECT_GT(tr.size(), 1u);
  EXPECT_LT(tr.times.back(), 60.0);
  EXPECT_THROW(ensure_completed(tr), DomainError);
}

TEST(ClassicSolution, EquilibriumIdentical)
{
  const auto sc = unicycle();
  const auto c  = constant_curve(sc.default_x0, 2);
  OscillatingFeedback law(sc.system, sc.scheme, sc.default_params);
  const auto grid = SamplerGrid::for_scheme(sc.scheme, 0.1, 2);
  const auto a    = simulate(law, c, sc.default_x0, grid);
  const auto b    = classic_solution_simulate(law, c, sc.default_x0, grid);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) { EXPECT_EQ((a.states[k] - b.states[k]).norm(), 0.0); }
}

TEST(ClassicSolution, GapShrinksWithEpsilon)
{
  const auto sc = unicycle();
  const auto c  = curve_gamma1(10);
  double prev   = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.05, 0.025}) {
    ControllerParams p = sc.default_params;
    p.epsilon          = eps;
    OscillatingFeedback law(sc.system, sc.scheme, p);
    const auto grid = SamplerGrid::for_scheme(sc.scheme, eps, 10);
    const auto a    = simulate(law, c, sc.default_x0, grid);
    const auto b    = classic_solution_simulate(law, c, sc.default_x0, grid);
    ASSERT_TRUE(a.completed() && b.completed());
    ASSERT_EQ(a.size(), b.size());
    double gap = 0;
    for (std::size_t k = 0; k < a.size(); ++k) { gap = std::max(gap, (a.states[k] - b.states[k]).norm()); }
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev) << "eps = " << eps;
    prev = gap;
  }
}

TEST(IntervalSlice, Bounds)
{
  const auto sc = unicycle();
  const auto tr = run(sc, curve_gamma1(), 0.1, 1.0);
  const auto s  = interval_slice(tr, 3);
  EXPECT_EQ(s.size(), tr.substeps + 1);
  EXPECT_NEAR(s.times.front(), 0.3, 1e-12);
  EXPECT_NEAR(s.times.back(), 0.4, 1e-12);
  EXPECT_EQ(s.coefficients.size(), 1u);
  EXPECT_THROW(interval_slice(tr, 10), UsageError);
}
