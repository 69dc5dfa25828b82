#include "pmass/green_radial.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pmass;

namespace {

// Tail integral by adaptive quadrature of phi^{-2} up to the cutoff, plus the
// exact hyperbolic remainder past it.
double brute_tail(const RadialMetric& m, double r) {
  const double body = integrate(
      [&](double s) {
        const double p = m(s).value;
        return 1.0 / (p * p);
      },
      r, m.r_max, 1e-14);
  return body + coth_minus_one(m.chart_radius(m.r_max));
}

}  // namespace

TEST(GreenRadial, HyperbolicValuesAtUnitRadius) {
  const GreenProfile g = solve_green_radial(make_hyperbolic());
  // frozen from (coth 1 - 1)/(4 pi) and 2 - coth 1
  EXPECT_NEAR(g.G(1.0), 0.0249105565247006, 1e-15);
  EXPECT_NEAR(g.u(1.0), 0.686964714500669, 1e-14);
  EXPECT_NEAR(g.G(1.0), (1.0 / std::tanh(1.0) - 1.0) / (4.0 * pi), 1e-16);
}

TEST(GreenRadial, TailMatchesAdaptiveQuadratureOnPerturbedModels) {
  for (const RadialMetric& m : {build_mass_bump(1.0, 1.0, 4.0), build_mass_bump(0.05, 0.5, 2.0),
                                build_perturbed_warp(0.01, 2.0, 3.0, 1.0)}) {
    const GreenProfile g(m);
    for (double r : {0.3, 0.9, 1.7, 2.4, 3.3, 6.0})
      EXPECT_NEAR(g.tail(r) / brute_tail(m, r), 1.0, 1e-12) << to_string(m.family) << " r=" << r;
  }
}

TEST(GreenRadial, FluxNormalizationHoldsPointwise) {
  const GreenProfile g(build_mass_bump(1.0, 1.0, 4.0));
  for (double r : {0.2, 1.0, 1.5, 2.0, 4.0, 9.0}) {
    const double p = g.metric()(r).value;
    EXPECT_NEAR(four_pi * p * p * std::abs(g.dG(r)), 1.0, 1e-14);
    // derivative of the tail by central differences
    const double h = 1e-5;
    EXPECT_NEAR((g.tail(r + h) - g.tail(r - h)) / (2 * h) * p * p, -1.0, 1e-7);
  }
}

TEST(GreenRadial, HyperbolicGradientIsQuadraticInU) {
  const GreenProfile g(make_hyperbolic());
  for (double r : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double u = g.u(r);
    // (2 - u)^2 - 1 cancels about log10(1/T) digits
    EXPECT_NEAR(g.grad_norm(r) / ((2.0 - u) * (2.0 - u) - 1.0), 1.0, 4e-16 * (1.0 + 1.0 / g.tail(r)));
  }
}

TEST(GreenRadial, UIncreasesAndGPositiveDecaysToZero) {
  const GreenProfile g(build_mass_bump(0.05, 0.5, 2.0));
  double prev = -infinity;
  for (double r = 0.01; r <= 10.5; r += 0.01) {
    EXPECT_GT(g.u(r), prev);
    EXPECT_GT(g.G(r), 0.0);
    EXPECT_LT(g.u(r), 1.0);
    prev = g.u(r);
  }
  EXPECT_LT(g.G(10.5), 1e-9);
}

TEST(LevelRadius, HyperbolicLevelRadiusEqualsT) {
  const GreenProfile g(make_hyperbolic());
  for (double t : {0.25, 1.0, 3.0, 7.0}) EXPECT_NEAR(level_radius(g, t), t, 1e-12 * t);
}

TEST(LevelRadius, IncreasingInTAndRangeErrorPastHorizon) {
  const GreenProfile g(build_mass_bump(1.0, 1.0, 4.0));
  double prev = 0.0;
  for (double t = 0.05; t < 9.0; t += 0.05) {
    const double r = level_radius(g, t);
    EXPECT_GT(r, prev);
    EXPECT_NEAR(g.u(r), 2.0 - 1.0 / std::tanh(t), 1e-13);
    prev = r;
  }
  EXPECT_THROW(level_radius(g, 12.0), RangeError);
  EXPECT_THROW(level_radius(g, 0.0), DomainError);
}

TEST(LevelRadius, WarpBumpLevelsApproachHyperbolicExponentially) {
  const GreenProfile g(build_perturbed_warp(0.01, 2.0, 3.0, 1.0));
  for (double t : {4.5, 5.5, 6.5, 7.5}) EXPECT_LE(std::abs(level_radius(g, t) - t) * std::exp(2.0 * t), 1.0) << t;
}

TEST(PoleAsymptotics, HyperbolicSeriesValues) {
  const GreenProfile g(make_hyperbolic());
  const auto v = pole_asymptotics_check(g, {1e-3, 1e-4});
  // r coth r - r = 1 - r + r^2/3 - ...
  EXPECT_NEAR(v[0], 1.0 - 1e-3 + 1e-6 / 3.0, 1e-12);
  EXPECT_NEAR(v[1], 1.0 - 1e-4 + 1e-8 / 3.0, 1e-12);
}

TEST(PoleAsymptotics, PerturbedModelsAgreeWithHyperbolicUpToConstantShift) {
  const GreenProfile h(make_hyperbolic());
  for (const RadialMetric& m : {build_mass_bump(1.0, 1.0, 4.0), build_perturbed_warp(0.01, 2.0, 3.0, 1.0)}) {
    const GreenProfile g(m);
    const double v = pole_asymptotics_check(g, {1e-3})[0];
    EXPECT_GE(v, 0.998);
    EXPECT_LE(v, 1.0);
    // T - T_hyp is constant inside the hyperbolic core, so r (T - T_hyp) is O(r)
    EXPECT_NEAR(v, pole_asymptotics_check(h, {1e-3})[0], 1e-3 * std::abs(g.tail(0.5) - h.tail(0.5)) + 1e-15);
  }
}

TEST(InfinityExpansion, HyperbolicCoefficients) {
  const ExpansionFit f = fit_infinity_expansion(GreenProfile(make_hyperbolic()), 6.0, 10.0);
  EXPECT_NEAR(f.v2 * 2.0 * pi, 1.0, 1e-6);
  EXPECT_LE(std::abs(f.v3), 1e-6 * f.v2);
  EXPECT_LE(f.residual, 1e-6);
}

TEST(InfinityExpansion, PositiveLeadingCoefficientOnPerturbedModels) {
  EXPECT_GT(fit_infinity_expansion(GreenProfile(build_perturbed_warp(0.01, 2.0, 3.0, 1.0)), 6.0, 10.0).v2, 0.0);
  EXPECT_GT(fit_infinity_expansion(GreenProfile(build_mass_bump(1.0, 1.0, 4.0)), 6.0, 10.0).v2, 0.0);
}

TEST(InfinityExpansion, NarrowWindowIsRejected) {
  EXPECT_THROW(fit_infinity_expansion(GreenProfile(make_hyperbolic()), 6.0, 6.5), ParameterError);
}
