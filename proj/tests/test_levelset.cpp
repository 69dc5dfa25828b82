#include "pmass/levelset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace pmass;

namespace {

GridSpec grid(int n_r, int n_theta) {
  GridSpec g;
  g.n_r = n_r;
  g.n_theta = n_theta;
  return g;
}

const FieldContext& hyperbolic_ctx() {
  static const FieldContext ctx(solve_green_axisym(build_axisym_perturbation(0.0, 1.0, 3.0, 2), grid(256, 64)));
  return ctx;
}

const AxisymMetric& valid_quadrupole() {
  static const AxisymMetric m = build_axisym_perturbation(1e-4, 1.13, 1.99, 2, build_mass_bump(1.0, 1.0, 4.0));
  return m;
}

const FieldContext& quadrupole_ctx() {
  static const FieldContext ctx(solve_green_axisym(valid_quadrupole(), grid(256, 64)));
  return ctx;
}

double level_of(double t) { return 2.0 - 1.0 / std::tanh(t); }

double spread(const LevelCurve& c) {
  const auto [lo, hi] = std::minmax_element(c.r.begin(), c.r.end());
  return *hi - *lo;
}

}  // namespace

TEST(ExtractLevel, HyperbolicCurveIsTheCoordinateCircle) {
  const LevelCurve c = extract_level_curve(hyperbolic_ctx(), level_of(1.0));
  const double dr = hyperbolic_ctx().grid().r_s(0.0);
  for (double r : c.r) EXPECT_NEAR(r, 1.0, dr);
  for (double r : c.r) EXPECT_NEAR(r, 1.0, 1e-12);  // the grid field is exact here
  EXPECT_EQ(c.components, 1);
  EXPECT_EQ(c.r.size(), 80u);
}

TEST(ExtractLevel, LevelNearTheTopSitsNearTheOuterBoundary) {
  const FieldContext& ctx = hyperbolic_ctx();
  const GridSpec& g = ctx.grid();
  const double dr = g.r_s(0.0);
  const LevelCurve c = extract_level_curve(ctx, 2.0 - 1.0 / std::tanh(g.r_max - dr));
  for (double r : c.r) EXPECT_GE(r, g.r_max - 2.0 * dr);
}

TEST(ExtractLevel, LevelsOutsideTheGridAreRangeErrors) {
  EXPECT_THROW(extract_level_curve(hyperbolic_ctx(), 1.0 - 1e-7), RangeError);
}

TEST(ExtractLevel, QuadrupoleSpreadIsLinearInAmplitude) {
  const RadialMetric base = build_mass_bump(1.0, 1.0, 4.0);
  const FieldContext a(solve_green_axisym(build_axisym_perturbation(2e-3, 1.13, 1.99, 2, base), grid(256, 64)));
  const FieldContext b(solve_green_axisym(build_axisym_perturbation(1e-3, 1.13, 1.99, 2, base), grid(256, 64)));
  const double sa = spread(extract_level_curve(a, level_of(2.5)));
  const double sb = spread(extract_level_curve(b, level_of(2.5)));
  EXPECT_GT(sb, 0.0);
  EXPECT_NEAR(sa / sb, 2.0, 0.05);
}

TEST(SurfaceIntegrals, HyperbolicSphereAtUnitParameter) {
  const SurfaceData s = surface_integrals(hyperbolic_ctx(), extract_level_curve(hyperbolic_ctx(), level_of(1.0)));
  const double sh2 = std::sinh(1.0) * std::sinh(1.0);
  EXPECT_NEAR(s.area, 4.0 * pi * sh2, 1e-10);
  EXPECT_NEAR(s.area, 17.355387, 1e-6);  // frozen from 4 pi sinh^2 1
  EXPECT_NEAR(s.integrals.at("grad"), 4.0 * pi, 1e-10);
  EXPECT_NEAR(s.integrals.at("grad2"), 4.0 * pi / sh2, 1e-10);
  EXPECT_NEAR(s.integrals.at("grad2"), 9.0989, 1e-4);
  const double H = 2.0 / std::tanh(1.0);
  EXPECT_NEAR(s.integrals.at("H2"), H * H * s.area, 1e-8);
}

TEST(SurfaceIntegrals, FluxIsLevelIndependentOnPerturbedField) {
  for (double t : {0.2, 0.8, 1.5, 2.5, 4.0}) {
    const SurfaceData s = surface_integrals(quadrupole_ctx(), extract_level_curve(quadrupole_ctx(), level_of(t)));
    EXPECT_NEAR(s.integrals.at("grad"), 4.0 * pi, 1e-6) << t;
    EXPECT_GT(s.area, 0.0);
  }
}

TEST(MeanCurvature, HyperbolicSpheres) {
  const GreenField& f = hyperbolic_ctx().field();
  EXPECT_NEAR(mean_curvature(f, 1.0, 0.8), 2.0 / std::tanh(1.0), 1e-9);
  EXPECT_NEAR(mean_curvature(f, 1.0, 0.8), 2.626070571, 1e-8);
  EXPECT_NEAR(mean_curvature(f, 3.0, 2.2), 2.0 / std::tanh(3.0), 1e-9);
  EXPECT_NEAR(mean_curvature(f, 3.0, 2.2), 2.0099396, 1e-7);
  EXPECT_THROW(mean_curvature(f, 5.0, 1.0, 1.0), CriticalLevelError);
}

TEST(MeanCurvature, RadialClosedForm) {
  const GreenProfile g(build_mass_bump(1.0, 1.0, 4.0));
  for (double r : {0.5, 1.5, 2.0}) {
    const Jet2 p = g.metric()(r);
    EXPECT_DOUBLE_EQ(mean_curvature(g, r), 2.0 * p.d1 / p.value);
  }
}

// Radial w: spheres are round with H = 2 (e^w phi)_s / (e^w phi). H of a
// round level does not see the grid error in u at all.
TEST(MeanCurvature, ConformallyRadialFieldMatchesWarpFormula) {
  const AxisymMetric m = build_axisym_perturbation(0.05, 1.0, 3.0, 0);
  const GreenField f = solve_green_axisym(m, grid(256, 32));
  for (double r : {1.4, 2.0, 2.6}) {
    const ConformalJet c = m.conformal(r, 1.0);
    const Jet2 p = m.base(r);
    const double exact = 2.0 * (p.value * c.w_r + p.d1) / (std::exp(c.w) * p.value);
    EXPECT_NEAR(mean_curvature(f, r, 1.0), exact, 1e-10) << r;
  }
}

TEST(MeanCurvature, QuadrupoleFieldConvergesAtSecondOrder) {
  const AxisymMetric m = build_axisym_perturbation(1e-2, 1.0, 3.0, 2);
  std::vector<std::vector<double>> runs;
  for (int n : {128, 256, 512}) {
    const GreenField f = solve_green_axisym(m, grid(n, n / 4));
    std::vector<double> v;
    for (double r : {1.4, 2.0, 2.6})
      for (double th : {0.5, 1.5, 2.5}) v.push_back(mean_curvature(f, r, th));
    runs.push_back(v);
  }
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t k = 0; k < runs[0].size(); ++k) {
    d1 = std::max(d1, std::abs(runs[1][k] - runs[0][k]));
    d2 = std::max(d2, std::abs(runs[2][k] - runs[1][k]));
  }
  EXPECT_NEAR(d1 / d2, 4.0, 0.5);
}

TEST(SublevelVolume, HyperbolicBallAllIntegrands) {
  for (double t : {0.5, 1.0, 2.0}) {
    const double exact = 2.0 * pi * (std::sinh(t) * std::cosh(t) - t);
    for (VolumeIntegrand v : {VolumeIntegrand::one, VolumeIntegrand::flux_ratio, VolumeIntegrand::flux_ratio_cubed})
      EXPECT_NEAR(sublevel_volume_integrals(hyperbolic_ctx(), level_of(t), v), exact, 1e-10 * exact) << t;
  }
}

TEST(SublevelVolume, CoareaConsistency) {
  for (double t : {0.7, 1.8, 3.0})
    EXPECT_TRUE(coarea_check(quadrupole_ctx(), level_of(t), 1e-4 * (1.0 - level_of(t)), 1e-4).pass) << t;
}

TEST(Reference, WillmoreAndIsoperimetricOnPerturbedLevels) {
  for (double t : {0.8, 1.5, 2.5, 4.0}) {
    const LevelCurve c = extract_level_curve(quadrupole_ctx(), level_of(t));
    const ReferenceData d = reference_data(quadrupole_ctx(), c);
    EXPECT_TRUE(willmore_check(d, 1e-6).pass) << t;
    EXPECT_TRUE(isoperimetric_check(d, 1e-4).pass) << t;
  }
}

TEST(Reference, RoundSpheresAreEqualityCases) {
  const GreenProfile g(make_hyperbolic());
  const ReferenceData d = reference_data(g, 2.0);
  EXPECT_NEAR(willmore_check(d, 1e-6).value, 0.0, 1e-10);
  EXPECT_NEAR(isoperimetric_check(d, 1e-4).value, 0.0, 1e-9);
  const ReferenceData e = reference_data(hyperbolic_ctx(), extract_level_curve(hyperbolic_ctx(), level_of(2.0)));
  EXPECT_NEAR(e.area, d.area, 1e-9);
  EXPECT_NEAR(e.willmore, d.willmore, 1e-8);
  EXPECT_NEAR(e.volume, d.volume, 1e-9);
}

TEST(Reference, ChartOriginInsideLevelIsADomainError) {
  // the mass_bump chart shift is about -0.024, so tiny levels sit at rho <= 0
  EXPECT_THROW(reference_data(quadrupole_ctx(), extract_level_curve(quadrupole_ctx(), level_of(0.01))), DomainError);
}

TEST(ExtractLevel, RepeatedExtractionIsBitIdentical) {
  const LevelCurve a = extract_level_curve(quadrupole_ctx(), level_of(1.3));
  const LevelCurve b = extract_level_curve(quadrupole_ctx(), level_of(1.3));
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.arc_weights, b.arc_weights);
}
