#pragma once

// F, its derivative decomposition and Q on the level curves of a grid field.

#include "pmass/core.hpp"
#include "pmass/functional.hpp"
#include "pmass/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pmass {

namespace detail {

struct AxisymLevel {
  LevelCurve curve;
  std::vector<LevelPoint> points;
  double q = 0.0;  // 1 - level = coth t - 1
};

inline AxisymLevel axisym_level(const FieldContext& ctx, double t) {
  if (!(t > 0.0)) throw DomainError("evaluate_F: t must be positive");
  AxisymLevel lv;
  lv.q = coth_minus_one(t);
  lv.curve = extract_level_curve(ctx, 1.0 - lv.q);
  lv.points = level_points(ctx, lv.curve);
  return lv;
}

struct LevelSums {
  double grad2 = 0.0;
  double grad_h = 0.0;
};

inline LevelSums level_sums(const std::vector<LevelPoint>& pts) {
  LevelSums s;
  for (const LevelPoint& p : pts) {
    s.grad2 += p.dA * p.geo.grad * p.geo.grad;
    s.grad_h += p.dA * p.geo.grad * p.geo.H;
  }
  return s;
}

}  // namespace detail

inline MonotoneSample evaluate_F(const FieldContext& ctx, double t) {
  const detail::AxisymLevel lv = detail::axisym_level(ctx, t);
  const detail::LevelSums s = detail::level_sums(lv.points);
  const double sh = std::sinh(t), ch = std::cosh(t);
  MonotoneSample m;
  m.t = t;
  m.term_linear = four_pi * t;
  m.term_grad2 = sh * sh * sh * ch * s.grad2;
  m.term_H = -sh * sh * s.grad_h;
  m.term_vol1 = 3.0 * sublevel_volume_integral(ctx, lv.curve, VolumeIntegrand::flux_ratio);
  m.term_vol2 = -sublevel_volume_integral(ctx, lv.curve, VolumeIntegrand::flux_ratio_cubed);
  m.close();
  return m;
}

inline DerivativeSample evaluate_Fprime(const FieldContext& ctx, double t,
                                        double step = fprime_step) {
  const detail::AxisymLevel lv = detail::axisym_level(ctx, t);
  DerivativeSample d;
  d.t = t;
  double gauss = 0.0;
  for (const LevelPoint& p : lv.points) {
    const auto& g = p.geo;
    const double k_tau = g.H - g.k_phi;
    // Gauss equation: K = R/2 - Ric(n, n) + k_tau k_phi
    gauss += p.dA * (0.5 * p.scalar - g.ric_nn + k_tau * g.k_phi);
    d.scalar_excess += p.dA * 0.5 * (p.scalar + 6.0);
    const double traceless = g.H - 2.0 * g.k_phi;  // |h°|^2 = traceless^2 / 2
    d.gradient_term += p.dA * (g.tangential * g.tangential + 0.25 * traceless * traceless);
    const double model = 2.0 * (1.0 + lv.q) * g.grad / (lv.q * (lv.q + 2.0));
    d.sphere_comparison += p.dA * 0.75 * (g.H - model) * (g.H - model);
  }
  d.gauss_bonnet_term = four_pi - gauss;
  d.close();
  const double hs = std::min(step, 0.5 * t);
  d.Fprime_numeric = (evaluate_F(ctx, t + hs).F - evaluate_F(ctx, t - hs).F) / (2.0 * hs);
  return d;
}

inline double evaluate_Q(const FieldContext& ctx, double t) {
  const detail::AxisymLevel lv = detail::axisym_level(ctx, t);
  const detail::LevelSums s = detail::level_sums(lv.points);
  const double sh = std::sinh(t), ch = std::cosh(t);
  return four_pi * t + sh * sh * sh * ch * s.grad2 - sh * sh * s.grad_h +
         2.0 * sublevel_volume_integral(ctx, lv.curve, VolumeIntegrand::one);
}

inline QSplit q_split(const FieldContext& ctx, double t) {
  const detail::AxisymLevel lv = detail::axisym_level(ctx, t);
  const ReferenceData ref = reference_data(ctx, lv.curve);
  double willmore = 0.0;
  for (const LevelPoint& p : lv.points) willmore += p.dA * p.geo.H * p.geo.H;
  const double volume = sublevel_volume_integral(ctx, lv.curve, VolumeIntegrand::one);
  const double th = std::tanh(t);
  QSplit q;
  q.Q1 = four_pi * t + 2.0 * ref.volume - 0.25 * th * ref.willmore;
  q.Q2 = 2.0 * (volume - ref.volume) - 0.25 * th * (willmore - ref.willmore);
  return q;
}

}  // namespace pmass
