#pragma once

// The monotone functional F(t) along the levels {u = 2 - coth t}, its
// derivative decomposition, the comparison functions Q, Q1, Q2 and the audit.
// This header holds the radial evaluators; grid-field overloads live in
// functional_axisym.hpp and share the sample types and the audit.

#include "pmass/core.hpp"
#include "pmass/geometry.hpp"
#include "pmass/green_radial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pmass {

struct MonotoneSample {
  double t = 0.0;
  double term_linear = 0.0;
  double term_grad2 = 0.0;
  double term_H = 0.0;
  double term_vol1 = 0.0;
  double term_vol2 = 0.0;
  double F = 0.0;
  bool regular = true;

  void close() { F = term_linear + term_grad2 + term_H + term_vol1 + term_vol2; }
};

struct DerivativeSample {
  double t = 0.0;
  double gauss_bonnet_term = 0.0;
  double scalar_excess = 0.0;
  double gradient_term = 0.0;
  double sphere_comparison = 0.0;
  double Fprime_formula = 0.0;
  double Fprime_numeric = 0.0;
  bool regular = true;

  void close() {
    Fprime_formula = gauss_bonnet_term + scalar_excess + gradient_term + sphere_comparison;
  }
};

struct QSplit {
  double Q1 = 0.0;
  double Q2 = 0.0;
};

inline constexpr double fprime_step = 1e-3;

namespace detail {

// Volume integrals over {r < r_t}, each split as the hyperbolic closed form
// plus a correction integrated by composite Gauss-Legendre on a fixed panel
// lattice, so the result is a smooth function of r_t.
struct RadialVolumes {
  double volume = 0.0;  // int 4 pi phi^2
  double vol1 = 0.0;    // int |du| / ((2-u)^2 - 1)
  double vol2 = 0.0;    // int |du|^3 / ((2-u)^2 - 1)^3
};

inline constexpr double volume_panel = 1.0 / 16.0;

template <class F>
double lattice_integral(F&& f, double b) {
  double sum = 0.0;
  double a = 0.0;
  while (a + volume_panel < b) {
    sum += gauss_legendre(f, a, a + volume_panel);
    a += volume_panel;
  }
  return sum + gauss_legendre(f, a, b);
}

inline RadialVolumes radial_volumes(const GreenProfile& g, double r_t) {
  const RadialMetric& m = g.metric();
  // 2 pi (sinh r cosh r - r) = 4 pi int_0^r sinh^2
  const double hyp = 2.0 * pi * sinhcosh_minus_x(r_t);
  RadialVolumes v{hyp, hyp, hyp};
  if (m.exactly_hyperbolic()) return v;
  auto d_vol = [&](double s) {
    const double p = m(s).value, h = std::sinh(s);
    return (p - h) * (p + h);
  };
  auto d_vol1 = [&](double s) {
    const double q = g.tail(s), h = std::sinh(s);
    return 1.0 / (q * (q + 2.0)) - h * h;
  };
  auto d_vol2 = [&](double s) {
    const double q = g.tail(s), h = std::sinh(s), p = m(s).value;
    const double k = 1.0 / (p * p * q * (q + 2.0));
    return p * p * k * k * k - h * h;
  };
  v.volume += four_pi * lattice_integral(d_vol, r_t);
  v.vol1 += four_pi * lattice_integral(d_vol1, r_t);
  v.vol2 += four_pi * lattice_integral(d_vol2, r_t);
  return v;
}

struct RadialLevel {
  double t, r, phi, dphi, tail;
};

inline RadialLevel radial_level(const GreenProfile& g, double t) {
  const double r = level_radius(g, t);
  const Jet2 p = g.metric()(r);
  return {t, r, p.value, p.d1, coth_minus_one(t)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Radial evaluators. On a warped product every level is a round sphere
// {r = r_t} of area 4 pi phi^2 with |du| = phi^{-2} and H = 2 phi'/phi.

inline MonotoneSample evaluate_F(const GreenProfile& g, double t) {
  const detail::RadialLevel lv = detail::radial_level(g, t);
  const detail::RadialVolumes vol = detail::radial_volumes(g, lv.r);
  const double sh = std::sinh(t), ch = std::cosh(t);
  MonotoneSample s;
  s.t = t;
  s.term_linear = four_pi * t;
  s.term_grad2 = sh * sh * sh * ch * four_pi / (lv.phi * lv.phi);
  s.term_H = -2.0 * four_pi * sh * sh * lv.dphi / lv.phi;
  s.term_vol1 = 3.0 * vol.vol1;
  s.term_vol2 = -vol.vol2;
  s.close();
  return s;
}

inline DerivativeSample evaluate_Fprime(const GreenProfile& g, double t,
                                        double step = fprime_step) {
  const detail::RadialLevel lv = detail::radial_level(g, t);
  const double area = four_pi * lv.phi * lv.phi;
  const double grad = 1.0 / (lv.phi * lv.phi);
  const double h = 2.0 * lv.dphi / lv.phi;
  const double q = lv.tail;
  const double model_h = 2.0 * (1.0 + q) * grad / (q * (q + 2.0));
  DerivativeSample d;
  d.t = t;
  // Intrinsic curvature of the round level sphere is 2 / phi^2.
  d.gauss_bonnet_term = four_pi - (1.0 / (lv.phi * lv.phi)) * area;
  d.scalar_excess = 0.5 * (scalar_curvature_radial(g.metric(), lv.r) + 6.0) * area;
  d.gradient_term = 0.0;  // |du| is constant and the level is umbilic
  d.sphere_comparison = 0.75 * (h - model_h) * (h - model_h) * area;
  d.close();
  const double hs = std::min(step, 0.5 * t);
  d.Fprime_numeric = (evaluate_F(g, t + hs).F - evaluate_F(g, t - hs).F) / (2.0 * hs);
  return d;
}

inline double evaluate_Q(const GreenProfile& g, double t) {
  const detail::RadialLevel lv = detail::radial_level(g, t);
  const detail::RadialVolumes vol = detail::radial_volumes(g, lv.r);
  const double sh = std::sinh(t), ch = std::cosh(t);
  return four_pi * t + sh * sh * sh * ch * four_pi / (lv.phi * lv.phi) -
         2.0 * four_pi * sh * sh * lv.dphi / lv.phi + 2.0 * vol.volume;
}

/// Q1 and Q2, with the reference hyperbolic metric dρ^2 + sinh^2ρ g_{S^2} in
/// the chart ρ = r + c, in which the level sphere is {ρ = r_t + c}.
inline QSplit q_split(const GreenProfile& g, double t) {
  const detail::RadialLevel lv = detail::radial_level(g, t);
  const detail::RadialVolumes vol = detail::radial_volumes(g, lv.r);
  const double rho = g.metric().chart_radius(lv.r);
  const double vol_hyp = hyperbolic_ball_volume(rho);
  const double ch = std::cosh(rho);
  const double willmore_b = 4.0 * four_pi * ch * ch;            // int H_b^2 dA_b
  const double willmore = 4.0 * four_pi * lv.dphi * lv.dphi;    // int H^2 dA
  const double th = std::tanh(t);
  QSplit q;
  q.Q1 = four_pi * t + 2.0 * vol_hyp - 0.25 * th * willmore_b;
  q.Q2 = 2.0 * (vol.volume - vol_hyp) - 0.25 * th * (willmore - willmore_b);
  return q;
}

// ---------------------------------------------------------------------------
// Audit.

struct AuditTolerances {
  double monotonicity = 1e-6;
  double limit = 1e-4;
  double mass = 1e-6;
  double start_slope = 1.0;  // |F(t_min)| <= start_slope * t_min
};

struct CheckLine {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  double margin() const { return bound - value; }
};

struct AuditReport {
  std::vector<MonotoneSample> samples;
  double max_violation = 0.0;
  double limit_estimate = 0.0;
  double limit_bound = 0.0;
  std::vector<CheckLine> checks;
  bool expected_fail = false;  // metric violates the hypotheses

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
  }
};

/// Geometric t grid.
inline std::vector<double> geometric_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
    throw ParameterError("geometric_grid: need 0 < t_min < t_max and n >= 2");
  std::vector<double> ts(static_cast<std::size_t>(n));
  const double ratio = std::log(t_max / t_min);
  for (int i = 0; i < n; ++i) ts[i] = t_min * std::exp(ratio * i / (n - 1));
  ts.back() = t_max;
  return ts;
}

/// Largest t whose level stays inside the truncation horizon.
inline double t_horizon(const GreenProfile& g) {
  return std::atanh(1.0 / (1.0 + g.tail(g.metric().r_max)));
}

/// F_inf from F = F_inf + a e^{-t} + b e^{-2t} through the last three samples.
inline double extrapolate_limit(const std::vector<MonotoneSample>& regular) {
  const std::size_t n = regular.size();
  if (n < 3) throw ParameterError("extrapolate_limit: need three samples");
  Eigen::Matrix3d a;
  Eigen::Vector3d y;
  for (int i = 0; i < 3; ++i) {
    const MonotoneSample& s = regular[n - 3 + i];
    a(i, 0) = 1.0;
    a(i, 1) = std::exp(-s.t);
    a(i, 2) = std::exp(-2.0 * s.t);
    y(i) = s.F;
  }
  return a.colPivHouseholderQr().solve(y)(0);
}

inline AuditReport audit_samples(std::vector<MonotoneSample> samples, double m_vr,
                                 const AuditTolerances& tol = {}) {
  AuditReport rep;
  rep.samples = std::move(samples);
  std::vector<MonotoneSample> reg;
  for (const auto& s : rep.samples)
    if (s.regular) reg.push_back(s);
  if (reg.size() < 4) throw RangeError("audit: fewer than 4 regular samples");
  if (!std::is_sorted(reg.begin(), reg.end(),
                      [](const MonotoneSample& a, const MonotoneSample& b) { return a.t < b.t; }))
    throw ParameterError("audit: t grid must be sorted");

  double running_max = -infinity;
  for (const auto& s : reg) {
    running_max = std::max(running_max, s.F);
    rep.max_violation = std::max(rep.max_violation, running_max - s.F);
  }
  rep.limit_estimate = extrapolate_limit(reg);
  rep.limit_bound = 0.5 * m_vr;

  const MonotoneSample& first = reg.front();
  rep.checks.push_back({"start", std::abs(first.F), tol.start_slope * first.t,
                        std::abs(first.F) <= tol.start_slope * first.t});
  rep.checks.push_back({"monotone", rep.max_violation, tol.monotonicity,
                        rep.max_violation <= tol.monotonicity});
  rep.checks.push_back({"limit", rep.limit_estimate, rep.limit_bound + tol.limit,
                        rep.limit_estimate <= rep.limit_bound + tol.limit});
  rep.checks.push_back({"mass_sign", -m_vr, tol.mass, -m_vr <= tol.mass});
  return rep;
}

/// Evaluates F on the grid (skipping critical levels) and audits the result.
template <class Context>
AuditReport audit(const Context& ctx, const std::vector<double>& t_grid, double m_vr,
                  const AuditTolerances& tol = {}) {
  std::vector<MonotoneSample> samples;
  samples.reserve(t_grid.size());
  for (double t : t_grid) {
    try {
      samples.push_back(evaluate_F(ctx, t));
    } catch (const CriticalLevelError&) {
      MonotoneSample s;
      s.t = t;
      s.regular = false;
      samples.push_back(s);
    }
  }
  return audit_samples(std::move(samples), m_vr, tol);
}

}  // namespace pmass
