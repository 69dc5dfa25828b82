#pragma once

// Model metric families on R^3 with a distinguished pole, their scalar
// curvature, and hypothesis checks (R >= -6, hyperboloidal decay, smooth pole).

#include "pmass/core.hpp"
#include "pmass/interp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace pmass {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class Family { hyperbolic, perturbed_warp, mass_bump, custom };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::hyperbolic: return "hyperbolic";
    case Family::perturbed_warp: return "perturbed_warp";
    case Family::mass_bump: return "mass_bump";
    case Family::custom: return "custom";
  }
  return "custom";
}

/// Warped product dr^2 + phi(r)^2 g_{S^2} in geodesic polar coordinates
/// about the pole. Far away the metric is compared with the hyperbolic
/// metric in the chart rho = r + chart_shift.
struct RadialMetric {
  std::function<Jet2(double)> warp;
  double r_max = 10.5;
  double delta = 0.0;
  Family family = Family::custom;
  // phi == sinh on (0, hyperbolic_below].
  double hyperbolic_below = 0.0;
  // phi == sinh(r + chart_shift) on [hyperbolic_above, inf).
  double hyperbolic_above = infinity;
  // Radial interval carrying the perturbation; used for sampling and fit windows.
  double support_lo = 0.0;
  double support_hi = 0.0;
  double chart_shift = 0.0;

  Jet2 operator()(double r) const { return warp(r); }
  double chart_radius(double r) const { return r + chart_shift; }
  bool exactly_hyperbolic() const { return hyperbolic_below >= r_max; }
};

inline Jet2 sinh_jet(double r) {
  const double s = std::sinh(r);
  return {s, std::cosh(r), s};
}

inline RadialMetric make_hyperbolic(double r_max = 10.5) {
  RadialMetric m;
  m.warp = sinh_jet;
  m.r_max = r_max;
  m.delta = infinity;
  m.family = Family::hyperbolic;
  m.hyperbolic_below = infinity;
  m.hyperbolic_above = 0.0;
  return m;
}

/// phi(r) = sinh r (1 + amplitude e^{-decay r} bump((r - center)/width)).
inline RadialMetric build_perturbed_warp(double amplitude, double decay, double bump_center,
                                         double bump_width, double r_max = 10.5) {
  if (!(bump_width > 0.0) || !(bump_center - bump_width > 0.0))
    throw ParameterError("build_perturbed_warp: bump support must stay away from the pole");
  if (!(decay > 0.0)) throw ParameterError("build_perturbed_warp: decay must be positive");
  if (!(bump_center + bump_width < r_max))
    throw ParameterError("build_perturbed_warp: bump support must end before r_max");
  RadialMetric m;
  m.warp = [=](double r) -> Jet2 {
    const smooth::BumpValue b = smooth::bump((r - bump_center) / bump_width);
    if (b.value == 0.0 || amplitude == 0.0) return sinh_jet(r);
    const double e = amplitude * std::exp(-decay * r);
    const double f = e * b.value;
    const double f1 = e * (b.d1 / bump_width - decay * b.value);
    const double f2 = e * (b.d2 / (bump_width * bump_width) - 2.0 * decay * b.d1 / bump_width +
                           decay * decay * b.value);
    const double s = std::sinh(r), c = std::cosh(r);
    return {s * (1.0 + f), c * (1.0 + f) + s * f1, s * (1.0 + f) + 2.0 * c * f1 + s * f2};
  };
  m.r_max = r_max;
  m.delta = decay;
  m.family = amplitude == 0.0 ? Family::hyperbolic : Family::perturbed_warp;
  m.hyperbolic_below = amplitude == 0.0 ? infinity : bump_center - bump_width;
  m.hyperbolic_above = amplitude == 0.0 ? 0.0 : bump_center + bump_width;
  m.support_lo = bump_center - bump_width;
  m.support_hi = bump_center + bump_width;
  return m;
}

namespace detail {

// Hawking-mass profile m(area radius): smooth step from 0 to total_mass.
struct MassProfile {
  double total_mass;
  double phi_in;
  double phi_out;

  double m(double phi) const {
    return total_mass * smooth::step((phi - phi_in) / (phi_out - phi_in));
  }
  double dm(double phi) const {
    return total_mass * smooth::step_d((phi - phi_in) / (phi_out - phi_in)) / (phi_out - phi_in);
  }
  // (dr/dphi)^{-2} for the warped product with this Hawking mass.
  double v(double phi) const { return 1.0 + phi * phi - 2.0 * m(phi) / phi; }
  double dv(double phi) const {
    return 2.0 * phi + 2.0 * m(phi) / (phi * phi) - 2.0 * dm(phi) / phi;
  }
  Jet2 jet(double phi) const { return {phi, std::sqrt(v(phi)), 0.5 * dv(phi)}; }
};

}  // namespace detail

/// Warped product whose Hawking mass rises smoothly from 0 to `total_mass`
/// between area radii phi_in and phi_out. R + 6 = 4 m'(phi) / phi^2 >= 0, the
/// metric is exactly hyperbolic for phi <= phi_in and AdS-Schwarzschild beyond
/// phi_out, where it decays to the hyperbolic metric at order 3 in the
/// shifted chart.
inline RadialMetric build_mass_bump(double total_mass, double phi_in, double phi_out,
                                    double r_max = 10.5, double step = 1.0 / 256.0) {
  if (!(phi_in > 0.0) || !(phi_out > phi_in))
    throw ParameterError("build_mass_bump: need 0 < phi_in < phi_out");
  if (!(total_mass >= 0.0)) throw ParameterError("build_mass_bump: mass must be nonnegative");
  const detail::MassProfile prof{total_mass, phi_in, phi_out};
  for (int i = 0; i <= 400; ++i) {
    const double phi = phi_in + (phi_out - phi_in) * i / 400.0;
    if (!(prof.v(phi) > 0.05))
      throw ParameterError("build_mass_bump: mass too large, the area radius stops growing");
  }

  const double r_a = std::asinh(phi_in);
  const auto n_nodes = static_cast<std::size_t>(std::ceil((r_max + 1.0 - r_a) / step)) + 1;
  std::vector<Jet2> nodes;
  nodes.reserve(n_nodes);
  nodes.push_back(prof.jet(phi_in));
  auto drdphi = [&](double p) { return 1.0 / std::sqrt(prof.v(p)); };
  // r - r_a is accumulated in extended precision against the fixed lattice
  // k * step, so rounding in individual nodes does not drift the table.
  double phi_prev = phi_in;
  long double r_acc = 0.0L;
  for (std::size_t k = 1; k < n_nodes; ++k) {
    const long double target = static_cast<long double>(k) * step;
    const Jet2 jp = prof.jet(phi_prev);
    const double h = static_cast<double>(target - r_acc);
    double phi = phi_prev + h * jp.d1 + 0.5 * h * h * jp.d2;
    double piece = 0.0;
    for (int it = 0; it < 12; ++it) {
      piece = gauss_legendre(drdphi, phi_prev, phi);
      const double r_err = static_cast<double>(target - (r_acc + piece));
      const double dphi = r_err * std::sqrt(prof.v(phi));
      phi += dphi;
      if (std::abs(dphi) <= 2e-16 * phi) break;
    }
    piece = gauss_legendre(drdphi, phi_prev, phi);
    r_acc += piece;
    nodes.push_back(prof.jet(phi));
    phi_prev = phi;
  }
  const QuinticHermiteTable table(r_a, step, std::move(nodes));

  // Chart shift lim (asinh phi - r), with the far tail integrated in x = 1/phi.
  const double r_end = table.x_max();
  const double phi_end = table.nodes().back().value;
  const double big_m = total_mass;
  auto tail = [big_m](double x) {
    if (x == 0.0) return 0.0;
    const double a = 1.0 + x * x;
    const double b = a - 2.0 * big_m * x * x * x;
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    return -2.0 * big_m * x * x / (sa * sb * (sa + sb));
  };
  const double shift = std::asinh(phi_end) - r_end + integrate(tail, 0.0, 1.0 / phi_end, 1e-12);

  const double r_out = r_a + integrate(drdphi, phi_in, phi_out, 1e-13);

  RadialMetric m;
  m.warp = [prof, table, r_a](double r) -> Jet2 {
    if (r <= r_a) return sinh_jet(r);
    return prof.jet(table(r).value);
  };
  m.r_max = r_max;
  m.delta = 3.0;
  m.family = total_mass == 0.0 ? Family::hyperbolic : Family::mass_bump;
  m.hyperbolic_below = total_mass == 0.0 ? infinity : r_a;
  m.hyperbolic_above = total_mass == 0.0 ? 0.0 : infinity;
  m.support_lo = r_a;
  m.support_hi = r_out;
  m.chart_shift = total_mass == 0.0 ? 0.0 : shift;
  return m;
}

/// Arbitrary warp supplied by the caller.
inline RadialMetric make_custom_metric(std::function<Jet2(double)> warp, double r_max,
                                       double delta, double chart_shift = 0.0,
                                       double hyperbolic_below = 0.0) {
  RadialMetric m;
  m.warp = std::move(warp);
  m.r_max = r_max;
  m.delta = delta;
  m.family = Family::custom;
  m.chart_shift = chart_shift;
  m.hyperbolic_below = hyperbolic_below;
  m.support_lo = hyperbolic_below;
  m.support_hi = r_max;
  return m;
}

/// R(r) = -4 phi''/phi - 2 (phi'^2 - 1)/phi^2.
inline double scalar_curvature_radial(const RadialMetric& metric, double r) {
  if (!(r > 0.0) || r > metric.r_max)
    throw DomainError("scalar_curvature_radial: r outside (0, r_max]");
  const Jet2 p = metric(r);
  return -4.0 * p.d2 / p.value - 2.0 * (p.d1 * p.d1 - 1.0) / (p.value * p.value);
}

// ---------------------------------------------------------------------------
// Axisymmetric conformal perturbations e^{2w} g_base.

/// Conformal exponent w and the derivatives the solvers need.
struct ConformalJet {
  double w = 0.0;
  double w_r = 0.0;
  double w_rr = 0.0;
  double w_rt = 0.0;
  double w_t = 0.0;    // d/dtheta
  double w_tt = 0.0;   // d^2/dtheta^2
  double ang_lap = 0.0;  // w_tt + cot(theta) w_t
};

struct AxisymMetric {
  RadialMetric base;
  double amplitude = 0.0;
  double r_in = 1.0;
  double r_out = 2.0;
  unsigned angular_mode = 0;

  /// w(r, theta) = amplitude * bump(r) * P_l(cos theta).
  ConformalJet conformal(double r, double theta) const {
    if (amplitude == 0.0 || r <= r_in || r >= r_out) return {};
    const double mid = 0.5 * (r_in + r_out);
    const double half = 0.5 * (r_out - r_in);
    const smooth::BumpValue b = smooth::bump((r - mid) / half);
    const double x = std::cos(theta), s = std::sin(theta);
    const unsigned l = angular_mode;
    const double p = std::legendre(l, x);
    double dp = 0.0;  // P_l'(x) = sum over k = l-1, l-3, ... of (2k+1) P_k(x)
    for (int k = static_cast<int>(l) - 1; k >= 0; k -= 2)
      dp += (2.0 * k + 1.0) * std::legendre(static_cast<unsigned>(k), x);
    const double ll = static_cast<double>(l) * (l + 1.0);
    ConformalJet j;
    j.w = amplitude * b.value * p;
    j.w_r = amplitude * b.d1 / half * p;
    j.w_rr = amplitude * b.d2 / (half * half) * p;
    j.w_t = -amplitude * b.value * s * dp;
    j.w_rt = -amplitude * b.d1 / half * s * dp;
    j.ang_lap = -amplitude * b.value * ll * p;
    j.w_tt = amplitude * b.value * (-ll * p + x * dp);
    return j;
  }

  /// Scalar curvature of e^{2w} g_base: e^{-2w} (R_base - 4 Lap w - 2 |dw|^2).
  double scalar_curvature(double r, double theta) const {
    const double rb = scalar_curvature_radial(base, r);
    const ConformalJet c = conformal(r, theta);
    if (c.w == 0.0 && c.w_r == 0.0 && c.w_t == 0.0) return rb;
    const Jet2 p = base(r);
    const double lap = c.w_rr + 2.0 * p.d1 / p.value * c.w_r + c.ang_lap / (p.value * p.value);
    const double grad2 = c.w_r * c.w_r + c.w_t * c.w_t / (p.value * p.value);
    return std::exp(-2.0 * c.w) * (rb - 4.0 * lap - 2.0 * grad2);
  }
};

inline AxisymMetric build_axisym_perturbation(double amplitude, double r_in, double r_out,
                                              unsigned angular_mode,
                                              RadialMetric base = make_hyperbolic()) {
  if (!(r_in > 0.0) || !(r_out > r_in))
    throw ParameterError("build_axisym_perturbation: need 0 < r_in < r_out");
  if (r_out >= base.r_max)
    throw ParameterError("build_axisym_perturbation: annulus must end before r_max");
  if (!(base.hyperbolic_below > 0.0))
    throw ParameterError("build_axisym_perturbation: base must be exactly hyperbolic near the pole");
  return AxisymMetric{std::move(base), amplitude, r_in, r_out, angular_mode};
}

// ---------------------------------------------------------------------------
// Validation.

enum class Verdict { valid, invalid_scalar, invalid_decay, invalid_pole };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::invalid_scalar: return "invalid_scalar";
    case Verdict::invalid_decay: return "invalid_decay";
    case Verdict::invalid_pole: return "invalid_pole";
  }
  return "invalid";
}

struct CurvatureReport {
  double min_R_plus_6 = infinity;
  double argmin_r = 0.0;
  double decay_constant = 0.0;
  double decay_exponent = infinity;  // fitted; +inf when the tail is exact
  bool pole_ok = true;
  Verdict verdict = Verdict::valid;
  // Which hypothesis sets the metric meets (scalar bound alone, or with delta > 1).
  bool monotonicity_hypotheses = false;
  bool mass_hypotheses = false;
};

inline constexpr double decay_fit_slack = 0.25;

namespace detail {

inline void finish_verdict(CurvatureReport& rep, double tol, double delta) {
  if (!rep.pole_ok)
    rep.verdict = Verdict::invalid_pole;
  else if (rep.min_R_plus_6 < -tol)
    rep.verdict = Verdict::invalid_scalar;
  else if (rep.decay_exponent < delta - decay_fit_slack)
    rep.verdict = Verdict::invalid_decay;
  else
    rep.verdict = Verdict::valid;
  rep.monotonicity_hypotheses = rep.pole_ok && rep.min_R_plus_6 >= -tol;
  rep.mass_hypotheses = rep.verdict == Verdict::valid && delta > 1.0;
}

inline bool pole_smooth(const RadialMetric& metric) {
  const double r = 1e-4;
  const Jet2 p = metric(r);
  return std::abs(p.value / r - 1.0) < 1e-3 && std::abs(p.d1 - 1.0) < 1e-3;
}

}  // namespace detail

/// Samples R on a grid densest in the perturbation support, measures the tail
/// decay of phi / sinh(r + c) - 1 and checks the pole.
inline CurvatureReport validate_metric(const RadialMetric& metric, double tol = 1e-12) {
  CurvatureReport rep;
  rep.pole_ok = detail::pole_smooth(metric);

  std::vector<double> samples;
  const double r_lo = 0.05;
  for (double r = r_lo; r <= metric.r_max; r += 5e-3) samples.push_back(r);
  if (metric.support_hi > metric.support_lo) {
    const double a = std::max(metric.support_lo, r_lo);
    const double b = std::min(metric.support_hi, metric.r_max);
    for (int i = 0; i <= 2000; ++i) samples.push_back(a + (b - a) * i / 2000.0);
  }
  for (double r : samples) {
    const double v = scalar_curvature_radial(metric, r) + 6.0;
    if (!std::isfinite(v)) {
      rep.min_R_plus_6 = -infinity;
      rep.argmin_r = r;
      break;
    }
    if (v < rep.min_R_plus_6) {
      rep.min_R_plus_6 = v;
      rep.argmin_r = r;
    }
  }

  // Tail decay, fitted by least squares on log|phi/sinh(rho) - 1|.
  const double w0 = metric.support_hi < 0.75 * metric.r_max
                        ? std::max(metric.support_hi, 0.5 * metric.r_max)
                        : 0.5 * metric.r_max;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i <= 200; ++i) {
    const double r = w0 + (metric.r_max - w0) * i / 200.0;
    const double rho = metric.chart_radius(r);
    const double dev = std::abs(metric(r).value / std::sinh(rho) - 1.0);
    if (std::isfinite(metric.delta))
      rep.decay_constant = std::max(rep.decay_constant, dev * std::exp(metric.delta * rho));
    if (dev > 1e-13) {
      const double y = std::log(dev);
      sx += rho, sy += y, sxx += rho * rho, sxy += rho * y;
      ++n;
    }
  }
  if (n >= 10) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.decay_exponent = -slope;
  }
  detail::finish_verdict(rep, tol, metric.delta);
  return rep;
}

inline CurvatureReport validate_metric(const AxisymMetric& metric, double tol = 1e-6) {
  CurvatureReport rep = validate_metric(metric.base, std::min(tol, 1e-12));
  if (metric.amplitude != 0.0) {
    const int nr = 400, nt = 181;
    for (int i = 0; i <= nr; ++i) {
      const double r = metric.r_in + (metric.r_out - metric.r_in) * i / nr;
      for (int j = 0; j < nt; ++j) {
        const double th = pi * j / (nt - 1);
        const double v = metric.scalar_curvature(r, th) + 6.0;
        if (v < rep.min_R_plus_6) {
          rep.min_R_plus_6 = v;
          rep.argmin_r = r;
        }
      }
    }
  }
  detail::finish_verdict(rep, tol, metric.base.delta);
  return rep;
}

}  // namespace pmass
