#pragma once

// Volume-renormalized mass: ADM-type boundary integral against the hyperbolic
// reference plus four times the renormalized volume, with extrapolation in the
// truncation radius.

#include "pmass/core.hpp"
#include "pmass/functional.hpp"
#include "pmass/geometry.hpp"
#include "pmass/green_radial.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pmass {

struct MassReport {
  std::vector<double> radii;
  std::vector<double> boundary_terms;
  std::vector<double> volume_terms;
  std::vector<double> partial_sums;
  double m_vr = 0.0;
  double convergence_rate = 0.0;  // kappa; +inf when the partial sums are constant
  bool converged = true;
  std::string warning;
};

/// Radial closed form in the chart rho = r + c where the reference metric is
/// d rho^2 + sinh^2 rho g_{S^2}. With psi = phi^2 / sinh^2 rho - 1 the
/// integrand is linear in g - b and integrates to
/// 4 pi sinh^2 rho (-2 coth rho psi - 2 psi').
inline double boundary_integral(const RadialMetric& metric, double r) {
  if (!(r > 0.0) || r > metric.r_max) throw DomainError("boundary_integral: r outside (0, r_max]");
  const double rho = metric.chart_radius(r);
  if (!(rho > 0.0)) throw DomainError("boundary_integral: r lies inside the chart's origin");
  const Jet2 p = metric(r);
  const double sh = std::sinh(rho), ch = std::cosh(rho);
  // psi = (phi - sh)(phi + sh) / sh^2 keeps psi == 0 exact on the model.
  const double psi = (p.value - sh) * (p.value + sh) / (sh * sh);
  const double dpsi = 2.0 * (p.value * p.d1 * sh - p.value * p.value * ch) / (sh * sh * sh);
  return four_pi * sh * sh * (-2.0 * ch / sh * psi - 2.0 * dpsi);
}

/// 4 (Vol_g(M_r) - Vol_b(B_rho)) written as
/// 16 pi int_0^r (phi^2 - sinh^2(s + c)) ds - 8 pi (sinh c cosh c - c).
inline double renormalized_volume(const RadialMetric& metric, double r) {
  if (!(r > 0.0) || r > metric.r_max)
    throw DomainError("renormalized_volume: r outside (0, r_max]");
  if (metric.exactly_hyperbolic()) return 0.0;
  const double c = metric.chart_shift;
  auto d = [&](double s) {
    const double p = metric(s).value, h = std::sinh(s + c);
    return (p - h) * (p + h);
  };
  return 4.0 * four_pi * detail::lattice_integral(d, r) - 2.0 * four_pi * sinhcosh_minus_x(c);
}

namespace detail {

// m + A e^{-kappa r} through the last three partial sums.
inline void extrapolate_mass(MassReport& rep) {
  const std::size_t n = rep.radii.size();
  const double r1 = rep.radii[n - 3], r2 = rep.radii[n - 2], r3 = rep.radii[n - 1];
  const double p1 = rep.partial_sums[n - 3], p2 = rep.partial_sums[n - 2],
               p3 = rep.partial_sums[n - 1];
  const double scale = std::max({std::abs(p1), std::abs(p2), std::abs(p3), 1.0});
  const double e1 = p2 - p1, e2 = p3 - p2;
  if (std::abs(e1) <= 1e-14 * scale && std::abs(e2) <= 1e-14 * scale) {
    rep.m_vr = p3;
    rep.convergence_rate = infinity;
    return;
  }
  const double d1 = r2 - r1, d2 = r3 - r2;
  const double q = e2 / e1;
  if (!(q > 0.0) || !(q < d2 / d1)) {
    rep.m_vr = p3;
    rep.convergence_rate = q > 0.0 ? -std::log(q) / d2 : 0.0;
    rep.converged = false;
    rep.warning = "partial sums do not contract; fitted rate is not positive";
    return;
  }
  auto ratio = [&](double k) {
    return std::exp(-k * d1) * (-std::expm1(-k * d2)) / (-std::expm1(-k * d1)) - q;
  };
  double hi = 1.0;
  while (ratio(hi) > 0.0 && hi < 1e3) hi *= 2.0;
  if (ratio(hi) > 0.0) {
    rep.m_vr = p3;
    rep.convergence_rate = infinity;
    return;
  }
  const double kappa = bracketed_root(ratio, 1e-12, hi);
  rep.convergence_rate = kappa;
  rep.m_vr = p3 + e2 / std::expm1(kappa * d2);
}

inline void check_radii(const std::vector<double>& radii, double r_max) {
  if (radii.size() < 3) throw ParameterError("compute_m_vr: need at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || radii[i] > r_max)
      throw DomainError("compute_m_vr: radius outside (0, r_max]");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw ParameterError("compute_m_vr: radii must increase");
  }
}

}  // namespace detail

inline MassReport compute_m_vr(const RadialMetric& metric, const std::vector<double>& radii) {
  detail::check_radii(radii, metric.r_max);
  MassReport rep;
  rep.radii = radii;
  for (double r : radii) {
    rep.boundary_terms.push_back(boundary_integral(metric, r));
    rep.volume_terms.push_back(renormalized_volume(metric, r));
    rep.partial_sums.push_back(rep.boundary_terms.back() + rep.volume_terms.back());
  }
  detail::extrapolate_mass(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Axisymmetric conformal perturbations. In the chart rho = r + c the
// deviation from the reference is diagonal in the orthonormal frame, with
// radial entry A = e^{2w} - 1 and tangential entries B = e^{2w}(1 + psi) - 1,
// so div_b e - d tr_b e reduces to 2 coth rho (A - B) - 2 B_rho.

namespace detail {

// Composite Gauss-Legendre in theta, 4 panels of 20 points.
template <class F>
double theta_integral(F&& f) {
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) sum += gauss_legendre(f, k * pi / 4.0, (k + 1) * pi / 4.0);
  return sum;
}

}  // namespace detail

inline double boundary_integral(const AxisymMetric& metric, double r) {
  const RadialMetric& base = metric.base;
  if (!(r > 0.0) || r > base.r_max) throw DomainError("boundary_integral: r outside (0, r_max]");
  const double rho = base.chart_radius(r);
  if (!(rho > 0.0)) throw DomainError("boundary_integral: r lies inside the chart's origin");
  const Jet2 p = base(r);
  const double sh = std::sinh(rho), ch = std::cosh(rho);
  const double psi = (p.value - sh) * (p.value + sh) / (sh * sh);
  const double dpsi = 2.0 * (p.value * p.d1 * sh - p.value * p.value * ch) / (sh * sh * sh);
  auto integrand = [&](double th) {
    const ConformalJet c = metric.conformal(r, th);
    const double e2 = std::exp(2.0 * c.w);
    const double a = std::expm1(2.0 * c.w);
    const double b = a + e2 * psi;
    const double b_rho = 2.0 * c.w_r * e2 * (1.0 + psi) + e2 * dpsi;
    return (2.0 * ch / sh * (a - b) - 2.0 * b_rho) * std::sin(th);
  };
  return two_pi * sh * sh * detail::theta_integral(integrand);
}

/// Base renormalized volume plus 4 (Vol_g - Vol_base) of the coordinate ball.
inline double renormalized_volume(const AxisymMetric& metric, double r) {
  const RadialMetric& base = metric.base;
  if (!(r > 0.0) || r > base.r_max)
    throw DomainError("renormalized_volume: r outside (0, r_max]");
  const double v0 = base.exactly_hyperbolic() ? 0.0 : renormalized_volume(base, r);
  const double hi = std::min(r, metric.r_out);
  if (metric.amplitude == 0.0 || hi <= metric.r_in) return v0;
  auto shell = [&](double s) {
    const double p = base(s).value;
    auto ang = [&](double th) { return std::expm1(3.0 * metric.conformal(s, th).w) * std::sin(th); };
    return p * p * detail::theta_integral(ang);
  };
  double extra = 0.0;
  const int panels = 32;
  for (int k = 0; k < panels; ++k) {
    const double a = metric.r_in + (hi - metric.r_in) * k / panels;
    const double b = metric.r_in + (hi - metric.r_in) * (k + 1) / panels;
    extra += gauss_legendre(shell, a, b);
  }
  return v0 + 4.0 * two_pi * extra;
}

inline MassReport compute_m_vr(const AxisymMetric& metric, const std::vector<double>& radii) {
  detail::check_radii(radii, metric.base.r_max);
  MassReport rep;
  rep.radii = radii;
  for (double r : radii) {
    rep.boundary_terms.push_back(boundary_integral(metric, r));
    rep.volume_terms.push_back(renormalized_volume(metric, r));
    rep.partial_sums.push_back(rep.boundary_terms.back() + rep.volume_terms.back());
  }
  detail::extrapolate_mass(rep);
  return rep;
}

/// Same limit along the exhaustion by sublevel sets {u < 2 - coth t}.
inline MassReport compute_m_vr_levelsets(const GreenProfile& g, const std::vector<double>& ts) {
  std::vector<double> radii;
  for (double t : ts) radii.push_back(level_radius(g, t));
  return compute_m_vr(g.metric(), radii);
}

}  // namespace pmass
