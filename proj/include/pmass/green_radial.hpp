#pragma once

// Minimal positive Green function of a warped product, by quadrature of the
// flux law phi(r)^2 G'(r) = -1/(4 pi).

#include "pmass/core.hpp"
#include "pmass/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace pmass {

/// Immutable radial Green profile. Internally everything is expressed through
/// the tail integral T(r) = 4 pi G(r) = int_r^inf phi^{-2} ds, so that
/// u = 1 - T and 2 - u = 1 + T are available without cancellation.
class GreenProfile {
 public:
  explicit GreenProfile(RadialMetric metric, double panel_step = 1.0 / 32.0)
      : metric_(std::move(metric)) {
    const double big_r = metric_.r_max;
    const double rho = metric_.chart_radius(big_r);
    const double dev = std::abs(metric_(big_r).value / std::sinh(rho) - 1.0);
    if (!(dev < 1e-3))
      throw ConvergenceError(
          "solve_green_radial: warp is not close to sinh(r + c) at r_max; tail estimate "
          "does not converge",
          dev);
    tail_ = coth_minus_one(rho);
    tail_error_bound_ = std::isfinite(metric_.delta)
                            ? std::exp(-(2.0 + metric_.delta) * rho)
                            : 0.0;

    if (!metric_.exactly_hyperbolic()) {
      panel_lo_ = std::clamp(metric_.hyperbolic_below, 0.0, big_r);
      const auto n = static_cast<std::size_t>(std::ceil((big_r - panel_lo_) / panel_step));
      step_ = (big_r - panel_lo_) / static_cast<double>(std::max<std::size_t>(n, 1));
      cumulative_.assign(std::max<std::size_t>(n, 1) + 1, 0.0);
      for (std::size_t k = cumulative_.size() - 1; k-- > 0;) {
        const double a = panel_lo_ + step_ * static_cast<double>(k);
        cumulative_[k] = cumulative_[k + 1] + panel_integral(a, a + step_);
      }
    }
  }

  const RadialMetric& metric() const { return metric_; }
  double tail_integral_cutoff() const { return metric_.r_max; }
  double tail_error_bound() const { return tail_error_bound_; }

  /// T(r) = 4 pi G(r).
  double tail(double r) const {
    if (!(r > 0.0)) throw DomainError("GreenProfile: r must be positive");
    if (r >= metric_.r_max || r >= metric_.hyperbolic_above)
      return coth_minus_one(metric_.chart_radius(r));
    if (metric_.exactly_hyperbolic()) return coth_minus_one(r);
    double t = coth_minus_one(r) - coth_minus_one(metric_.r_max) + tail_;
    if (r < panel_lo_) return t + cumulative_.front();
    const double s = (r - panel_lo_) / step_;
    auto k = static_cast<std::size_t>(
        std::min(std::floor(s), static_cast<double>(cumulative_.size() - 2)));
    const double b = panel_lo_ + step_ * static_cast<double>(k + 1);
    return t + cumulative_[k + 1] + panel_integral(r, b);
  }

  double G(double r) const { return tail(r) / four_pi; }
  double u(double r) const { return 1.0 - tail(r); }
  double grad_norm(double r) const {
    const double p = metric_(r).value;
    return 1.0 / (p * p);
  }
  /// dG/dr, from the flux law.
  double dG(double r) const { return -grad_norm(r) / four_pi; }

 private:
  // int_a^b (phi^{-2} - sinh^{-2}) ds
  double panel_integral(double a, double b) const {
    if (a >= b) return 0.0;
    auto d = [this](double s) {
      const double p = metric_(s).value;
      const double h = std::sinh(s);
      return 1.0 / (p * p) - 1.0 / (h * h);
    };
    return gauss_legendre(d, a, b);
  }

  RadialMetric metric_;
  double tail_ = 0.0;
  double tail_error_bound_ = 0.0;
  double panel_lo_ = 0.0;
  double step_ = 1.0;
  std::vector<double> cumulative_;  // int_{x_k}^{r_max} (phi^{-2} - sinh^{-2})
};

inline GreenProfile solve_green_radial(const RadialMetric& metric) {
  return GreenProfile(metric);
}

/// Radius r_t of the level {u = 2 - coth t}.
inline double level_radius(const GreenProfile& g, double t) {
  if (!(t > 0.0)) throw DomainError("level_radius: t must be positive");
  const double q = coth_minus_one(t);
  const double r_max = g.metric().r_max;
  if (q < g.tail(r_max))
    throw RangeError("level_radius: level lies beyond the truncation horizon");
  auto f = [&](double r) { return g.tail(r) - q; };
  // T(r) ~ 1/r near the pole.
  double lo = std::min(0.5 * t, 0.5 / (q + 1.0));
  while (f(lo) <= 0.0) lo *= 0.5;
  double hi = std::min(r_max, 2.0 * t + 1.0);
  if (f(hi) > 0.0) hi = r_max;
  return bracketed_root(f, lo, hi);
}

/// 4 pi r G(r) at each sample; tends to 1 at the pole.
inline std::vector<double> pole_asymptotics_check(const GreenProfile& g,
                                                  const std::vector<double>& r_samples) {
  std::vector<double> out;
  out.reserve(r_samples.size());
  for (double r : r_samples) out.push_back(r * g.tail(r));
  return out;
}

struct ExpansionFit {
  double v2 = 0.0;
  double v3 = 0.0;
  double v4 = 0.0;  // nuisance coefficient of e^{-4 rho}
  double residual = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Least-squares fit of G against v2 e^{-2 rho} + v3 e^{-3 rho} (+ e^{-4 rho})
/// in the hyperboloidal chart coordinate rho. The residual is the max-norm
/// misfit relative to v2 e^{-2 rho}.
inline ExpansionFit fit_infinity_expansion(const GreenProfile& g, double lo, double hi,
                                           int samples = 401) {
  if (!(hi - lo >= 1.0))
    throw ParameterError("fit_infinity_expansion: window narrower than one unit is ill-conditioned");
  if (lo <= 0.0 || hi > g.metric().r_max)
    throw DomainError("fit_infinity_expansion: window outside (0, r_max]");
  Eigen::MatrixXd a(samples, 3);
  Eigen::VectorXd y(samples);
  std::vector<double> rho(samples), gv(samples);
  for (int i = 0; i < samples; ++i) {
    const double r = lo + (hi - lo) * i / (samples - 1);
    rho[i] = g.metric().chart_radius(r);
    gv[i] = g.G(r);
    const double x = std::exp(-rho[i]);
    // Rows scaled by e^{2 rho}: y = v2 + v3 x + v4 x^2.
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = x * x;
    y(i) = gv[i] * std::exp(2.0 * rho[i]);
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  ExpansionFit fit{c(0), c(1), c(2), 0.0, lo, hi};
  for (int i = 0; i < samples; ++i) {
    const double e2 = std::exp(-2.0 * rho[i]);
    const double x = std::exp(-rho[i]);
    const double model = e2 * (c(0) + c(1) * x + c(2) * x * x);
    fit.residual = std::max(fit.residual, std::abs(gv[i] - model) / (std::abs(c(0)) * e2));
  }
  return fit;
}

}  // namespace pmass
