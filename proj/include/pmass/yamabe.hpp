#pragma once

// Radial Yamabe problem: find chi > 0 with chi^4 g of scalar curvature -6,
//   -8 (chi'' + 2 (phi'/phi) chi') + R chi + 6 chi^5 = 0,
// chi'(0) = 0 and chi -> 1 at infinity. Damped Newton on a fourth-order
// finite-difference discretization.

#include "pmass/core.hpp"
#include "pmass/geometry.hpp"
#include "pmass/interp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace pmass {

struct YamabeConfig {
  double step = 1.0 / 512.0;
  int max_iterations = 60;
  double step_tolerance = 1e-11;  // max-norm of the final Newton update
  std::function<double(double)> initial;  // chi_0; defaults to 1
};

struct ConformalFactorProfile {
  std::vector<double> r;
  std::vector<double> chi;
  QuinticHermiteTable table;
  double decay = infinity;
  double residual = 0.0;  // independent sixth-order residual, max norm
  int iterations = 0;
  double robin_rate = 2.0;

  Jet2 operator()(double x) const { return table(x); }
  double min_chi() const { return *std::min_element(chi.begin(), chi.end()); }
};

namespace detail {

struct YamabeGrid {
  double h;
  std::size_t n;  // nodes 0..n
  std::vector<double> r, a, big_r;  // radius, phi'/phi, R
};

inline YamabeGrid yamabe_grid(const RadialMetric& metric, double step) {
  YamabeGrid g;
  g.n = static_cast<std::size_t>(std::ceil(metric.r_max / step));
  g.h = metric.r_max / static_cast<double>(g.n);
  g.r.resize(g.n + 1);
  g.a.resize(g.n + 1);
  g.big_r.resize(g.n + 1);
  for (std::size_t i = 1; i <= g.n; ++i) {
    g.r[i] = g.h * static_cast<double>(i);
    const Jet2 p = metric(g.r[i]);
    g.a[i] = p.d1 / p.value;
    g.big_r[i] = scalar_curvature_radial(metric, g.r[i]);
  }
  // R is even in r.
  g.big_r[0] = (4.0 * g.big_r[1] - g.big_r[2]) / 3.0;
  return g;
}

// Value with even reflection across the pole.
inline double even_at(const std::vector<double>& v, long i) {
  return v[static_cast<std::size_t>(i < 0 ? -i : i)];
}

// Stencil weights (column offsets relative to row) for chi'' and chi' rows.
struct Stencil {
  std::vector<std::pair<long, double>> d2, d1;
};

inline Stencil stencil_at(std::size_t i, std::size_t n, double h) {
  const double h2 = 12.0 * h * h, h1 = 12.0 * h;
  Stencil s;
  if (i + 1 < n) {
    s.d2 = {{-2, -1 / h2}, {-1, 16 / h2}, {0, -30 / h2}, {1, 16 / h2}, {2, -1 / h2}};
    s.d1 = {{-2, 1 / h1}, {-1, -8 / h1}, {1, 8 / h1}, {2, -1 / h1}};
  } else {  // i = n - 1, off-centred
    s.d2 = {{1, 10 / h2}, {0, -15 / h2}, {-1, -4 / h2}, {-2, 14 / h2}, {-3, -6 / h2},
            {-4, 1 / h2}};
    s.d1 = {{1, 3 / h1}, {0, 10 / h1}, {-1, -18 / h1}, {-2, 6 / h1}, {-3, -1 / h1}};
  }
  return s;
}

class YamabeSystem {
 public:
  YamabeSystem(const YamabeGrid& g, double rate) : g_(g), rate_(rate) {}

  Eigen::VectorXd residual(const Eigen::VectorXd& chi) const {
    const std::size_t n = g_.n;
    Eigen::VectorXd f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f(i) = row(chi, i, nullptr);
    return f;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& chi) const {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i <= g_.n; ++i) row(chi, i, &trip);
    Eigen::SparseMatrix<double> j(g_.n + 1, g_.n + 1);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  }

 private:
  // Residual of row i; if trip is given, appends its Jacobian entries.
  double row(const Eigen::VectorXd& chi, std::size_t i,
             std::vector<Eigen::Triplet<double>>* trip) const {
    const std::size_t n = g_.n;
    const double h = g_.h;
    auto add = [&](long col, double w) {
      if (trip) trip->emplace_back(static_cast<int>(i), static_cast<int>(std::labs(col)), w);
    };
    const double c = chi(static_cast<long>(i));
    if (i == n) {
      // Robin closure (chi - 1)' + k (chi - 1) = 0, five-point backward difference.
      const double w[5] = {25.0, -48.0, 36.0, -16.0, 3.0};
      double d = 0.0;
      for (int k = 0; k < 5; ++k) {
        const long col = static_cast<long>(n) - k;
        d += w[k] / (12.0 * h) * chi(col);
        add(col, w[k] / (12.0 * h));
      }
      add(static_cast<long>(n), rate_);
      return d + rate_ * (c - 1.0);
    }
    const double big_r = g_.big_r[i];
    double lap = 0.0;
    if (i == 0) {
      // chi'' + 2 chi'/r -> 3 chi''(0) with even ghosts.
      const double h2 = 12.0 * h * h;
      lap = 3.0 * (-2.0 * chi(2) + 32.0 * chi(1) - 30.0 * chi(0)) / h2;
      add(0, -8.0 * 3.0 * -30.0 / h2);
      add(1, -8.0 * 3.0 * 32.0 / h2);
      add(2, -8.0 * 3.0 * -2.0 / h2);
    } else {
      const Stencil s = stencil_at(i, n, h);
      const double a2 = 2.0 * g_.a[i];
      for (const auto& [off, w] : s.d2) {
        const long col = static_cast<long>(i) + off;
        lap += w * chi(std::labs(col));
        add(col, -8.0 * w);
      }
      for (const auto& [off, w] : s.d1) {
        const long col = static_cast<long>(i) + off;
        lap += a2 * w * chi(std::labs(col));
        add(col, -8.0 * a2 * w);
      }
    }
    add(static_cast<long>(i), big_r + 30.0 * c * c * c * c);
    return -8.0 * lap + big_r * c + 6.0 * c * c * c * c * c;
  }

  const YamabeGrid& g_;
  double rate_;
};

// Sixth-order residual at interior nodes (pole included via even ghosts).
inline double sixth_order_residual(const YamabeGrid& g, const std::vector<double>& chi) {
  const double h = g.h;
  const double w2[4] = {-490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0};
  const double w1[4] = {0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0};
  double worst = 0.0;
  for (std::size_t i = 0; i + 3 <= g.n; ++i) {
    const long li = static_cast<long>(i);
    double d2 = w2[0] * chi[i];
    double d1 = 0.0;
    for (long k = 1; k <= 3; ++k) {
      d2 += w2[k] * (even_at(chi, li + k) + even_at(chi, li - k));
      d1 += w1[k] * (even_at(chi, li + k) - even_at(chi, li - k));
    }
    d2 /= h * h;
    d1 /= h;
    const double lap = i == 0 ? 3.0 * d2 : d2 + 2.0 * g.a[i] * d1;
    const double c = chi[i];
    worst = std::max(worst, std::abs(-8.0 * lap + g.big_r[i] * c + 6.0 * c * c * c * c * c));
  }
  return worst;
}

// Fourth-order nodal derivatives for the interpolation table.
inline std::vector<Jet2> nodal_jets(const std::vector<double>& v, double h) {
  const std::size_t n = v.size() - 1;
  std::vector<Jet2> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const long li = static_cast<long>(i);
    double d1, d2;
    if (i + 2 <= n) {
      auto at = [&](long k) { return even_at(v, li + k); };
      d1 = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
      d2 = (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h);
      if (i == 0) d1 = 0.0;
    } else {
      // backward differences from the last six nodes
      auto at = [&](long k) { return v[i - static_cast<std::size_t>(k)]; };
      if (i == n) {
        d1 = (25.0 * at(0) - 48.0 * at(1) + 36.0 * at(2) - 16.0 * at(3) + 3.0 * at(4)) / (12.0 * h);
        d2 = (45.0 * at(0) - 154.0 * at(1) + 214.0 * at(2) - 156.0 * at(3) + 61.0 * at(4) -
              10.0 * at(5)) / (12.0 * h * h);
      } else {
        d1 = (3.0 * v[i + 1] + 10.0 * at(0) - 18.0 * at(1) + 6.0 * at(2) - at(3)) / (12.0 * h);
        d2 = (10.0 * v[i + 1] - 15.0 * at(0) - 4.0 * at(1) + 14.0 * at(2) - 6.0 * at(3) +
              at(4)) / (12.0 * h * h);
      }
    }
    out[i] = {v[i], d1, d2};
  }
  return out;
}

// Nodal jets of a converged solution: sixth-order chi' (fourth-order near
// the far end) and chi'' taken from the equation itself.
inline std::vector<Jet2> solution_jets(const YamabeGrid& g, const std::vector<double>& chi) {
  std::vector<Jet2> out = nodal_jets(chi, g.h);
  const std::size_t n = g.n;
  for (std::size_t i = 0; i <= n; ++i) {
    const long li = static_cast<long>(i);
    if (i + 3 <= n && i > 0)
      out[i].d1 = (45.0 * (even_at(chi, li + 1) - even_at(chi, li - 1)) -
                   9.0 * (even_at(chi, li + 2) - even_at(chi, li - 2)) +
                   (even_at(chi, li + 3) - even_at(chi, li - 3))) / (60.0 * g.h);
    const double c = chi[i];
    const double src = (g.big_r[i] * c + 6.0 * c * c * c * c * c) / 8.0;
    out[i].d2 = i == 0 ? src / 3.0 : src - 2.0 * g.a[i] * out[i].d1;
  }
  return out;
}

inline double fit_decay(const std::vector<double>& r, const std::vector<double>& chi, double lo,
                        double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < lo || r[i] > hi) continue;
    const double dev = std::abs(chi[i] - 1.0);
    if (dev < 1e-10) continue;
    const double y = std::log(dev);
    sx += r[i], sy += y, sxx += r[i] * r[i], sxy += r[i] * y;
    ++n;
  }
  if (n < 10) return infinity;
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

inline ConformalFactorProfile solve_yamabe_radial(const RadialMetric& metric,
                                                  const YamabeConfig& cfg = {}) {
  const double rate = std::min(metric.delta, 2.0);
  if (!(rate > 0.0)) throw ParameterError("solve_yamabe_radial: decay order must be positive");
  const detail::YamabeGrid g = detail::yamabe_grid(metric, cfg.step);
  const detail::YamabeSystem sys(g, rate);
  const std::size_t n = g.n;

  Eigen::VectorXd chi(n + 1);
  for (std::size_t i = 0; i <= n; ++i) chi(i) = cfg.initial ? cfg.initial(g.r[i]) : 1.0;
  Eigen::VectorXd f = sys.residual(chi);
  double norm = f.lpNorm<Eigen::Infinity>();
  // Rounding in the second-difference stencil bounds the attainable residual.
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() / (g.h * g.h);
  double damping = 0.5;
  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iterations; ++it) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.jacobian(chi));
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("solve_yamabe_radial: singular linearized operator", norm);
    const Eigen::VectorXd delta = lu.solve(f);
    const double step = delta.lpNorm<Eigen::Infinity>();
    if (step <= cfg.step_tolerance) {
      chi -= delta;
      f = sys.residual(chi);
      norm = f.lpNorm<Eigen::Infinity>();
      converged = true;
      break;
    }
    for (;;) {
      const Eigen::VectorXd trial = chi - damping * delta;
      if (trial.minCoeff() <= 0.0)
        throw ConvergenceError("solve_yamabe_radial: iterate lost positivity", norm);
      const Eigen::VectorXd ft = sys.residual(trial);
      const double nt = ft.lpNorm<Eigen::Infinity>();
      if (nt < norm || nt <= floor) {
        chi = trial;
        f = ft;
        norm = nt;
        damping = std::min(1.0, 2.0 * damping);
        break;
      }
      damping *= 0.5;
      if (damping < 1e-8)
        throw ConvergenceError("solve_yamabe_radial: damping collapsed", norm);
    }
  }
  if (!converged)
    throw ConvergenceError("solve_yamabe_radial: no convergence within the iteration budget", norm);

  ConformalFactorProfile p;
  p.r = g.r;
  p.chi.assign(chi.data(), chi.data() + chi.size());
  p.iterations = it;
  p.robin_rate = rate;
  p.residual = detail::sixth_order_residual(g, p.chi);
  p.table = QuinticHermiteTable(0.0, g.h, detail::solution_jets(g, p.chi));
  const double lo = std::max(metric.support_hi, 1.0) + 0.5;
  p.decay = detail::fit_decay(p.r, p.chi, lo, std::min(lo + 6.0, metric.r_max - 1.0));
  return p;
}

/// chi^4 g written as a warped product in its own geodesic radius
/// rbar = int_0^r chi^2, with warp chi^2 phi.
inline RadialMetric conformal_metric(const RadialMetric& metric,
                                     const ConformalFactorProfile& prof) {
  if (!(prof.min_chi() > 1e-3))
    throw ConvergenceError("conformal_metric: chi^2 is not bounded away from zero", prof.min_chi());
  const double h = prof.r[1] - prof.r[0];
  const std::size_t n = prof.r.size() - 1;
  auto chi2 = [&](double r) {
    const double c = prof(r).value;
    return c * c;
  };
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + gauss_legendre(chi2, prof.r[i], prof.r[i + 1]);
  auto rbar_of = [&](double r) {
    const auto i = std::min(static_cast<std::size_t>(r / h), n - 1);
    return cum[i] + gauss_legendre(chi2, prof.r[i], r);
  };

  auto jet_at = [&](double r) -> Jet2 {
    Jet2 c = prof(r);
    const Jet2 p = r > 0.0 ? metric(r) : Jet2{0.0, 1.0, 0.0};
    if (r > 0.0) {  // chi'' from the equation rather than the interpolant
      const double big_r = scalar_curvature_radial(metric, r);
      const double v = c.value;
      c.d2 = (big_r * v + 6.0 * v * v * v * v * v) / 8.0 - 2.0 * p.d1 / p.value * c.d1;
    }
    const double f = c.value * c.value * p.value;
    const double f1 = 2.0 * c.value * c.d1 * p.value + c.value * c.value * p.d1;
    const double f2 = 2.0 * c.d1 * c.d1 * p.value + 2.0 * c.value * c.d2 * p.value +
                      4.0 * c.value * c.d1 * p.d1 + c.value * c.value * p.d2;
    const double c2 = c.value * c.value;
    return {f, f1 / c2, (f2 * c2 - 2.0 * f1 * c.value * c.d1) / (c2 * c2 * c2)};
  };

  const double rbar_max = cum[n];
  const double hb = 0.25 * h;
  const auto nb = static_cast<std::size_t>(std::floor(rbar_max / hb));
  std::vector<Jet2> nodes(nb + 1);
  double r = 0.0;
  for (std::size_t k = 0; k <= nb; ++k) {
    const double target = hb * static_cast<double>(k);
    for (int it = 0; it < 20 && k > 0; ++it) {
      const double dr = (rbar_of(r) - target) / chi2(r);
      r = std::clamp(r - dr, 0.0, prof.r.back());
      if (std::abs(dr) <= 1e-15 * std::max(r, 1.0)) break;
    }
    nodes[k] = jet_at(r);
  }
  const QuinticHermiteTable table(0.0, hb, std::move(nodes));

  RadialMetric out;
  const double r_top = hb * static_cast<double>(nb);
  out.warp = [table](double x) { return table(x); };
  out.r_max = r_top;
  out.delta = metric.delta;
  out.family = Family::custom;
  // rbar - r -> int_0^inf (chi^2 - 1), shifting the chart accordingly.
  out.chart_shift = metric.chart_shift - (rbar_max - prof.r.back());
  out.hyperbolic_below = 0.0;
  out.support_lo = 0.0;
  out.support_hi = std::min(r_top, metric.support_hi + (rbar_max - prof.r.back()) + 1.0);
  return out;
}

}  // namespace pmass
