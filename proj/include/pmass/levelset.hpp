#pragma once

// Level sets {u = level} of an axisymmetric Green field, surface and sublevel
// integrals with revolution weights, and pointwise mean curvature.
//
// Level curves are located along fixed rays theta = const (a composite
// Gauss-Legendre rule on [0, pi]) by root-finding on the smooth interpolant,
// so every integral below is a smooth function of the level.

#include "pmass/core.hpp"
#include "pmass/functional.hpp"
#include "pmass/geometry.hpp"
#include "pmass/green_axisym.hpp"
#include "pmass/green_radial.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace pmass {

enum class VolumeIntegrand {
  one,               // 1
  flux_ratio,        // |du| / ((2-u)^2 - 1)
  flux_ratio_cubed,  // |du|^3 / ((2-u)^2 - 1)^3
};

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1], ascending.
template <unsigned N>
std::vector<std::pair<double, double>> gl_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  std::vector<std::pair<double, double>> out;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      out.emplace_back(0.0, w[i]);
    } else {
      out.emplace_back(-a[i], w[i]);
      out.emplace_back(a[i], w[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Geometry of the level surface through a point of e^{2w}(dr^2 + phi^2 g_S2),
// from the coordinate jet of u. All frame quantities are taken first in the
// base metric and then corrected for the conformal factor.
struct PointGeometry {
  double grad = 0.0;        // |du|_g
  double H = 0.0;           // mean curvature, normal du/|du|
  double k_phi = 0.0;       // principal curvature along the rotation direction
  double tangential = 0.0;  // |grad^Sigma |du|| / |du|
  double ric_nn = 0.0;      // Ric_g(n, n)
};

inline PointGeometry point_geometry(const Jet2& p, const ConformalJet& c, const FieldJet& u,
                                    double theta) {
  const double f = p.value, f1 = p.d1, f2 = p.d2;
  const double cot = std::cos(theta) / std::sin(theta);
  const double a = u.u_r, b = u.u_t / f;
  const double gb = std::hypot(a, b);
  const double nr = a / gb, nt = b / gb;  // unit normal in the frame (d_r, d_theta / phi)
  const double tr = -nt, tt = nr;

  const double hrr = u.u_rr;
  const double hrt = (u.u_rt - f1 / f * u.u_t) / f;
  const double htt = (u.u_tt + f * f1 * u.u_r) / (f * f);
  const double hpp = f1 / f * a + cot * b / f;
  const double lap = hrr + htt + hpp;
  const double hnn = nr * nr * hrr + 2.0 * nr * nt * hrt + nt * nt * htt;
  const double hnt = nr * tr * hrr + (nr * tt + nt * tr) * hrt + nt * tt * htt;

  const double wr = c.w_r, wt = c.w_t / f;
  const double dw_n = wr * nr + wt * nt;
  const double dw_t = wr * tr + wt * tt;
  const double e = std::exp(-c.w);

  PointGeometry g;
  g.grad = e * gb;
  g.H = e * ((lap - hnn) / gb + 2.0 * dw_n);
  g.k_phi = e * (hpp / gb + dw_n);
  g.tangential = e * (hnt / gb - dw_t);

  // Ric of the conformal metric: Ric_b - (Hess w - dw dw) - (Lap w + |dw|^2) b
  const double wrr = c.w_rr;
  const double wrt = (c.w_rt - f1 / f * c.w_t) / f;
  const double wtt = (c.w_tt + f * f1 * c.w_r) / (f * f);
  const double wpp = f1 / f * c.w_r + cot * c.w_t / (f * f);
  const double lap_w = wrr + wtt + wpp;
  const double hess_w_nn = nr * nr * wrr + 2.0 * nr * nt * wrt + nt * nt * wtt;
  const double ric_b = nr * nr * (-2.0 * f2 / f) + nt * nt * (-f2 / f + (1.0 - f1 * f1) / (f * f));
  const double ric = ric_b - (hess_w_nn - dw_n * dw_n) - (lap_w + wr * wr + wt * wt);
  g.ric_nn = e * e * ric;
  return g;
}

}  // namespace detail

/// A solved field together with the fixed angular rule, the columns of the
/// interpolant along it and cached cumulative volume integrals.
class FieldContext {
 public:
  explicit FieldContext(GreenField field, int theta_panels = 4)
      : field_(std::make_shared<const GreenField>(std::move(field))) {
    if (theta_panels < 1) throw ParameterError("FieldContext: need at least one angular panel");
    const auto rule = detail::gl_rule<20>();
    const double width = pi / theta_panels;
    for (int k = 0; k < theta_panels; ++k)
      for (const auto& [x, w] : rule) {
        theta_.push_back(width * (k + 0.5 * (x + 1.0)));
        weight_.push_back(0.5 * width * w);
      }
    const GridSpec& g = field_->grid();
    const auto nq = theta_.size();
    columns_.reserve(nq);
    for (double th : theta_) columns_.emplace_back(*field_, th);

    nodal_u_.assign(nq, std::vector<double>(g.n_r));
    for (std::size_t q = 0; q < nq; ++q)
      for (int i = 0; i < g.n_r; ++i) nodal_u_[q][i] = columns_[q].u(g.radius(i));

    // Cumulative volume integrals at the radial nodes. The quadrature nodes
    // are shared by all columns, so base quantities are tabulated once.
    std::vector<double> pole_r, pole_w, cell_r, cell_w;
    for (const auto& [x, w] : detail::gl_rule<20>()) {
      pole_r.push_back(0.5 * g.r_min * (x + 1.0));
      pole_w.push_back(0.5 * g.r_min * w);
    }
    const auto cell_rule = detail::gl_rule<10>();
    for (int i = 0; i + 1 < g.n_r; ++i) {
      const double a = g.radius(i), b = g.radius(i + 1);
      for (const auto& [x, w] : cell_rule) {
        cell_r.push_back(0.5 * (a + b) + 0.5 * (b - a) * x);
        cell_w.push_back(0.5 * (b - a) * w);
      }
    }
    auto base_at = [&](const std::vector<double>& rs) {
      std::vector<std::pair<Jet2, double>> out;
      out.reserve(rs.size());
      for (double r : rs) out.emplace_back(metric().base(r), field_->base().tail(r));
      return out;
    };
    const auto pole_base = base_at(pole_r), cell_base = base_at(cell_r);
    cumulative_.assign(nq, std::vector<std::array<double, 3>>(g.n_r));
    for (std::size_t q = 0; q < nq; ++q) {
      std::array<double, 3> acc{0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < pole_r.size(); ++k) {
        const auto v = integrands(q, pole_r[k], pole_base[k].first, pole_base[k].second);
        for (int m = 0; m < 3; ++m) acc[m] += pole_w[k] * v[m];
      }
      cumulative_[q][0] = acc;
      const std::size_t per = cell_rule.size();
      for (int i = 0; i + 1 < g.n_r; ++i) {
        std::array<double, 3> cell{0.0, 0.0, 0.0};
        for (std::size_t k = i * per; k < (i + 1) * per; ++k) {
          const auto v = integrands(q, cell_r[k], cell_base[k].first, cell_base[k].second);
          for (int m = 0; m < 3; ++m) cell[m] += cell_w[k] * v[m];
        }
        for (int m = 0; m < 3; ++m) acc[m] += cell[m];
        cumulative_[q][i + 1] = acc;
      }
    }
  }

  const GreenField& field() const { return *field_; }
  const AxisymMetric& metric() const { return field_->metric(); }
  const GridSpec& grid() const { return field_->grid(); }
  std::size_t size() const { return theta_.size(); }
  double theta(std::size_t q) const { return theta_[q]; }
  double weight(std::size_t q) const { return weight_[q]; }
  const FieldColumn& column(std::size_t q) const { return columns_[q]; }
  double nodal_u(std::size_t q, int i) const { return nodal_u_[q][i]; }

  /// int_0^r of (1, |du|/((2-u)^2-1), |du|^3/((2-u)^2-1)^3) e^{3w} phi^2 dr
  /// along column q.
  std::array<double, 3> volume_below(std::size_t q, double r) const {
    const GridSpec& g = grid();
    if (!(r > 0.0) || r > g.r_max) throw RangeError("volume_below: radius outside the grid");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    auto add = [&](double a, double b, const auto& rule) {
      for (const auto& [x, w] : rule) {
        const double s = 0.5 * (a + b) + 0.5 * (b - a) * x;
        const auto v = integrands(q, s, metric().base(s), field_->base().tail(s));
        for (int m = 0; m < 3; ++m) out[m] += 0.5 * (b - a) * w * v[m];
      }
    };
    if (r <= g.r_min) {
      add(0.0, r, pole_rule());
      return out;
    }
    const int i = std::clamp(static_cast<int>(std::floor(g.s_of(r))), 0, g.n_r - 2);
    out = cumulative_[q][i];
    add(g.radius(i), r, cell_rule());
    return out;
  }

 private:
  static const std::vector<std::pair<double, double>>& pole_rule() {
    static const auto r = detail::gl_rule<20>();
    return r;
  }
  static const std::vector<std::pair<double, double>>& cell_rule() {
    static const auto r = detail::gl_rule<10>();
    return r;
  }

  std::array<double, 3> integrands(std::size_t q, double r, const Jet2& p, double tail) const {
    const FieldJet c = columns_[q].correction(r);
    const ConformalJet w = metric().conformal(r, theta_[q]);
    const double ur = 1.0 / (p.value * p.value) + c.u_r;
    const double grad = std::exp(-w.w) * std::hypot(ur, c.u_t / p.value);
    const double one_minus_u = tail - c.u;
    const double ratio = grad / (one_minus_u * (one_minus_u + 2.0));
    const double dv = std::exp(3.0 * w.w) * p.value * p.value;
    return {dv, dv * ratio, dv * ratio * ratio * ratio};
  }

  std::shared_ptr<const GreenField> field_;
  std::vector<double> theta_, weight_;
  std::vector<FieldColumn> columns_;
  std::vector<std::vector<double>> nodal_u_;
  std::vector<std::vector<std::array<double, 3>>> cumulative_;
};

/// Level curve sampled on the angular rule of its context: one vertex per
/// ray, with the metric arc-length element folded into the weights.
struct LevelCurve {
  double level = 0.0;
  std::vector<double> r;
  std::vector<double> theta;
  std::vector<double> dr_dtheta;
  std::vector<double> arc_weights;  // rule weight * |d/dtheta|_g
  std::vector<double> circ_radii;   // e^w phi sin(theta)
  std::vector<FieldJet> jets;
  std::vector<double> h;  // correction on the curve, so 1 - u = T - h without cancellation
  int components = 1;
};

struct SurfaceData {
  double area = 0.0;
  std::map<std::string, double> integrals;  // one, grad, grad2, grad_H, H2, inv_grad
};

/// Pointwise data at the curve vertices, with area weights 2 pi rho_c ds.
struct LevelPoint {
  double r = 0.0;
  double theta = 0.0;
  double dA = 0.0;
  double one_minus_u = 0.0;
  double scalar = 0.0;  // R_g
  detail::PointGeometry geo;
};

inline constexpr double default_critical_fraction = 1e-6;

inline LevelCurve extract_level_curve(const FieldContext& ctx, double level,
                                      double critical_fraction = default_critical_fraction) {
  const GridSpec& g = ctx.grid();
  const GreenField& field = ctx.field();
  LevelCurve c;
  c.level = level;
  std::vector<std::pair<int, int>> cells;
  for (std::size_t q = 0; q < ctx.size(); ++q) {
    const FieldColumn& col = ctx.column(q);
    int crossings = 0, hit = -1;
    double prev = -1.0;  // u -> -inf at the pole
    for (int i = 0; i < g.n_r; ++i) {
      const double d = ctx.nodal_u(q, i) - level;
      if ((d >= 0.0) != (prev >= 0.0)) {
        ++crossings;
        if (hit < 0) hit = i;
      }
      prev = d;
    }
    if (crossings == 0) throw RangeError("extract_level_curve: level is not attained inside the grid");
    if (crossings > 1)
      throw CriticalLevelError("extract_level_curve: level set is not a radial graph");
    auto f = [&](double r) { return col.u(r) - level; };
    double lo, hi;
    if (hit == 0) {
      hi = g.r_min;
      lo = 0.5 * g.r_min;
      while (f(lo) >= 0.0) lo *= 0.5;
    } else {
      lo = g.radius(hit - 1);
      hi = g.radius(hit);
    }
    const double r = f(hi) == 0.0 ? hi : bracketed_root(f, lo, hi);
    const FieldJet j = col.jet(r);
    if (!(j.u_r > 0.0)) throw CriticalLevelError("extract_level_curve: u is not increasing along a ray");
    const double th = ctx.theta(q);
    const ConformalJet w = ctx.metric().conformal(r, th);
    const Jet2 p = ctx.metric().base(r);
    const double rt = -j.u_t / j.u_r;
    c.r.push_back(r);
    c.theta.push_back(th);
    c.dr_dtheta.push_back(rt);
    c.arc_weights.push_back(ctx.weight(q) * std::exp(w.w) * std::hypot(rt, p.value));
    c.circ_radii.push_back(std::exp(w.w) * p.value * std::sin(th));
    c.jets.push_back(j);
    c.h.push_back(col.correction(r).u);
    cells.emplace_back(std::max(hit - 1, 0),
                       std::min(static_cast<int>(th / g.d_theta()), g.n_theta - 1));
  }

  // Regular-value gate, relative to the median gradient on the level.
  std::vector<double> grads;
  for (std::size_t q = 0; q < c.r.size(); ++q) {
    const Jet2 p = ctx.metric().base(c.r[q]);
    const ConformalJet w = ctx.metric().conformal(c.r[q], c.theta[q]);
    grads.push_back(std::exp(-w.w) * std::hypot(c.jets[q].u_r, c.jets[q].u_t / p.value));
  }
  std::vector<double> sorted = grads;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double eps = critical_fraction * sorted[sorted.size() / 2];
  if (*std::min_element(grads.begin(), grads.end()) < eps)
    throw CriticalLevelError("extract_level_curve: level meets a near-critical point");
  for (const auto& [i, j] : cells)
    if (field.grad_norm_at(i, j) < eps || field.grad_norm_at(std::min(i + 1, g.n_r - 1), j) < eps)
      throw CriticalLevelError("extract_level_curve: level crosses a flagged critical cell");
  return c;
}

inline std::vector<LevelPoint> level_points(const FieldContext& ctx, const LevelCurve& c) {
  std::vector<LevelPoint> pts;
  pts.reserve(c.r.size());
  for (std::size_t q = 0; q < c.r.size(); ++q) {
    LevelPoint p;
    p.r = c.r[q];
    p.theta = c.theta[q];
    p.dA = two_pi * c.circ_radii[q] * c.arc_weights[q];
    p.one_minus_u = ctx.field().base().tail(p.r) - c.h[q];
    p.scalar = ctx.metric().scalar_curvature(p.r, p.theta);
    p.geo = detail::point_geometry(ctx.metric().base(p.r), ctx.metric().conformal(p.r, p.theta),
                                   c.jets[q], p.theta);
    pts.push_back(p);
  }
  return pts;
}

inline SurfaceData surface_integrals(const FieldContext& ctx, const LevelCurve& c) {
  SurfaceData s;
  double one = 0.0, grad = 0.0, grad2 = 0.0, grad_h = 0.0, h2 = 0.0, inv = 0.0;
  for (const LevelPoint& p : level_points(ctx, c)) {
    one += p.dA;
    grad += p.dA * p.geo.grad;
    grad2 += p.dA * p.geo.grad * p.geo.grad;
    grad_h += p.dA * p.geo.grad * p.geo.H;
    h2 += p.dA * p.geo.H * p.geo.H;
    inv += p.dA / p.geo.grad;
  }
  s.area = one;
  s.integrals = {{"one", one},     {"grad", grad}, {"grad2", grad2},
                 {"grad_H", grad_h}, {"H2", h2},    {"inv_grad", inv}};
  return s;
}

/// Mean curvature of the level set through (r, theta), normal du/|du|.
inline double mean_curvature(const GreenField& field, double r, double theta,
                             double eps = 1e-12) {
  const FieldJet j = field.jet(r, theta);
  const Jet2 p = field.metric().base(r);
  const ConformalJet w = field.metric().conformal(r, theta);
  const detail::PointGeometry g = detail::point_geometry(p, w, j, theta);
  if (!(g.grad >= eps)) throw CriticalLevelError("mean_curvature: near-critical point");
  return g.H;
}

/// Radial closed form 2 phi'/phi.
inline double mean_curvature(const GreenProfile& g, double r) {
  const Jet2 p = g.metric()(r);
  return 2.0 * p.d1 / p.value;
}

inline double sublevel_volume_integral(const FieldContext& ctx, const LevelCurve& c,
                                       VolumeIntegrand which) {
  double sum = 0.0;
  for (std::size_t q = 0; q < c.r.size(); ++q)
    sum += two_pi * std::sin(c.theta[q]) * ctx.weight(q) *
           ctx.volume_below(q, c.r[q])[static_cast<int>(which)];
  return sum;
}

inline double sublevel_volume_integrals(const FieldContext& ctx, double level,
                                        VolumeIntegrand which) {
  return sublevel_volume_integral(ctx, extract_level_curve(ctx, level), which);
}

// ---------------------------------------------------------------------------
// The level surface seen in the hyperbolic reference d rho^2 + sinh^2 rho g_S2,
// rho = r + c, and the Willmore-type and isoperimetric inequalities there.

struct ReferenceData {
  double area = 0.0;      // Area_b(S)
  double willmore = 0.0;  // int H_b^2 dA_b
  double volume = 0.0;    // Vol_b(D)
};

inline ReferenceData reference_data(const FieldContext& ctx, const LevelCurve& c) {
  const double shift = ctx.metric().base.chart_shift;
  ReferenceData d;
  for (std::size_t q = 0; q < c.r.size(); ++q) {
    const double rho = c.r[q] + shift;
    if (!(rho > 0.0)) throw DomainError("reference_data: level reaches inside the chart origin");
    const double sh = std::sinh(rho);
    const Jet2 big_phi{sh, std::cosh(rho), sh};
    const detail::PointGeometry g = detail::point_geometry(big_phi, {}, c.jets[q], c.theta[q]);
    const double da = two_pi * sh * std::sin(c.theta[q]) * ctx.weight(q) *
                      std::hypot(c.dr_dtheta[q], sh);
    d.area += da;
    d.willmore += da * g.H * g.H;
    d.volume += pi * std::sin(c.theta[q]) * ctx.weight(q) * sinhcosh_minus_x(rho);
  }
  return d;
}

/// Round level sphere {rho = r_t + c}.
inline ReferenceData reference_data(const GreenProfile& g, double t) {
  const double rho = g.metric().chart_radius(level_radius(g, t));
  if (!(rho > 0.0)) throw DomainError("reference_data: level reaches inside the chart origin");
  const double sh = std::sinh(rho), ch = std::cosh(rho);
  return {four_pi * sh * sh, 4.0 * four_pi * ch * ch, hyperbolic_ball_volume(rho)};
}

/// 4 pi + Area_b - (1/4) int H_b^2 <= tol.
inline CheckLine willmore_check(const ReferenceData& d, double tol) {
  const double gap = four_pi + d.area - 0.25 * d.willmore;
  return {"willmore", gap, tol, gap <= tol};
}

/// 4 pi sinh^2 R - Area_b <= tol, where the geodesic ball of radius R has
/// the enclosed reference volume.
inline CheckLine isoperimetric_check(const ReferenceData& d, double tol) {
  auto f = [&](double rr) { return hyperbolic_ball_volume(rr) - d.volume; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  const double big_r = bracketed_root(f, 0.0, hi);
  const double sh = std::sinh(big_r);
  const double gap = four_pi * sh * sh - d.area;
  return {"isoperimetric", gap, tol * std::max(1.0, d.area), gap <= tol * std::max(1.0, d.area)};
}

/// d/dlevel Vol{u < level} against int |du|^{-1}, relative error.
inline CheckLine coarea_check(const FieldContext& ctx, double level, double dlevel, double tol) {
  const double vp = sublevel_volume_integrals(ctx, level + dlevel, VolumeIntegrand::one);
  const double vm = sublevel_volume_integrals(ctx, level - dlevel, VolumeIntegrand::one);
  const double slope = (vp - vm) / (2.0 * dlevel);
  const double inv = surface_integrals(ctx, extract_level_curve(ctx, level)).integrals.at("inv_grad");
  const double rel = std::abs(slope - inv) / inv;
  return {"coarea", rel, tol, rel <= tol};
}

}  // namespace pmass
