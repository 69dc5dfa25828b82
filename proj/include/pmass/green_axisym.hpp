#pragma once

// Green function of an axisymmetric conformal perturbation e^{2w} g_base.
// u = u_base + h, where u_base is the radial Green potential of the base and
// the bounded correction h solves the divergence-form equation
//   d_r(e^w phi^2 sin(th) h_r) + d_th(e^w sin(th) h_th) = -sin(th) d_r(e^w)
// by a finite-volume scheme on the (r, theta) half-strip.

#include "pmass/core.hpp"
#include "pmass/geometry.hpp"
#include "pmass/green_radial.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pmass {

enum class Stretching { uniform, exp_graded };

inline std::string to_string(Stretching s) {
  return s == Stretching::uniform ? "uniform" : "exp_graded";
}

/// Radial nodes r_0 = r_min .. r_{n_r-1} = r_max and cell-centred angles
/// theta_j = (j + 1/2) pi / n_theta.
struct GridSpec {
  double r_min = 0.02;
  double r_max = 8.0;
  int n_r = 256;
  int n_theta = 64;
  Stretching stretching = Stretching::uniform;

  static constexpr double grading = 2.0;

  double span() const { return static_cast<double>(n_r - 1); }
  double r_of(double s) const {
    if (stretching == Stretching::uniform) return r_min + (r_max - r_min) * s / span();
    return r_min + (r_max - r_min) * std::expm1(grading * s / span()) / std::expm1(grading);
  }
  double s_of(double r) const {
    if (stretching == Stretching::uniform) return (r - r_min) / (r_max - r_min) * span();
    return span() / grading * std::log1p((r - r_min) / (r_max - r_min) * std::expm1(grading));
  }
  // dr/ds and d^2r/ds^2
  double r_s(double s) const {
    if (stretching == Stretching::uniform) return (r_max - r_min) / span();
    const double k = grading / span();
    return (r_max - r_min) * k * std::exp(k * s) / std::expm1(grading);
  }
  double r_ss(double s) const {
    if (stretching == Stretching::uniform) return 0.0;
    return r_s(s) * grading / span();
  }
  double radius(int i) const { return i == n_r - 1 ? r_max : r_of(static_cast<double>(i)); }
  double d_theta() const { return pi / n_theta; }
  double theta(int j) const { return (j + 0.5) * d_theta(); }
  int index(int i, int j) const { return i * n_theta + j; }
  int unknowns() const { return n_r * n_theta; }

  GridSpec refined(int factor_num, int factor_den = 1) const {
    GridSpec g = *this;
    g.n_r = (n_r - 1) * factor_num / factor_den + 1;
    g.n_theta = n_theta * factor_num / factor_den;
    return g;
  }
};

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;  // symmetric positive definite
  Eigen::VectorXd rhs;
};

inline void check_grid(const AxisymMetric& metric, const GridSpec& grid) {
  if (grid.n_r < 16 || grid.n_theta < 16)
    throw ParameterError("GridSpec: n_r and n_theta must be at least 16");
  if (!(grid.r_min > 0.0) || !(grid.r_max > grid.r_min))
    throw ParameterError("GridSpec: need 0 < r_min < r_max");
  if (grid.r_max > metric.base.r_max)
    throw ParameterError("GridSpec: r_max beyond the base metric's truncation radius");
  if (metric.amplitude != 0.0) {
    if (grid.r_min >= metric.r_in || grid.r_min >= metric.base.hyperbolic_below)
      throw ParameterError("GridSpec: r_min must lie below the perturbation support");
    if (grid.r_max <= metric.r_out)
      throw ParameterError("GridSpec: grid must extend past the perturbation support");
    // at least 8 radial cells across the bump
    const double si = grid.s_of(metric.r_in), so = grid.s_of(metric.r_out);
    if (so - si < 8.0) throw ParameterError("GridSpec: perturbation support is not resolved");
  }
}

/// Finite-volume discretization of the correction equation. Rows are control
/// volumes; the r-faces carry e^w phi^2 sin(theta), the theta-faces
/// e^w sin(theta), the axis faces carry no flux, the inner sphere r_min is
/// flux-free and the outer sphere closes with d_r h + 2 h = 0.
inline LinearSystem assemble_operator(const AxisymMetric& metric, const GridSpec& grid) {
  check_grid(metric, grid);
  const int nr = grid.n_r, nt = grid.n_theta;
  const double dth = grid.d_theta();
  std::vector<double> r(nr), face(nr + 1);
  for (int i = 0; i < nr; ++i) r[i] = grid.radius(i);
  face[0] = r[0];
  face[nr] = r[nr - 1];
  for (int i = 1; i < nr; ++i) face[i] = 0.5 * (r[i - 1] + r[i]);  // face i sits below node i
  std::vector<double> band(nt), th_face(nt + 1);
  for (int j = 0; j < nt; ++j)
    band[j] = std::cos(j * dth) - std::cos((j + 1) * dth);
  for (int j = 0; j <= nt; ++j) th_face[j] = j * dth;

  auto ew = [&](double rr, double th) { return std::exp(metric.conformal(rr, th).w); };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(grid.unknowns()) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(grid.unknowns());
  std::vector<double> diag(grid.unknowns(), 0.0);

  auto couple = [&](int a, int b, double c) {
    trip.emplace_back(a, b, -c);
    trip.emplace_back(b, a, -c);
    diag[a] += c;
    diag[b] += c;
  };

  for (int i = 0; i < nr; ++i) {
    const double width = face[i + 1] - face[i];
    for (int j = 0; j < nt; ++j) {
      const int k = grid.index(i, j);
      const double th = grid.theta(j);
      if (i + 1 < nr) {
        const double rf = face[i + 1];
        const double p = metric.base(rf).value;
        couple(k, grid.index(i + 1, j), ew(rf, th) * p * p * band[j] / (r[i + 1] - r[i]));
      }
      if (j + 1 < nt) {
        const double tf = th_face[j + 1];
        couple(k, grid.index(i, j + 1), ew(r[i], tf) * std::sin(tf) * width / dth);
      }
      // base flux e^w sin(theta) through the two r-faces (phi^2 u_base' = 1)
      rhs(k) = band[j] * (ew(face[i + 1], th) - ew(face[i], th));
      if (i == nr - 1) {
        const double p = metric.base(r[i]).value;
        diag[k] += 2.0 * p * p * band[j];
      }
    }
  }
  for (int k = 0; k < grid.unknowns(); ++k) trip.emplace_back(k, k, diag[k]);
  LinearSystem sys;
  sys.matrix.resize(grid.unknowns(), grid.unknowns());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = std::move(rhs);
  return sys;
}

/// u and its coordinate derivatives at a point.
struct FieldJet {
  double u = 0.0;
  double u_r = 0.0;
  double u_t = 0.0;
  double u_rr = 0.0;
  double u_rt = 0.0;
  double u_tt = 0.0;
};

class GreenField;

/// The field restricted to a fixed angle: cubic splines in r of h, h_theta
/// and h_theta_theta.
class FieldColumn {
 public:
  FieldColumn() = default;
  FieldColumn(const GreenField& field, double theta);

  double theta() const { return theta_; }
  /// Correction h and its derivatives (h, h_r, h_t, h_rr, h_rt, h_tt).
  FieldJet correction(double r) const;
  FieldJet jet(double r) const;
  double u(double r) const;

 private:
  const GreenField* field_ = nullptr;
  double theta_ = 0.0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> h0_, h1_, h2_;
};

class GreenField {
 public:
  GreenField(AxisymMetric metric, GridSpec grid, std::shared_ptr<const GreenProfile> base,
             Eigen::VectorXd h, double residual_norm)
      : metric_(std::move(metric)), grid_(grid), base_(std::move(base)), h_(std::move(h)),
        residual_norm_(residual_norm) {
    const int nr = grid_.n_r, nt = grid_.n_theta;
    // Cosine coefficients per radial node: the even, 2 pi periodic
    // trigonometric interpolant through the cell-centred values.
    modes_.assign(static_cast<std::size_t>(nr) * nt, 0.0);
    for (int i = 0; i < nr; ++i)
      for (int k = 0; k < nt; ++k) {
        double s = 0.0;
        for (int j = 0; j < nt; ++j) s += h_(grid_.index(i, j)) * std::cos(k * grid_.theta(j));
        modes_[static_cast<std::size_t>(i) * nt + k] = (k == 0 ? 1.0 : 2.0) * s / nt;
      }
    u_.resize(grid_.unknowns());
    grad_r_.resize(grid_.unknowns());
    grad_t_.resize(grid_.unknowns());
    for (int i = 0; i < nr; ++i) {
      const double r = grid_.radius(i);
      const Jet2 p = metric_.base(r);
      const double ub = base_->u(r);
      for (int j = 0; j < nt; ++j) {
        const int k = grid_.index(i, j);
        u_(k) = ub + h_(k);
        const double e = std::exp(-metric_.conformal(r, grid_.theta(j)).w);
        const auto [hr, ht] = fd_gradient(i, j);
        grad_r_(k) = e * (1.0 / (p.value * p.value) + hr);
        grad_t_(k) = e * ht / p.value;
      }
    }
  }

  const AxisymMetric& metric() const { return metric_; }
  const GridSpec& grid() const { return grid_; }
  const GreenProfile& base() const { return *base_; }
  std::shared_ptr<const GreenProfile> base_ptr() const { return base_; }
  const Eigen::VectorXd& h() const { return h_; }
  const Eigen::VectorXd& u() const { return u_; }
  const Eigen::VectorXd& grad_r() const { return grad_r_; }
  const Eigen::VectorXd& grad_theta() const { return grad_t_; }
  double residual_norm() const { return residual_norm_; }
  double h_at(int i, int j) const { return h_(grid_.index(i, j)); }
  double grad_norm_at(int i, int j) const {
    const int k = grid_.index(i, j);
    return std::hypot(grad_r_(k), grad_t_(k));
  }

  /// Trigonometric interpolant of row i and its first two theta derivatives.
  std::array<double, 3> row_interpolant(int i, double theta) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const int nt = grid_.n_theta;
    for (int k = 0; k < nt; ++k) {
      const double c = modes_[static_cast<std::size_t>(i) * nt + k];
      const double co = std::cos(k * theta), si = std::sin(k * theta);
      out[0] += c * co;
      out[1] -= k * c * si;
      out[2] -= static_cast<double>(k) * k * c * co;
    }
    return out;
  }

  FieldColumn column(double theta) const { return FieldColumn(*this, theta); }
  FieldJet jet(double r, double theta) const { return column(theta).jet(r); }

  /// Largest value of u on the outer boundary; levels above it leave the grid.
  double u_outer_min() const {
    double m = infinity;
    for (int j = 0; j < grid_.n_theta; ++j) m = std::min(m, u_(grid_.index(grid_.n_r - 1, j)));
    return m;
  }

 private:
  // Fourth-order differences of h (second order at the ends), in r and theta.
  std::pair<double, double> fd_gradient(int i, int j) const {
    const int nr = grid_.n_r, nt = grid_.n_theta;
    auto hv = [&](int a, int b) {
      // even reflection across the axis
      if (b < 0) b = -b - 1;
      if (b >= nt) b = 2 * nt - b - 1;
      return h_(grid_.index(a, b));
    };
    const double s = static_cast<double>(i);
    double hs;
    if (i >= 2 && i + 2 < nr)
      hs = (hv(i - 2, j) - 8.0 * hv(i - 1, j) + 8.0 * hv(i + 1, j) - hv(i + 2, j)) / 12.0;
    else if (i == 0)
      hs = 0.0;  // flux-free inner sphere
    else if (i == nr - 1)
      hs = -2.0 * hv(i, j) * grid_.r_s(s);
    else
      hs = 0.5 * (hv(i + 1, j) - hv(i - 1, j));
    const double dth = grid_.d_theta();
    const double ht =
        (hv(i, j - 2) - 8.0 * hv(i, j - 1) + 8.0 * hv(i, j + 1) - hv(i, j + 2)) / (12.0 * dth);
    return {hs / grid_.r_s(s), ht};
  }

  AxisymMetric metric_;
  GridSpec grid_;
  std::shared_ptr<const GreenProfile> base_;
  Eigen::VectorXd h_, u_, grad_r_, grad_t_;
  std::vector<double> modes_;
  double residual_norm_ = 0.0;
};

inline FieldColumn::FieldColumn(const GreenField& field, double theta)
    : field_(&field), theta_(theta) {
  const GridSpec& g = field.grid();
  std::vector<double> v0(g.n_r), v1(g.n_r), v2(g.n_r);
  for (int i = 0; i < g.n_r; ++i) {
    const auto t = field.row_interpolant(i, theta);
    v0[i] = t[0];
    v1[i] = t[1];
    v2[i] = t[2];
  }
  // End slopes in s from the boundary conditions h_r = 0 and h_r = -2 h.
  const double rs_end = g.r_s(g.span());
  auto make = [&](const std::vector<double>& v) {
    return boost::math::interpolators::cardinal_cubic_b_spline<double>(
        v.data(), v.size(), 0.0, 1.0, 0.0, -2.0 * v.back() * rs_end);
  };
  h0_ = make(v0);
  h1_ = make(v1);
  h2_ = make(v2);
}

inline FieldJet FieldColumn::correction(double r) const {
  const GridSpec& g = field_->grid();
  FieldJet c;
  if (r <= g.r_min) {
    // constant extension into the pole region (C^1 since h_r(r_min) = 0)
    c.u = h0_(0.0);
    c.u_t = h1_(0.0);
    c.u_tt = h2_(0.0);
    return c;
  }
  const double s = std::min(g.s_of(r), g.span());
  const double rs = g.r_s(s), rss = g.r_ss(s);
  c.u = h0_(s);
  c.u_t = h1_(s);
  c.u_tt = h2_(s);
  const double d0 = h0_.prime(s), dd0 = h0_.double_prime(s);
  c.u_r = d0 / rs;
  c.u_rr = (dd0 - d0 * rss / rs) / (rs * rs);
  c.u_rt = h1_.prime(s) / rs;
  return c;
}

inline FieldJet FieldColumn::jet(double r) const {
  FieldJet j = correction(r);
  const GreenProfile& b = field_->base();
  const Jet2 p = field_->metric().base(r);
  j.u += b.u(r);
  j.u_r += 1.0 / (p.value * p.value);
  j.u_rr += -2.0 * p.d1 / (p.value * p.value * p.value);
  return j;
}

inline double FieldColumn::u(double r) const {
  return field_->base().u(r) + correction(r).u;
}

/// Direct sparse Cholesky (LDL^T) solve, deterministic for a given grid.
inline GreenField solve_green_axisym(const AxisymMetric& metric, const GridSpec& grid) {
  const LinearSystem sys = assemble_operator(metric, grid);
  auto base = std::make_shared<const GreenProfile>(metric.base);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(grid.unknowns());
  double residual = 0.0;
  if (sys.rhs.lpNorm<Eigen::Infinity>() > 0.0) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.matrix);
    if (ldlt.info() != Eigen::Success)
      throw ConvergenceError("solve_green_axisym: factorization failed", infinity);
    h = ldlt.solve(sys.rhs);
    residual = (sys.matrix * h - sys.rhs).lpNorm<Eigen::Infinity>() /
               sys.rhs.lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-10))
      throw ConvergenceError("solve_green_axisym: relative residual above 1e-10", residual);
  }
  return GreenField(metric, grid, std::move(base), std::move(h), residual);
}

struct GridCell {
  int i = 0;
  int j = 0;
  bool operator==(const GridCell&) const = default;
};

/// Grid nodes (i, j) with |grad u| < eps.
inline std::vector<GridCell> detect_critical_set(const GreenField& field, double eps) {
  std::vector<GridCell> out;
  const GridSpec& g = field.grid();
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      if (field.grad_norm_at(i, j) < eps) out.push_back({i, j});
  return out;
}

/// Fine-grid error estimate for a second-order quantity from grids with
/// spacing ratio 2.
inline double richardson_error(double fine, double coarse) { return std::abs(fine - coarse) / 3.0; }

/// Observed convergence order from three grids with spacing ratio 2.
inline double observed_order(double coarse, double medium, double fine) {
  return std::log2(std::abs(coarse - medium) / std::abs(medium - fine));
}

/// Text dump of u: header "r_min r_max n_r n_theta", then n_r rows of n_theta values.
inline void dump_field(const GreenField& field, std::ostream& os) {
  const GridSpec& g = field.grid();
  os << std::setprecision(17) << g.r_min << ' ' << g.r_max << ' ' << g.n_r << ' ' << g.n_theta
     << '\n';
  for (int i = 0; i < g.n_r; ++i) {
    for (int j = 0; j < g.n_theta; ++j) {
      if (j) os << ' ';
      os << field.u()(g.index(i, j));
    }
    os << '\n';
  }
}

}  // namespace pmass
