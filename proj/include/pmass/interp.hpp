#pragma once

#include "pmass/core.hpp"

#include <algorithm>
#include <vector>

namespace pmass {

/// Value and first two derivatives of a scalar function of one variable.
struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Piecewise quintic Hermite interpolant on a uniform grid, built from
/// values and the first two derivatives at every node.
class QuinticHermiteTable {
 public:
  QuinticHermiteTable() = default;
  QuinticHermiteTable(double x0, double step, std::vector<Jet2> nodes)
      : x0_(x0), step_(step), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2 || !(step_ > 0.0))
      throw ParameterError("QuinticHermiteTable: need >= 2 nodes and positive step");
  }

  double x_min() const { return x0_; }
  double x_max() const { return x0_ + step_ * static_cast<double>(nodes_.size() - 1); }
  double step() const { return step_; }
  const std::vector<Jet2>& nodes() const { return nodes_; }

  Jet2 operator()(double x) const {
    if (x < x_min() - 1e-12 * step_ || x > x_max() + 1e-12 * step_)
      throw DomainError("QuinticHermiteTable: abscissa outside table");
    const double s = (x - x0_) / step_;
    auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0,
                                                 static_cast<double>(nodes_.size() - 2)));
    const double t = s - static_cast<double>(k);
    const Jet2& a = nodes_[k];
    const Jet2& b = nodes_[k + 1];
    const double h = step_;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 0.5 * (t3 - 2 * t4 + t5);

    const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
    const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    const double d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    const double d3 = 30 * t2 - 60 * t3 + 30 * t4;
    const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
    const double d5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);

    const double e0 = -60 * t + 180 * t2 - 120 * t3;
    const double e1 = -36 * t + 96 * t2 - 60 * t3;
    const double e2 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3);
    const double e3 = 60 * t - 180 * t2 + 120 * t3;
    const double e4 = -24 * t + 84 * t2 - 60 * t3;
    const double e5 = 0.5 * (6 * t - 24 * t2 + 20 * t3);

    Jet2 out;
    out.value = a.value * h0 + h * a.d1 * h1 + h * h * a.d2 * h2 + b.value * h3 +
                h * b.d1 * h4 + h * h * b.d2 * h5;
    out.d1 = (a.value * d0 + b.value * d3) / h + a.d1 * d1 + b.d1 * d4 +
             h * (a.d2 * d2 + b.d2 * d5);
    out.d2 = (a.value * e0 + b.value * e3) / (h * h) + (a.d1 * e1 + b.d1 * e4) / h +
             a.d2 * e2 + b.d2 * e5;
    return out;
  }

 private:
  double x0_ = 0.0;
  double step_ = 1.0;
  std::vector<Jet2> nodes_;
};

}  // namespace pmass
