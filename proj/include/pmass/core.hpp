#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace pmass {

inline constexpr double pi = std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Error hierarchy. Every numerical failure is reported through one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class ParameterError : public Error {
 public:
  using Error::Error;
};
class RangeError : public Error {
 public:
  using Error::Error;
};
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};
class CriticalLevelError : public Error {
 public:
  using Error::Error;
};

// coth(x) - 1 without cancellation for large x.
inline double coth_minus_one(double x) { return 2.0 / std::expm1(2.0 * x); }

// sinh(x) cosh(x) - x, the hyperbolic ball volume divided by 2 pi.
inline double sinhcosh_minus_x(double x) {
  if (std::abs(x) < 1e-2) {
    // sinh(2x)/2 - x = (2x)^3/12 + (2x)^5/240 + ...
    const double y = 2.0 * x;
    const double y2 = y * y;
    return y * y2 / 12.0 * (1.0 + y2 / 20.0 * (1.0 + y2 / 42.0 * (1.0 + y2 / 72.0)));
  }
  return 0.5 * std::sinh(2.0 * x) - x;
}

inline double hyperbolic_ball_volume(double radius) {
  return 2.0 * pi * sinhcosh_minus_x(radius);
}

/// Adaptive Gauss-Kronrod (31 point) integration of a smooth integrand.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13,
                 double* error = nullptr) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 12, rel_tol, &err);
  if (error) *error = err;
  return value;
}

/// Fixed 20-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// Bracketed root of a monotone function, solved to a few ulps.
template <class F>
double bracketed_root(F&& f, double lo, double hi, std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw RangeError("bracketed_root: root is not bracketed");
  auto tol = [](double a, double b) {
    return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t iters = max_iter;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  const double fa = f(a);
  const double fb = f(b);
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

// C-infinity transition helpers.
namespace smooth {

inline double edge(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double edge_d(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

/// Step rising from 0 (x <= 0) to 1 (x >= 1).
inline double step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = edge(x);
  const double b = edge(1.0 - x);
  return a / (a + b);
}

inline double step_d(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = edge(x);
  const double b = edge(1.0 - x);
  const double s = a + b;
  return (edge_d(x) * b + a * edge_d(1.0 - x)) / (s * s);
}

/// Bump exp(1 - 1/(1 - x^2)) on (-1, 1) with peak value 1, and two derivatives.
struct BumpValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline BumpValue bump(double x) {
  if (x <= -1.0 || x >= 1.0) return {};
  const double q = 1.0 - x * x;
  const double b = std::exp(1.0 - 1.0 / q);
  const double g1 = -2.0 * x / (q * q);
  const double g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
  return {b, b * g1, b * (g1 * g1 + g2)};
}

}  // namespace smooth

}  // namespace pmass
