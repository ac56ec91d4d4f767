#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "blowup/errors.hpp"

namespace blowup {

/// Fixed 20-point Gauss-Legendre rule; exact enough on short smooth panels.
template <typename Fn>
double integrate_panel(Fn&& fn, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(fn, a, b);
}

namespace detail {

template <typename Fn>
double halve(Fn& fn, double a, double b, double whole, double rel_tol, double floor_density,
             unsigned depth, double& error) {
  const double mid = 0.5 * (a + b);
  const double left = integrate_panel(fn, a, mid);
  const double right = integrate_panel(fn, mid, b);
  const double diff = std::abs(left + right - whole);
  const double target = std::max(rel_tol * std::abs(left + right), floor_density * (b - a));
  if (diff <= target || depth == 0 || !std::isfinite(diff)) {
    error += diff;
    return left + right;
  }
  return halve(fn, a, mid, left, rel_tol, floor_density, depth - 1, error) +
         halve(fn, mid, b, right, rel_tol, floor_density, depth - 1, error);
}

}  // namespace detail

/// Adaptive integral of `fn` over [a, b]: Gauss-Legendre panels halved until
/// two halves agree with the whole to rel_tol, or to `floor_density * width`
/// in absolute terms (the roundoff level of the integrand). Throws
/// QuadratureFailure when the accumulated difference misses that by 10x.
template <typename Fn>
double integrate_adaptive(Fn&& fn, double a, double b, double rel_tol,
                          double floor_density = 0.0, unsigned max_depth = 16) {
  double error = 0.0;
  const double value =
      detail::halve(fn, a, b, integrate_panel(fn, a, b), rel_tol, floor_density, max_depth, error);
  if (!std::isfinite(value) ||
      error > 10.0 * std::max(rel_tol * std::abs(value), floor_density * (b - a))) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "adaptive quadrature on [%.17g, %.17g] reached error %.3g",
                  a, b, error);
    throw QuadratureFailure(msg);
  }
  return value;
}

}  // namespace blowup
