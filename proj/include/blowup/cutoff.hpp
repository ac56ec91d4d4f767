#pragma once

#include "blowup/jet.hpp"

namespace blowup {

namespace detail {

// exp(-1/s) for s > 0, identically zero otherwise.
template <typename T>
T flat_bump(const T& s) {
  using std::exp;
  if (value_of(s) <= 0.0) return T(0.0);
  return exp(T(-1.0) / s);
}

}  // namespace detail

/// Smooth non-increasing transition: 1 for s <= 0, 0 for s >= 1, C-infinity.
/// Realized as sigma(1-s) / (sigma(s) + sigma(1-s)) with sigma(s) = exp(-1/s).
template <typename T>
T cutoff(const T& s) {
  const double v = value_of(s);
  if (v <= 0.0) return T(1.0);
  if (v >= 1.0) return T(0.0);
  const T right = detail::flat_bump(T(1.0) - s);
  const T left = detail::flat_bump(s);
  return right / (left + right);
}

/// cutoff(s) or one of its first three derivatives.
double cutoff_xi(double s, int deriv_order = 0);

}  // namespace blowup
