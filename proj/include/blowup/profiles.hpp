#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <vector>

#include "blowup/cutoff.hpp"
#include "blowup/jet.hpp"
#include "blowup/params.hpp"

namespace blowup {

/// Where a profile leaves phi_1. phi glues over [start, start + width], f over
/// [start, start + 1] and h over [start + width, start + width + 1]. The base
/// construction uses {r0, r0}; the companion profile of the quasilinear
/// example uses {3 r0, r0}.
struct TransitionWindow {
  double start;
  double width;

  double deficit_end() const { return start + width + 1.0; }
};

/// phi_1(r) = r / sqrt(1 + r^2).
template <Real T>
T phi_inner(T r) {
  using std::sqrt;
  return r / sqrt(T(1) + r * r);
}

// Derivatives in closed form; the quotient rule would cancel to r^-3.
template <int N>
Jet<double, N> phi_inner(const Jet<double, N>& r) {
  const double x = r.value();
  const double q = 1.0 + x * x;
  const double s = std::sqrt(q);
  const double d1 = 1.0 / (q * s);
  return Jet<double, N>::compose(r, {x / s, d1, -3.0 * x * d1 / q, (12.0 * x * x - 3.0) * d1 / (q * q)});
}

/// phi_2 (eps = 0) and phi_3 (eps > 0): r^-eps + r^(-eps-2) / 2.
template <typename T>
T phi_outer(const T& r, double eps) {
  using std::pow;
  if (eps == 0.0) return T(1.0) + T(0.5) / (r * r);
  return pow(r, -eps) + T(0.5) * pow(r, -eps - 2.0);
}

/// Inverse of phi_1 on [0, 1): s / sqrt(1 - s^2).
double phi_inner_inverse(double s);

/// Closed form of the solution of E = 0 with h = 1/2, phi = phi_1:
///   (1+r^2)^{3/2} asinh(r) / r - (1+r^2)/2,
/// switching to the even power series below `series_switch_radius`.
double f0_closed(double r, double series_switch_radius = 1e-2);

/// Same with the epsilon correction of the unbounded variant,
///   eps (1+r^2)^{3/2} (r sqrt(1+r^2) - asinh r) / (4 r).
/// Returns value and derivatives up to `N`.
template <int N>
Jet<double, N> f0_jet(double r, double eps, double series_switch_radius);

/// Scalar radial ingredients phi, f, h, the deficit E and the corrector eta of
/// one construction instance. Immutable after construction; evaluation is
/// thread-safe.
class RadialProfiles {
 public:
  explicit RadialProfiles(const ConstructionParams& params);
  RadialProfiles(const ConstructionParams& params, TransitionWindow window);

  const ConstructionParams& params() const { return params_; }
  const TransitionWindow& window() const { return window_; }
  double epsilon() const { return params_.epsilon; }

  // deriv_order 0..3 for phi, 0..2 for f and h.
  double phi(double r, int deriv_order = 0) const;
  double f(double r, int deriv_order = 0) const;
  double h(double r, int deriv_order = 0) const;

  /// 1/2 (r phi' + eps phi) + h phi / r^2 - (r phi' f)' / r, analytically.
  double deficit(double r) const;
  /// Deficit and its radial derivative.
  Jet<double, 1> deficit_jet(double r) const;

  /// eta(r) = int_0^r t E(t) / phi(t) dt. Order 1 and 2 come from the
  /// identity eta' = r E / phi, never from differencing the table.
  double eta(double r, int deriv_order = 0) const;

  /// (f(r) - 1/2) / r^2, regular at the origin; valid for r <= window.start.
  double beta(double r) const;

  /// Constant value of f beyond the f window.
  double f_tail() const { return f_tail_; }
  /// Constant value of eta beyond the deficit support.
  double eta_tail() const { return eta_knots_.back(); }

  /// phi in any floating-point type; used where the state must carry more
  /// digits than double.
  template <Real T>
  T phi_value(T r) const {
    const T s = (r - T(window_.start)) / T(window_.width);
    if (s <= T(0)) return phi_inner(r);
    if (s >= T(1)) return phi_outer(r, params_.epsilon);
    const T w = cutoff(s);
    return w * phi_inner(r) + (T(1) - w) * phi_outer(r, params_.epsilon);
  }

  // Jet evaluators used by the rest of the library.
  template <int N>
  Jet<double, N> phi_jet(double r) const;
  template <int N>
  Jet<double, N> f_jet(double r) const;
  template <int N>
  Jet<double, N> h_jet(double r) const;

  /// Checkpoints of the corrector table (panel edges and cumulative values).
  const std::vector<double>& eta_edges() const { return eta_edges_; }

 private:
  void build_corrector_table();
  double corrector_integrand(double t) const;

  ConstructionParams params_;
  TransitionWindow window_;
  double f_tail_ = 0.0;
  std::vector<double> eta_edges_;
  std::vector<double> eta_knots_;
};

}  // namespace blowup
