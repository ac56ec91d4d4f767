#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "blowup/real.hpp"

namespace blowup {

/// Truncated univariate Taylor jet: value and the first N derivatives with
/// respect to a single independent variable. Arithmetic propagates exact
/// derivatives (forward mode), so radial profiles built from jets carry
/// analytic first/second/third derivatives through every gluing.
template <typename Scalar, int N>
class Jet {
  static_assert(N >= 0 && N <= 3, "Jet supports up to third derivatives");

 public:
  static constexpr int order = N;

  constexpr Jet() : d_{} {}
  constexpr Jet(Scalar value) : d_{} { d_[0] = value; }  // NOLINT: implicit constants

  /// The independent variable x at x = value.
  static constexpr Jet variable(Scalar value) {
    Jet j(value);
    if constexpr (N >= 1) j.d_[1] = Scalar(1);
    return j;
  }

  constexpr Scalar value() const { return d_[0]; }
  constexpr Scalar operator[](int k) const { return d_[k]; }
  constexpr Scalar& operator[](int k) { return d_[k]; }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) d_[k] += o.d_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) d_[k] -= o.d_[k];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r;
    for (int k = 0; k <= N; ++k) r.d_[k] = -a.d_[k];
    return r;
  }

  // Leibniz rule.
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.d_[0] = a.d_[0] * b.d_[0];
    if constexpr (N >= 1) r.d_[1] = a.d_[1] * b.d_[0] + a.d_[0] * b.d_[1];
    if constexpr (N >= 2)
      r.d_[2] = a.d_[2] * b.d_[0] + Scalar(2) * a.d_[1] * b.d_[1] + a.d_[0] * b.d_[2];
    if constexpr (N >= 3)
      r.d_[3] = a.d_[3] * b.d_[0] + Scalar(3) * (a.d_[2] * b.d_[1] + a.d_[1] * b.d_[2]) +
                a.d_[0] * b.d_[3];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    const Scalar x = b.d_[0];
    return a * compose(b, {Scalar(1) / x, -Scalar(1) / (x * x), Scalar(2) / (x * x * x),
                           -Scalar(6) / (x * x * x * x)});
  }

  /// g(inner) given g and its derivatives at inner.value() (Faa di Bruno, N <= 3).
  static Jet compose(const Jet& a, const std::array<Scalar, 4>& g) {
    Jet r;
    r.d_[0] = g[0];
    if constexpr (N >= 1) r.d_[1] = g[1] * a.d_[1];
    if constexpr (N >= 2) r.d_[2] = g[2] * a.d_[1] * a.d_[1] + g[1] * a.d_[2];
    if constexpr (N >= 3)
      r.d_[3] = g[3] * a.d_[1] * a.d_[1] * a.d_[1] + Scalar(3) * g[2] * a.d_[1] * a.d_[2] +
                g[1] * a.d_[3];
    return r;
  }

 private:
  std::array<Scalar, N + 1> d_;
};

/// Derivative of a jet as a jet of one lower order.
template <typename Scalar, int N>
Jet<Scalar, N - 1> derivative(const Jet<Scalar, N>& a) {
  Jet<Scalar, N - 1> r;
  for (int k = 0; k < N; ++k) r[k] = a[k + 1];
  return r;
}

template <int M, typename Scalar, int N>
Jet<Scalar, M> truncate(const Jet<Scalar, N>& a) {
  static_assert(M <= N);
  Jet<Scalar, M> r;
  for (int k = 0; k <= M; ++k) r[k] = a[k];
  return r;
}

template <typename Scalar, int N>
Jet<Scalar, N> sqrt(const Jet<Scalar, N>& a) {
  using std::sqrt;
  const Scalar x = a.value();
  const Scalar s = sqrt(x);
  return Jet<Scalar, N>::compose(
      a, {s, Scalar(0.5) / s, Scalar(-0.25) / (x * s), Scalar(0.375) / (x * x * s)});
}

template <typename Scalar, int N>
Jet<Scalar, N> exp(const Jet<Scalar, N>& a) {
  using std::exp;
  const Scalar e = exp(a.value());
  return Jet<Scalar, N>::compose(a, {e, e, e, e});
}

template <typename Scalar, int N>
Jet<Scalar, N> log(const Jet<Scalar, N>& a) {
  using std::log;
  const Scalar x = a.value();
  return Jet<Scalar, N>::compose(
      a, {log(x), Scalar(1) / x, -Scalar(1) / (x * x), Scalar(2) / (x * x * x)});
}

template <typename Scalar, int N>
Jet<Scalar, N> asinh(const Jet<Scalar, N>& a) {
  using std::asinh;
  using std::sqrt;
  const Scalar x = a.value();
  const Scalar q = Scalar(1) + x * x;
  const Scalar s = sqrt(q);
  return Jet<Scalar, N>::compose(
      a, {asinh(x), Scalar(1) / s, -x / (q * s), (Scalar(2) * x * x - Scalar(1)) / (q * q * s)});
}

/// x^p for x > 0.
template <typename Scalar, int N>
Jet<Scalar, N> pow(const Jet<Scalar, N>& a, Scalar p) {
  using std::pow;
  const Scalar x = a.value();
  const Scalar v = pow(x, p);
  return Jet<Scalar, N>::compose(a, {v, p * v / x, p * (p - 1) * v / (x * x),
                                     p * (p - 1) * (p - 2) * v / (x * x * x)});
}

// Scalar overloads so the same templated expressions work on plain doubles.
inline double value_of(double x) { return x; }
inline long double value_of(long double x) { return x; }
template <typename Scalar, int N>
Scalar value_of(const Jet<Scalar, N>& a) {
  return a.value();
}

}  // namespace blowup
