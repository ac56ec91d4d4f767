#include "blowup/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blowup/cutoff.hpp"
#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

// ---------------------------------------------------------------------------
// Parameters

std::string_view to_string(Variant v) {
  return v == Variant::bounded ? "bounded" : "unbounded";
}

Variant parse_variant(std::string_view name) {
  if (name == "bounded") return Variant::bounded;
  if (name == "unbounded") return Variant::unbounded;
  throw InvalidParams("unknown variant '" + std::string(name) + "'");
}

ConstructionParams ConstructionParams::make(Variant variant, double r0, double quad_tol) {
  if (!(r0 >= min_r0) || !std::isfinite(r0)) {
    throw InvalidParams("r0 must be >= " + std::to_string(min_r0) + ", got " +
                        std::to_string(r0));
  }
  if (!(quad_tol > 0.0) || quad_tol >= 1e-2) {
    throw InvalidParams("quad_tol must lie in (0, 1e-2)");
  }
  ConstructionParams p;
  p.variant = variant;
  p.r0 = r0;
  p.quad_tol = quad_tol;
  p.epsilon = variant == Variant::bounded ? 0.0 : 1.0 / (r0 * r0 * std::log(r0));
  return p;
}

ConstructionParams ConstructionParams::with_epsilon(double eps) const {
  ConstructionParams p = *this;
  p.epsilon = eps;
  return p;
}

// ---------------------------------------------------------------------------
// Scalar building blocks

double cutoff_xi(double s, int deriv_order) {
  if (deriv_order < 0 || deriv_order > 3) throw InvalidParams("cutoff_xi: deriv_order in 0..3");
  return cutoff(Jet<double, 3>::variable(s))[deriv_order];
}

double phi_inner_inverse(double s) { return s / std::sqrt((1.0 - s) * (1.0 + s)); }

template <int N>
Jet<double, N> f0_jet(double r, double eps, double series_switch_radius) {
  using J = Jet<double, N>;
  const J x = J::variable(r);
  if (r < series_switch_radius) {
    // Even expansions of both closed-form pieces.
    const J u = x * x;
    const J base =
        0.5 + u * (5.0 / 6 + u * (1.0 / 5 + u * (-2.0 / 35 + u * (8.0 / 315 + u * (-16.0 / 1155 +
                                                                                u * (128.0 / 15015))))));
    if (eps == 0.0) return base;
    const J corr =
        u * (1.0 / 6 + u * (1.0 / 5 + u * (1.0 / 70 + u * (-2.0 / 315 + u * (4.0 / 1155 +
                                                                           u * (-32.0 / 15015))))));
    return base + eps * corr;
  }
  const J q = 1.0 + x * x;
  const J s = sqrt(q);
  const J a = asinh(x);
  J value = q * s * a / x - 0.5 * q;
  if (eps != 0.0) value += eps * q * s * (x * s - a) / (4.0 * x);
  return value;
}

template Jet<double, 0> f0_jet<0>(double, double, double);
template Jet<double, 1> f0_jet<1>(double, double, double);
template Jet<double, 2> f0_jet<2>(double, double, double);
template Jet<double, 3> f0_jet<3>(double, double, double);

double f0_closed(double r, double series_switch_radius) {
  return f0_jet<0>(r, 0.0, series_switch_radius).value();
}

// ---------------------------------------------------------------------------
// RadialProfiles

RadialProfiles::RadialProfiles(const ConstructionParams& params)
    : RadialProfiles(params, TransitionWindow{params.r0, params.r0}) {}

RadialProfiles::RadialProfiles(const ConstructionParams& params, TransitionWindow window)
    : params_(params), window_(window) {
  if (!(window.start > 0.0) || !(window.width >= 1.0)) {
    throw InvalidParams("transition window must have start > 0 and width >= 1");
  }
  f_tail_ = f0_jet<0>(window_.start, params_.epsilon, params_.series_switch_radius).value();
  build_corrector_table();
}

template <int N>
Jet<double, N> RadialProfiles::phi_jet(double r) const {
  using J = Jet<double, N>;
  const J x = J::variable(r);
  const double s = (r - window_.start) / window_.width;
  if (s <= 0.0) return phi_inner(x);
  if (s >= 1.0) return phi_outer(x, params_.epsilon);
  const J w = cutoff((x - window_.start) / window_.width);
  return w * phi_inner(x) + (1.0 - w) * phi_outer(x, params_.epsilon);
}

template <int N>
Jet<double, N> RadialProfiles::f_jet(double r) const {
  using J = Jet<double, N>;
  const double s = r - window_.start;
  if (s <= 0.0) return f0_jet<N>(r, params_.epsilon, params_.series_switch_radius);
  if (s >= 1.0) return J(f_tail_);
  const J w = cutoff(J::variable(r) - window_.start);
  return f0_jet<N>(r, params_.epsilon, params_.series_switch_radius) * w + (1.0 - w) * f_tail_;
}

template <int N>
Jet<double, N> RadialProfiles::h_jet(double r) const {
  using J = Jet<double, N>;
  const double edge = window_.start + window_.width;
  if (r <= edge) return J(0.5);
  const J x = J::variable(r);
  const double eps = params_.epsilon;
  J tail;
  if (eps == 0.0) {
    tail = (0.5 + 2.0 * f_tail_ / (x * x)) / phi_outer(x, 0.0);
  } else {
    tail = (0.5 + f_tail_ * (eps * eps + 0.5 * (2.0 + eps) * (2.0 + eps) / (x * x))) /
           (1.0 + 0.5 / (x * x));
  }
  if (r >= edge + 1.0) return tail;
  const J w = cutoff(x - edge);
  return 0.5 * w + (1.0 - w) * tail;
}

template Jet<double, 0> RadialProfiles::phi_jet<0>(double) const;
template Jet<double, 1> RadialProfiles::phi_jet<1>(double) const;
template Jet<double, 2> RadialProfiles::phi_jet<2>(double) const;
template Jet<double, 3> RadialProfiles::phi_jet<3>(double) const;
template Jet<double, 0> RadialProfiles::f_jet<0>(double) const;
template Jet<double, 1> RadialProfiles::f_jet<1>(double) const;
template Jet<double, 2> RadialProfiles::f_jet<2>(double) const;
template Jet<double, 3> RadialProfiles::f_jet<3>(double) const;
template Jet<double, 0> RadialProfiles::h_jet<0>(double) const;
template Jet<double, 1> RadialProfiles::h_jet<1>(double) const;
template Jet<double, 2> RadialProfiles::h_jet<2>(double) const;
template Jet<double, 3> RadialProfiles::h_jet<3>(double) const;

namespace {

void check_order(int deriv_order) {
  if (deriv_order < 0 || deriv_order > 3) throw InvalidParams("deriv_order must lie in 0..3");
}

// E and its first N derivatives from jets of phi (N+2), f (N+1) and h (N).
template <int N>
Jet<double, N> deficit_from(double r, double eps, const Jet<double, N + 2>& phi,
                            const Jet<double, N + 1>& f, const Jet<double, N>& h) {
  using J = Jet<double, N>;
  using J1 = Jet<double, N + 1>;
  const J1 x1 = J1::variable(r);
  const J1 flux = x1 * derivative(phi) * f;
  const J x = J::variable(r);
  const J p = truncate<N>(phi);
  const J dp = truncate<N>(derivative(phi));
  return 0.5 * (x * dp + eps * p) + h * p / (x * x) - derivative(flux) / x;
}

}  // namespace

double RadialProfiles::phi(double r, int deriv_order) const {
  check_order(deriv_order);
  return phi_jet<3>(r)[deriv_order];
}

double RadialProfiles::f(double r, int deriv_order) const {
  check_order(deriv_order);
  return f_jet<3>(r)[deriv_order];
}

double RadialProfiles::h(double r, int deriv_order) const {
  check_order(deriv_order);
  return h_jet<3>(r)[deriv_order];
}

double RadialProfiles::deficit(double r) const {
  return deficit_from<0>(r, params_.epsilon, phi_jet<2>(r), f_jet<1>(r), h_jet<0>(r)).value();
}

Jet<double, 1> RadialProfiles::deficit_jet(double r) const {
  return deficit_from<1>(r, params_.epsilon, phi_jet<3>(r), f_jet<2>(r), h_jet<1>(r));
}

double RadialProfiles::corrector_integrand(double t) const {
  return t * deficit(t) / phi_jet<0>(t).value();
}

void RadialProfiles::build_corrector_table() {
  // Panels: fine inside the two unit-width gluing windows, unit width between.
  constexpr int window_panels = 64;
  const double a = window_.start;
  const double b = window_.start + window_.width;
  eta_edges_.clear();
  for (int k = 0; k < window_panels; ++k) eta_edges_.push_back(a + double(k) / window_panels);
  const int middle = static_cast<int>(std::ceil(window_.width - 1.0));
  for (int k = 0; k < middle; ++k) {
    eta_edges_.push_back(a + 1.0 + (b - a - 1.0) * double(k) / middle);
  }
  for (int k = 0; k <= window_panels; ++k) eta_edges_.push_back(b + double(k) / window_panels);

  eta_knots_.assign(eta_edges_.size(), 0.0);
  const auto integrand = [this](double t) { return corrector_integrand(t); };
  // Roundoff level of t E / phi; phi_1' alone loses a factor r^2 to cancellation.
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * a * std::log(a + 2.0);
  for (std::size_t k = 1; k < eta_edges_.size(); ++k) {
    eta_knots_[k] = eta_knots_[k - 1] + integrate_adaptive(integrand, eta_edges_[k - 1],
                                                           eta_edges_[k], params_.quad_tol, noise);
  }
}

double RadialProfiles::eta(double r, int deriv_order) const {
  if (deriv_order < 0 || deriv_order > 2) throw InvalidParams("eta: deriv_order in 0..2");
  if (r <= window_.start) return 0.0;
  if (r >= window_.deficit_end()) return deriv_order == 0 ? eta_knots_.back() : 0.0;
  if (deriv_order == 1) return r * deficit(r) / phi(r);
  if (deriv_order == 2) {
    using J1 = Jet<double, 1>;
    const J1 e = deficit_jet(r);
    const J1 p = truncate<1>(phi_jet<1>(r));
    return (J1::variable(r) * e / p)[1];
  }
  const auto it = std::upper_bound(eta_edges_.begin(), eta_edges_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - eta_edges_.begin()) - 1;
  const double lo = eta_edges_[k];
  if (r == lo) return eta_knots_[k];
  return eta_knots_[k] +
         integrate_panel([this](double t) { return corrector_integrand(t); }, lo, r);
}

double RadialProfiles::beta(double r) const {
  const double eps = params_.epsilon;
  if (r < 0.1) {
    const double u = r * r;
    const double base =
        5.0 / 6 + u * (1.0 / 5 + u * (-2.0 / 35 + u * (8.0 / 315 + u * (-16.0 / 1155 +
                                                                        u * (128.0 / 15015)))));
    const double corr =
        1.0 / 6 + u * (1.0 / 5 + u * (1.0 / 70 + u * (-2.0 / 315 + u * (4.0 / 1155 +
                                                                       u * (-32.0 / 15015)))));
    return base + eps * corr;
  }
  return (f(r) - 0.5) / (r * r);
}

}  // namespace blowup
