#include "blowup/quasilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"
#include "blowup/verify.hpp"

namespace blowup {

using std::abs;
using std::hypot;
using std::sqrt;

PairedProfiles paired_profiles(const ConstructionParams& params) {
  if (params.variant != Variant::bounded) {
    throw InvalidParams("the quasilinear example is built on the bounded variant");
  }
  const double r0 = params.r0;
  return PairedProfiles{RadialProfiles(params), RadialProfiles(params, {3.0 * r0, r0})};
}

template <Real Scalar>
WSample<Scalar> W_eval(const PairedProfiles& pp, const Eigen::Vector2d& x) {
  WSample<Scalar> s;
  const Scalar x0 = x.x();
  const Scalar x1 = x.y();
  const Scalar r = hypot(x0, x1);
  if (r == Scalar(0)) {
    s.W.setZero();
  } else {
    const Scalar phi = pp.base.phi_value(r);
    const Scalar phit = pp.tilde.phi_value(r);
    s.W << phi * x0 / r, phi * x1 / r, phit * x0 / r, phit * x1 / r;
  }
  s.DW.template topRows<2>() = U_eval(pp.base, x).DU;
  s.DW.template bottomRows<2>() = U_eval(pp.tilde, x).DU;
  return s;
}

template WSample<double> W_eval<double>(const PairedProfiles&, const Eigen::Vector2d&);
template WSample<long double> W_eval<long double>(const PairedProfiles&, const Eigen::Vector2d&);
template WSample<quad> W_eval<quad>(const PairedProfiles&, const Eigen::Vector2d&);

Eigen::Matrix<double, 8, 8> A0_tensor(const PairedProfiles& pp, const Eigen::Vector2d& x) {
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  a.topLeftCorner<4, 4>() = tensor_cartesian(pp.base, x);
  a.bottomRightCorner<4, 4>() = tensor_cartesian(pp.tilde, x);
  return a;
}

namespace {

double segment_distance(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                        const Eigen::Vector2d& q0, const Eigen::Vector2d& q1) {
  const auto cross = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
  };
  const Eigen::Vector2d d1 = p1 - p0;
  const Eigen::Vector2d d2 = q1 - q0;
  const double o1 = cross(d1, q0 - p0);
  const double o2 = cross(d1, q1 - p0);
  const double o3 = cross(d2, p0 - q0);
  const double o4 = cross(d2, p1 - q0);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  const auto point_segment = [](const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
  };
  return std::min({point_segment(p0, q0, q1), point_segment(p1, q0, q1),
                   point_segment(q0, p0, p1), point_segment(q1, p0, p1)});
}

// 1 - phi_1(r) without cancellation.
double inner_deficit(double r) {
  const double s = sqrt(1.0 + r * r);
  return 1.0 / (s * (s + r));
}

}  // namespace

GammaCurve gamma_build(const PairedProfiles& pp, std::size_t n_samples) {
  if (n_samples < 2048) throw InvalidParams("gamma_build needs at least 2048 samples");
  const double r0 = pp.base.params().r0;
  const double mid_end = pp.tilde.window().deficit_end();
  GammaCurve g;
  const std::size_t n_log = n_samples / 4;
  const std::size_t n_mid = n_samples - 2 * n_log;
  for (std::size_t k = 0; k < n_log; ++k) {
    g.r.push_back(1e-3 * std::pow(r0 / 1e-3, double(k) / n_log));
  }
  for (std::size_t k = 0; k < n_mid; ++k) {
    g.r.push_back(r0 + (mid_end - r0) * double(k) / n_mid);
  }
  for (std::size_t k = 0; k < n_log; ++k) {
    g.r.push_back(mid_end * std::pow(100.0 * r0 / mid_end, double(k) / (n_log - 1)));
  }
  double tail_min = INFINITY;
  for (const double r : g.r) {
    g.x.push_back(pp.base.phi(r));
    g.y.push_back(pp.tilde.phi(r));
    if (r >= pp.tilde.window().start + pp.tilde.window().width) {
      tail_min = std::min(tail_min, g.x.back() - 1.0);
    }
  }
  g.diagonal_gap = inner_deficit(r0) + tail_min;

  const std::size_t nseg = g.r.size() - 1;
  std::vector<double> best(nseg, INFINITY);
  parallel_for(nseg, [&](std::size_t i) {
    const Eigen::Vector2d p0(g.x[i], g.y[i]);
    const Eigen::Vector2d p1(g.x[i + 1], g.y[i + 1]);
    double m = INFINITY;
    for (std::size_t j = i + 2; j < nseg; ++j) {
      m = std::min(m, segment_distance(p0, p1, Eigen::Vector2d(g.x[j], g.y[j]),
                                       Eigen::Vector2d(g.x[j + 1], g.y[j + 1])));
    }
    best[i] = m;
  });
  g.min_nonadjacent_distance = *std::min_element(best.begin(), best.end());
  g.injective = g.min_nonadjacent_distance > 0.0;
  if (!g.injective) throw InjectivityFailure("Gamma has crossing non-adjacent segments");
  return g;
}

StateCoefficients::StateCoefficients(const PairedProfiles& pp) : pp_(&pp) {
  const double r0 = pp.base.params().r0;
  a_ = inner_deficit(r0);
  delta_bar_ = 4.0 * a_;
  for (int k = 0; k < 2; ++k) {
    const RadialProfiles& p = family(k);
    const double end = p.window().start + 1.0;
    top_[k] = p.phi(end);
    kappa_[k] = 1.0 / (48.0 * p.f_tail());
    constexpr int n = 20000;
    for (int i = 1; i <= n; ++i) {
      const double r = end * double(i) / n;
      if (!(p.phi(r, 1) > 0.0)) {
        throw FactorizationFailure("phi is not increasing before the end of the f window");
      }
    }
    for (int i = 1; i <= n; ++i) {
      const double r = end * std::pow(1e3, double(i) / n);
      if (p.phi(r) < top_[k]) {
        throw FactorizationFailure("phi returns below its value at the end of the f window");
      }
    }
  }
}

template <Real S>
S StateCoefficients::increasing_inverse(int k, S s) const {
  const RadialProfiles& p = family(k);
  const S start = p.window().start;
  S r = s / sqrt((S(1) - s) * (S(1) + s));
  if (r <= start) return r;
  const S lo = start;
  const S hi = start + S(1);
  r = std::clamp(r, lo, hi);
  for (int it = 0; it < 60; ++it) {
    const S step = (p.phi_value(r) - s) / S(p.phi(double(r), 1));
    r = std::clamp(r - step, lo, hi);
    if (abs(step) <= S(4) * std::numeric_limits<S>::epsilon() * r) break;
  }
  return r;
}

template <Real S>
double StateCoefficients::branch_f(int k, S s) const {
  const S a = abs(s);
  if (a >= S(top_[k])) return family(k).f_tail();
  return family(k).template f_jet<0>(double(increasing_inverse(k, a))).value();
}

template <Real S>
double StateCoefficients::F_excess(int k, S s) const {
  const RadialProfiles& p = family(k);
  const S a = abs(s);
  if (a == S(0)) return p.beta(0.0);
  if (a <= phi_inner(S(p.window().start))) {
    const S one_minus = (S(1) - a) * (S(1) + a);
    return p.beta(double(a / sqrt(one_minus))) / double(one_minus);
  }
  return (branch_f(k, a) - 0.5) / double(a * a);
}

template <Real S>
S StateCoefficients::collar(S t) const {
  const S two_a = S(2.0 * a_);
  return cutoff((abs(t - S(1)) - two_a) / two_a);
}

template <Real S>
double StateCoefficients::N(S x, S y) const {
  const S db = delta_bar_;
  if (abs(x - S(1)) >= db || abs(y - S(1)) >= db) return 0.0;
  const RadialProfiles& p = pp_->base;
  const double eta =
      y >= S(1) ? p.eta_tail() : p.eta(double(y / sqrt((S(1) - y) * (S(1) + y))));
  return eta * double(collar(x) * collar(y));
}

template <Real S>
double StateCoefficients::H(S x, S y) const {
  const S db = delta_bar_;
  if (abs(x - S(1)) >= db || abs(y - S(1)) >= db) return 0.5;
  const RadialProfiles& p = pp_->base;
  const S edge = p.window().start + p.window().width;
  const S wy = y >= S(1) ? S(1) : S(1) - cutoff(y / sqrt((S(1) - y) * (S(1) + y)) - edge);
  const S chi = cutoff((S(1) - x) / S(kappa_[0]));
  const S bump = (x - S(1)) * S(4.0 * p.f_tail() - 0.5) / x;
  return 0.5 + double(bump * wy * chi * collar(x) * collar(y));
}

namespace {

// Switch from 0 to 1 in y between phi_1 at the end of the base phi window
// and phi_1 at the start of the companion window.
template <Real S>
S companion_gate(const PairedProfiles& pp, S y) {
  const S lo = phi_inner(S(pp.base.window().start + pp.base.window().width));
  const S hi = phi_inner(S(pp.tilde.window().start));
  return S(1) - cutoff((y - lo) / (hi - lo));
}

}  // namespace

template <Real S>
double StateCoefficients::N_tilde(S x, S y) const {
  const S db = delta_bar_;
  if (abs(x - S(1)) >= db || abs(y - S(1)) >= db) return 0.0;
  const RadialProfiles& p = pp_->tilde;
  const S end = p.window().deficit_end();
  const double eta = x <= S(1) + S(0.5) / (end * end)
                         ? p.eta_tail()
                         : p.eta(double(S(1) / sqrt(S(2) * (x - S(1)))));
  return eta * double(companion_gate(*pp_, y) * collar(x) * collar(y));
}

template <Real S>
double StateCoefficients::H_tilde(S x, S y) const {
  const S db = delta_bar_;
  if (abs(x - S(1)) >= db || abs(y - S(1)) >= db) return 0.5;
  const RadialProfiles& p = pp_->tilde;
  const S edge = p.window().start + p.window().width;
  const S wx = x <= S(1) ? S(1) : S(1) - cutoff(S(1) / sqrt(S(2) * (x - S(1))) - edge);
  const S chi = cutoff((S(1) - x) / S(kappa_[1]));
  const S bump = (x - S(1)) * S(4.0 * p.f_tail() - 0.5) / x;
  return 0.5 + double(bump * wx * companion_gate(*pp_, y) * chi * collar(x) * collar(y));
}

#define BLOWUP_STATE_INSTANTIATE(S)                                 \
  template double StateCoefficients::F_excess<S>(int, S) const;     \
  template double StateCoefficients::branch_f<S>(int, S) const;     \
  template double StateCoefficients::H<S>(S, S) const;              \
  template double StateCoefficients::N<S>(S, S) const;              \
  template double StateCoefficients::H_tilde<S>(S, S) const;        \
  template double StateCoefficients::N_tilde<S>(S, S) const;
BLOWUP_STATE_INSTANTIATE(double)
BLOWUP_STATE_INSTANTIATE(long double)
BLOWUP_STATE_INSTANTIATE(quad)
#undef BLOWUP_STATE_INSTANTIATE

template <Real S>
Eigen::Matrix<double, 8, 8> A_of_state(const StateCoefficients& c,
                                       const Eigen::Matrix<S, 2, 1>& p,
                                       const Eigen::Matrix<S, 2, 1>& q) {
  const S sp = hypot(p.x(), p.y());
  const S sq = hypot(q.x(), q.y());
  const auto diagonal_block = [&](int family, const Eigen::Matrix<S, 2, 1>& v, S norm,
                                  double h) {
    Eigen::Matrix2d m = 0.5 * Eigen::Matrix2d::Identity();
    if (norm == S(0)) return m;
    const Eigen::Vector2d vd(double(v.x()), double(v.y()));
    const Eigen::Vector2d unit(double(v.x() / norm), double(v.y() / norm));
    const Eigen::Vector2d perp(-unit.y(), unit.x());
    m += c.F_excess(family, norm) * vd * vd.transpose() + (h - 0.5) * perp * perp.transpose();
    return m;
  };
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  a.topLeftCorner<4, 4>() = cartesian_block<double>(diagonal_block(0, p, sp, c.H(sp, sq)), c.N(sp, sq));
  a.bottomRightCorner<4, 4>() =
      cartesian_block<double>(diagonal_block(1, q, sq, c.H_tilde(sp, sq)), c.N_tilde(sp, sq));
  return a;
}

template Eigen::Matrix<double, 8, 8> A_of_state<double>(const StateCoefficients&,
                                                        const Eigen::Vector2d&,
                                                        const Eigen::Vector2d&);
template Eigen::Matrix<double, 8, 8> A_of_state<long double>(
    const StateCoefficients&, const Eigen::Matrix<long double, 2, 1>&,
    const Eigen::Matrix<long double, 2, 1>&);
template Eigen::Matrix<double, 8, 8> A_of_state<quad>(const StateCoefficients&,
                                                      const Eigen::Matrix<quad, 2, 1>&,
                                                      const Eigen::Matrix<quad, 2, 1>&);

GammaValues coefficients_on_gamma(const StateCoefficients& c, double r) {
  const quad x = c.profiles().base.phi_value<quad>(r);
  const quad y = c.profiles().tilde.phi_value<quad>(r);
  return GammaValues{c.F(x),       c.H(x, y),       c.N(x, y),
                     c.F_tilde(y), c.H_tilde(x, y), c.N_tilde(x, y)};
}

namespace {

double operator_norm(const Eigen::Matrix<double, 8, 8>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::Matrix<double, 8, 8>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::Matrix<double, 8, 1> vec8(const Eigen::Matrix<double, 4, 2>& g) {
  Eigen::Matrix<double, 8, 1> v;
  for (int a = 0; a < 4; ++a) {
    v(2 * a) = g(a, 0);
    v(2 * a + 1) = g(a, 1);
  }
  return v;
}

}  // namespace

ReportSection consistency_check(const StateCoefficients& c, const GammaCurve& gamma,
                                const ConsistencyOptions& opt) {
  const PairedProfiles& pp = c.profiles();
  const double r0 = pp.base.params().r0;
  ReportSection sec;
  sec.name = "quasilinear_consistency";

  // Radial grid: log-spaced up to r0, uniform beyond, up to 10 r0.
  std::vector<double> radii;
  const std::size_t n_inner = opt.n_radii / 4;
  for (std::size_t k = 0; k < n_inner; ++k) {
    radii.push_back(1e-3 * std::pow(r0 / 1e-3, double(k) / n_inner));
  }
  for (std::size_t k = 0; k < opt.n_radii - n_inner; ++k) {
    radii.push_back(r0 + 9.0 * r0 * double(k + 1) / double(opt.n_radii - n_inner));
  }

  // A(W(x)) against A0(x).
  const std::size_t na = static_cast<std::size_t>(opt.n_angles);
  std::vector<double> gap(radii.size() * na), gap_long(radii.size() * na),
      gap_double(radii.size() * na);
  parallel_for(radii.size() * na, [&](std::size_t i) {
    const double r = radii[i / na];
    const double th = 2.0 * std::numbers::pi * (double(i % na) + 0.125) / double(na);
    const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
    const Eigen::Matrix<double, 8, 8> a0 = A0_tensor(pp, x);
    const auto wq = W_eval<quad>(pp, x);
    gap[i] = operator_norm(A_of_state<quad>(c, Eigen::Matrix<quad, 2, 1>(wq.W.head(2)),
                                            Eigen::Matrix<quad, 2, 1>(wq.W.tail(2))) -
                           a0);
    const auto wl = W_eval<long double>(pp, x);
    gap_long[i] = operator_norm(
        A_of_state<long double>(c, Eigen::Matrix<long double, 2, 1>(wl.W.head(2)),
                                Eigen::Matrix<long double, 2, 1>(wl.W.tail(2))) -
        a0);
    const auto wd = W_eval<double>(pp, x);
    gap_double[i] = operator_norm(
        A_of_state<double>(c, Eigen::Vector2d(wd.W.head(2)), Eigen::Vector2d(wd.W.tail(2))) - a0);
  });
  const auto worst = std::max_element(gap.begin(), gap.end());
  const double max_gap = *worst;
  sec.data["max_gap"] = max_gap;
  sec.data["max_gap_radius"] = radii[static_cast<std::size_t>(worst - gap.begin()) / na];
  sec.data["max_gap_long_double_state"] = *std::max_element(gap_long.begin(), gap_long.end());
  sec.data["max_gap_double_state"] = *std::max_element(gap_double.begin(), gap_double.end());
  sec.data["grid"] = {{"radii", radii.size()}, {"angles", na}};
  sec.check("gap", max_gap <= opt.gap_tol);

  // Round trips on Gamma.
  std::vector<double> rt(opt.n_radii);
  for (std::size_t k = 0; k < opt.n_radii; ++k) {
    rt[k] = 1e-3 * std::pow(10.0 * r0 / 1e-3, double(k) / double(opt.n_radii - 1));
  }
  double e_f = 0, e_h = 0, e_n = 0, e_ft = 0, e_ht = 0, e_nt = 0;
  for (const double r : rt) {
    const GammaValues v = coefficients_on_gamma(c, r);
    e_f = std::max(e_f, abs(v.F - pp.base.f(r)));
    e_h = std::max(e_h, abs(v.H - pp.base.h(r)));
    e_n = std::max(e_n, abs(v.N - pp.base.eta(r)));
    e_ft = std::max(e_ft, abs(v.F_tilde - pp.tilde.f(r)));
    e_ht = std::max(e_ht, abs(v.H_tilde - pp.tilde.h(r)));
    e_nt = std::max(e_nt, abs(v.N_tilde - pp.tilde.eta(r)));
  }
  sec.data["roundtrip"] = {{"F", e_f},        {"H", e_h},        {"N", e_n},
                           {"F_tilde", e_ft}, {"H_tilde", e_ht}, {"N_tilde", e_nt}};
  sec.check("roundtrip",
            std::max({e_f, e_h, e_n, e_ft, e_ht, e_nt}) <= opt.roundtrip_tol);

  sec.data["gamma"] = {{"samples", gamma.r.size()},
                       {"diagonal_gap", gamma.diagonal_gap},
                       {"min_nonadjacent_distance", gamma.min_nonadjacent_distance},
                       {"delta", c.delta()},
                       {"delta_bar", c.delta_bar()}};
  sec.check("gamma_injective", gamma.injective);

  // Random states: half anywhere in a box, half near (|p|, |q|) = (1, 1).
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> box(-1.2, 1.2);
  std::uniform_real_distribution<double> near(-1.5, 1.5);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> states(opt.n_random_states);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k % 2 == 0) {
      states[k] = {Eigen::Vector2d(box(rng), box(rng)), Eigen::Vector2d(box(rng), box(rng))};
    } else {
      const double sp = 1.0 + c.delta_bar() * near(rng);
      const double sq = 1.0 + c.delta_bar() * near(rng);
      const double tp = angle(rng);
      const double tq = angle(rng);
      states[k] = {sp * Eigen::Vector2d(std::cos(tp), std::sin(tp)),
                   sq * Eigen::Vector2d(std::cos(tq), std::sin(tq))};
    }
  }
  std::vector<double> lam(states.size()), n_abs(states.size()), h_min(states.size());
  std::vector<char> support_ok(states.size());
  parallel_for(states.size(), [&](std::size_t k) {
    const auto& [p, q] = states[k];
    lam[k] = min_eigenvalue(A_of_state<double>(c, p, q));
    const double sp = p.norm(), sq = q.norm();
    n_abs[k] = std::max(abs(c.N(sp, sq)), abs(c.N_tilde(sp, sq)));
    h_min[k] = std::min(c.H(sp, sq), c.H_tilde(sp, sq));
    const bool outside = std::max(abs(sp - 1.0), abs(sq - 1.0)) > c.delta_bar();
    support_ok[k] = !outside || (c.N(sp, sq) == 0.0 && c.N_tilde(sp, sq) == 0.0 &&
                                 c.H(sp, sq) == 0.5 && c.H_tilde(sp, sq) == 0.5);
  });
  const double lam_min = *std::min_element(lam.begin(), lam.end());
  sec.data["random_states"] = {
      {"count", states.size()},
      {"seed", opt.seed},
      {"lambda_min", lam_min},
      {"sup_N_over_log_r0", *std::max_element(n_abs.begin(), n_abs.end()) / std::log(r0)},
      {"min_H", *std::min_element(h_min.begin(), h_min.end())}};
  sec.check("state_ellipticity", lam_min > opt.lambda_threshold);
  sec.check("support", std::all_of(support_ok.begin(), support_ok.end(), [](char b) { return b; }));
  sec.check("H_lower_bound", *std::min_element(h_min.begin(), h_min.end()) >= 1.0 / 3.0);

  const EllipticityReport eb =
      ellipticity_scan(pp.base, default_scan_radii(pp.base), opt.lambda_threshold, opt.seed, 64);
  const EllipticityReport et = ellipticity_scan(pp.tilde, default_scan_radii(pp.tilde),
                                                opt.lambda_threshold, opt.seed, 64);
  sec.data["A0_lambda_min"] = std::min(eb.lambda_min, et.lambda_min);
  sec.check("A0_ellipticity", eb.pass && et.pass);

  // div(A0 DW) = DW x / 2, on the same kind of grid as the m = 2 check.
  const std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};
  const auto flux = [&](const Eigen::Vector2d& y) {
    const Eigen::Matrix<double, 8, 1> g = A0_tensor(pp, y) * vec8(W_eval<double>(pp, y).DW);
    Eigen::Matrix<double, 4, 2> f;
    for (int a = 0; a < 4; ++a) f.row(a) << g(2 * a), g(2 * a + 1);
    return f;
  };
  std::vector<double> wr;
  for (int k = 0; k < 48; ++k) wr.push_back(std::pow(5.0 * r0, double(k) / 47));
  for (int k = 0; k < 16; ++k) wr.push_back(3.0 * r0 + (r0 + 1.0) * (k + 0.5) / 16);
  std::vector<double> wres(wr.size() * 4 * steps.size());
  parallel_for(wr.size() * 4, [&](std::size_t i) {
    const double r = wr[i / 4];
    const double th = 2.0 * std::numbers::pi * (double(i % 4) + 0.3) / 4.0;
    const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
    const Eigen::Matrix<double, 4, 1> drift = W_eval<double>(pp, x).DW * x;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      wres[i * steps.size() + s] =
          (frame_divergence<4>(flux, x, steps[s]) - 0.5 * drift).norm();
    }
  });
  std::vector<double> wmax(steps.size(), 0.0);
  for (std::size_t i = 0; i < wres.size(); ++i) {
    wmax[i % steps.size()] = std::max(wmax[i % steps.size()], wres[i]);
  }
  const double worder = fitted_order(steps, wmax);
  sec.data["W_residual"] = {{"steps", steps}, {"max_residual", wmax}, {"order", worder}};
  sec.check("W_residual_order", worder >= 1.9);
  return sec;
}

}  // namespace blowup
