#include "blowup/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"

namespace blowup {

MapSample U_eval(const RadialProfiles& p, const Eigen::Vector2d& x) {
  MapSample s;
  const double r = x.norm();
  if (r == 0.0) {
    s.U.setZero();
    s.DU = p.phi(0.0, 1) * Eigen::Matrix2d::Identity();
    s.drift.setZero();
    return s;
  }
  const Jet<double, 1> phi = p.phi_jet<1>(r);
  const FrameBasis b = frame_at(x);
  s.U = phi[0] * b.nu;
  s.DU = phi[1] * b.nu * b.nu.transpose() + (phi[0] / r) * b.tau * b.tau.transpose();
  s.drift = (r * phi[1] + p.epsilon() * phi[0]) * b.nu;
  return s;
}

Eigen::Matrix2d stationary_flux(const RadialProfiles& p, const Eigen::Vector2d& y,
                                bool with_coupling) {
  const double r = y.norm();
  const double eta = (with_coupling && r > p.window().start) ? p.eta(r) : 0.0;
  const Eigen::Matrix4d a = cartesian_block<double>(scalar_block_M(p, y), eta);
  const Eigen::Vector4d g = a * vec(U_eval(p, y).DU);
  Eigen::Matrix2d flux;
  flux << g(0), g(1), g(2), g(3);
  return flux;
}

ResidualSample elliptic_residual(const RadialProfiles& p, const Eigen::Vector2d& x, double step,
                                 bool with_coupling) {
  if (!(step > 0.0)) throw InvalidParams("residual step must be positive");
  if (x.norm() <= step) throw OriginFrame("residual stencil reaches the origin");
  const auto flux = [&](const Eigen::Vector2d& y) { return stationary_flux(p, y, with_coupling); };
  ResidualSample s;
  s.x = x;
  s.scheme_step = step;
  s.residual = frame_divergence<2>(flux, x, step) - 0.5 * U_eval(p, x).drift;
  return s;
}

ResidualGrid default_residual_grid(const RadialProfiles& p, int n_log, int n_window,
                                   int n_angles) {
  ResidualGrid g;
  const double r0 = p.params().r0;
  const double lo = 0.0;
  const double hi = std::log(10.0 * r0);
  for (int k = 0; k < n_log; ++k) g.radii.push_back(std::exp(lo + (hi - lo) * k / (n_log - 1)));
  const double a = p.window().start;
  const double b = p.window().deficit_end();
  // Offset by half a cell so no sample sits exactly on a window edge; a
  // quarter of these go inside the unit gluing windows of f and h.
  const int n_unit = n_window / 8;
  const int n_spread = n_window - 2 * n_unit;
  for (int k = 0; k < n_spread; ++k) g.radii.push_back(a + (b - a) * (k + 0.5) / n_spread);
  for (int k = 0; k < n_unit; ++k) {
    g.radii.push_back(a + (k + 0.5) / n_unit);
    g.radii.push_back(a + p.window().width + (k + 0.5) / n_unit);
  }
  std::sort(g.radii.begin(), g.radii.end());
  for (int k = 0; k < n_angles; ++k) {
    g.angles.push_back(2.0 * std::numbers::pi * (k + 0.25) / n_angles);
  }
  return g;
}

double fitted_order(const std::vector<double>& steps, const std::vector<double>& values) {
  const std::size_t n = steps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(steps[k]);
    const double ly = std::log(values[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

bool in_gluing_window(const RadialProfiles& p, double r, double pad) {
  const double a = p.window().start;
  const double b = a + p.window().width;
  return (r >= a - pad && r <= a + 1.0 + pad) || (r >= b - pad && r <= b + 1.0 + pad);
}

}  // namespace

ReportSection residual_convergence(const RadialProfiles& p, const ResidualGrid& grid,
                                   const std::vector<double>& steps, double max_residual_bound,
                                   double min_order) {
  constexpr double probe_step = 1e-4;
  const std::size_t na = grid.angles.size();
  const std::size_t npts = grid.radii.size() * na;
  const std::size_t ns = steps.size();
  std::vector<double> res(npts * ns);
  std::vector<double> probe_gap(npts);
  parallel_for(npts, [&](std::size_t i) {
    const double r = grid.radii[i / na];
    const double th = grid.angles[i % na];
    const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
    for (std::size_t k = 0; k < ns; ++k) {
      res[i * ns + k] = elliptic_residual(p, x, steps[k]).residual.norm();
    }
    const Eigen::Vector2d full = elliptic_residual(p, x, probe_step).residual;
    const Eigen::Vector2d decoupled = elliptic_residual(p, x, probe_step, false).residual;
    probe_gap[i] = (decoupled + p.deficit(r) * x / r - full).norm();
  });

  std::vector<double> max_all(ns, 0.0), max_window(ns, 0.0), max_smooth(ns, 0.0);
  double worst_radius = 0.0;
  for (std::size_t i = 0; i < npts; ++i) {
    const double r = grid.radii[i / na];
    const bool window = in_gluing_window(p, r, steps.front());
    for (std::size_t k = 0; k < ns; ++k) {
      const double v = res[i * ns + k];
      if (k + 1 == ns && v > max_all[k]) worst_radius = r;
      max_all[k] = std::max(max_all[k], v);
      auto& cls = window ? max_window : max_smooth;
      cls[k] = std::max(cls[k], v);
    }
  }
  const auto safe_order = [&](const std::vector<double>& v) {
    return *std::min_element(v.begin(), v.end()) > 0.0 ? fitted_order(steps, v) : NAN;
  };

  ReportSection sec;
  sec.name = "residual_convergence";
  sec.data["n_points"] = npts;
  sec.data["steps"] = steps;
  sec.data["max_residual"] = max_all;
  sec.data["max_residual_window"] = max_window;
  sec.data["max_residual_smooth"] = max_smooth;
  const double order = safe_order(max_all);
  sec.data["order"] = order;
  sec.data["order_window"] = safe_order(max_window);
  sec.data["order_smooth"] = safe_order(max_smooth);
  sec.data["worst_radius"] = worst_radius;
  const double gap = *std::max_element(probe_gap.begin(), probe_gap.end());
  sec.data["decoupled_probe_gap"] = gap;
  sec.check("finest_max_residual", max_all.back() <= max_residual_bound);
  sec.check("order", order >= min_order);
  sec.check("decoupled_probe", gap <= 1e-8);
  return sec;
}

ReportSection decay_audit(const RadialProfiles& p, double slope_tol) {
  const double r0 = p.params().r0;
  const double eps = p.epsilon();
  const auto du_norm = [&](double r) {
    const Jet<double, 1> phi = p.phi_jet<1>(r);
    return std::hypot(phi[1], phi[0] / r);
  };
  const auto drift_norm = [&](double r) {
    const Jet<double, 1> phi = p.phi_jet<1>(r);
    return std::abs(r * phi[1] + eps * phi[0]);
  };
  constexpr int n = 200;
  std::vector<double> rs, du, drift;
  for (int k = 0; k < n; ++k) {
    const double r = 10.0 * r0 * std::pow(1e3, double(k) / (n - 1));
    rs.push_back(r);
    du.push_back(du_norm(r));
    drift.push_back(drift_norm(r));
  }
  const double s_du = fitted_order(rs, du);
  const double s_drift = fitted_order(rs, drift);
  double c_du = 0.0, c_drift = 0.0;
  for (int k = 0; k < 4000; ++k) {
    const double r = std::pow(100.0 * r0, double(k) / 3999);
    c_du = std::max(c_du, du_norm(r) * r);
    c_drift = std::max(c_drift, drift_norm(r) * r * r);
  }
  ReportSection sec;
  sec.name = "decay";
  sec.data["slope_DU"] = s_du;
  sec.data["slope_drift"] = s_drift;
  sec.data["expected_slope_DU"] = -1.0 - eps;
  sec.data["expected_slope_drift"] = -2.0 - eps;
  sec.data["sup_DU_times_r"] = c_du;
  sec.data["sup_drift_times_r2"] = c_drift;
  sec.check("slope_DU", std::abs(s_du - (-1.0 - eps)) <= slope_tol);
  sec.check("slope_drift", std::abs(s_drift - (-2.0 - eps)) <= slope_tol);
  return sec;
}

MaxPrinciple max_principle_probe(const RadialProfiles& p) {
  const double a = p.window().start;
  const double b = a + p.window().width;
  const auto dphi = [&](double r) { return p.phi(r, 1); };
  if (!(dphi(a) > 0.0 && dphi(b) < 0.0)) {
    throw RootNotBracketed("phi' does not change sign from + to - on the phi window");
  }
  const auto bracket =
      boost::math::tools::bisect(dphi, a, b, boost::math::tools::eps_tolerance<double>(52));
  MaxPrinciple out;
  out.r_star = 0.5 * (bracket.first + bracket.second);
  out.deficit_at_root = p.deficit(out.r_star);
  out.eta_jump = p.eta(out.r_star + 1.0) - p.eta(out.r_star - 1.0);
  return out;
}

ReportSection profile_estimate_audit(const RadialProfiles& p, double constant_cap) {
  const double r0 = p.params().r0;
  const double lg = std::log(r0);
  const double a = p.window().start;
  const double b = a + p.window().width;
  const double end = p.window().deficit_end();
  const bool unbounded = p.params().variant == Variant::unbounded;

  double c_phi1 = 0, c_phi2 = 0, c_phi1_r0 = 0, c_phi2_r0 = 0;
  double sup_e = 0, sup_eta = 0, h_max = 0, h_min = INFINITY, f_min = INFINITY;
  constexpr int n = 20001;
  for (int k = 0; k < n; ++k) {
    const double r = a + (end - a) * double(k) / (n - 1);
    const Jet<double, 2> phi = p.phi_jet<2>(r);
    if (r <= b) {
      c_phi1 = std::max(c_phi1, std::abs(phi[1]) * r * r * r);
      c_phi2 = std::max(c_phi2, std::abs(phi[2]) * r * r * r * r);
      c_phi1_r0 = std::max(c_phi1_r0, std::abs(phi[1]) * r0 * r0 * r0);
      c_phi2_r0 = std::max(c_phi2_r0, std::abs(phi[2]) * r0 * r0 * r0 * r0);
    }
    sup_e = std::max(sup_e, std::abs(p.deficit(r)));
    sup_eta = std::max(sup_eta, std::abs(p.eta(r)));
  }
  double e_outside = 0, eta_inside = 0;
  double f0_lo = INFINITY, f0_hi = 0;
  for (int k = 0; k < 4000; ++k) {
    const double r = 1e-3 * std::pow(1e4 * r0, double(k) / 3999);
    h_max = std::max(h_max, p.h(r));
    h_min = std::min(h_min, p.h(r));
    f_min = std::min(f_min, p.f(r));
    if (r < a || r > end) e_outside = std::max(e_outside, std::abs(p.deficit(r)));
    if (r <= a) eta_inside = std::max(eta_inside, std::abs(p.eta(r)));
    if (!unbounded && r >= r0 && r <= 10 * r0) {
      const double ratio = f0_closed(r) / (r * r * std::log(r));
      f0_lo = std::min(f0_lo, ratio);
      f0_hi = std::max(f0_hi, ratio);
    }
  }
  const double f_tail_ratio = p.f_tail() / (r0 * r0 * lg);

  ReportSection sec;
  sec.name = "estimates";
  sec.data["variant"] = std::string(to_string(p.params().variant));
  sec.data["r0"] = r0;
  sec.data["constant_cap"] = constant_cap;
  auto& m = sec.data["constants"];
  m["phi1_r3"] = c_phi1;
  m["phi2_r4"] = c_phi2;
  if (unbounded) {
    m["phi1_r0^3"] = c_phi1_r0;
    m["phi2_r0^4"] = c_phi2_r0;
  }
  m["f_tail_over_r0^2_log_r0"] = f_tail_ratio;
  if (!unbounded) {
    m["f0_over_R^2_log_R_min"] = f0_lo;
    m["f0_over_R^2_log_R_max"] = f0_hi;
  }
  m["h_min"] = h_min;
  m["h_max_over_log_r0"] = h_max / lg;
  m["f_min"] = f_min;
  m["sup_E_r0^2_over_log_r0"] = sup_e * r0 * r0 / lg;
  m["sup_E_outside_support"] = e_outside;
  m["sup_eta_over_log_r0"] = sup_eta / lg;
  m["sup_eta_inside_r0"] = eta_inside;

  sec.check("phi", std::max(unbounded ? std::max(c_phi1_r0, c_phi2_r0) : 0.0,
                            std::max(c_phi1, c_phi2)) <= constant_cap);
  if (unbounded) {
    sec.check("f", f_tail_ratio <= constant_cap && f_tail_ratio >= 1.0 / constant_cap);
  } else {
    sec.check("f", f0_lo >= 1.0 && f0_hi <= 2.0);
  }
  sec.check("h", h_min >= 0.5 - 1e-12 && h_max / lg <= constant_cap);
  sec.check("deficit", sup_e * r0 * r0 / lg <= constant_cap && e_outside <= 1e-10);
  sec.check("corrector", sup_eta / lg <= constant_cap && eta_inside == 0.0);
  return sec;
}

}  // namespace blowup
