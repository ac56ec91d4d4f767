#include "blowup/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "blowup/coefficients.hpp"
#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

double LogCutoff::value(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= R) return 0.0;
  return 1.0 - std::log(r) / std::log(R);
}

double LogCutoff::slope(double r) const {
  if (r <= 1.0 || r >= R) return 0.0;
  return -1.0 / (r * std::log(R));
}

double LogCutoff::energy_closed() const { return 2.0 * std::numbers::pi / std::log(R); }

namespace {

constexpr int kAngles = 32;

// int over the annulus a < |x| < b of g(x), trapezoid in angle and adaptive
// Gauss-Legendre in log r (or in r when a = 0).
double polar_integral(const std::function<double(const Eigen::Vector2d&)>& g, double a, double b,
                      double rel_tol) {
  const auto ring = [&](double r) {
    double s = 0.0;
    for (int k = 0; k < kAngles; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / kAngles;
      s += g(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
    }
    return 2.0 * std::numbers::pi * s / kAngles;
  };
  if (a == 0.0) {
    return integrate_adaptive([&](double r) { return ring(r) * r; }, 0.0, b, rel_tol, 1e-300);
  }
  return integrate_adaptive(
      [&](double u) {
        const double r = std::exp(u);
        return ring(r) * r * r;
      },
      std::log(a), std::log(b), rel_tol, 1e-300);
}

Eigen::Matrix2d radial_jacobian(double g, double dg, const Eigen::Vector2d& x) {
  const double r = x.norm();
  if (r == 0.0) return dg * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d nu = x / r;
  const Eigen::Vector2d tau(-nu.y(), nu.x());
  return dg * nu * nu.transpose() + (g / r) * tau * tau.transpose();
}

}  // namespace

double LogCutoff::energy_quadrature(double rel_tol) const {
  return polar_integral(
      [&](const Eigen::Vector2d& x) {
        const double s = slope(x.norm());
        return s * s;
      },
      1.0, R, rel_tol);
}

Field radial_field(std::function<double(double)> g, std::function<double(double)> dg) {
  return [g = std::move(g), dg = std::move(dg)](const Eigen::Vector2d& x) {
    const double r = x.norm();
    const double gr = g(r);
    FieldSample s;
    s.value = r == 0.0 ? Eigen::Vector2d::Zero() : Eigen::Vector2d(gr * x / r);
    s.jacobian = radial_jacobian(gr, dg(r), x);
    return s;
  };
}

Field profile_field(const RadialProfiles& p) {
  return radial_field([&p](double r) { return p.phi(r); }, [&p](double r) { return p.phi(r, 1); });
}

Field clamped_profile_field(const RadialProfiles& p, double r_star) {
  const double top = p.phi(r_star);
  return radial_field([&p, r_star, top](double r) { return r <= r_star ? p.phi(r) : top; },
                      [&p, r_star](double r) { return r <= r_star ? p.phi(r, 1) : 0.0; });
}

Field constant_field(const Eigen::Vector2d& c) {
  return [c](const Eigen::Vector2d&) { return FieldSample{c, Eigen::Matrix2d::Zero()}; };
}

MonotonicityReport monotonicity_scan(const Field& field, const std::vector<double>& radii,
                                     double angle) {
  const Eigen::Vector2d nu(std::cos(angle), std::sin(angle));
  // Rounding in the frame leaves |DF| eps-sized noise on flat stretches.
  const auto deriv = [&](double r) {
    const FieldSample s = field(r * nu);
    const Eigen::Vector2d d = s.jacobian * nu;
    const double m = s.value.norm();
    return m > 0.0 ? s.value.dot(d) / m : d.norm();
  };
  const auto noise = [&](double r) {
    return 64.0 * std::numeric_limits<double>::epsilon() * field(r * nu).jacobian.norm();
  };
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  MonotonicityReport rep;
  rep.samples = rs.size();
  rep.min_derivative = INFINITY;
  double prev = 0.0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    double d = deriv(rs[k]);
    if (std::abs(d) <= noise(rs[k])) d = 0.0;
    rep.min_derivative = std::min(rep.min_derivative, d);
    if (d < 0.0 && rep.monotone) {
      rep.monotone = false;
      if (k == 0 || !(prev >= 0.0)) {
        rep.sign_change_radius = rs[k];
      } else {
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(
            deriv, rs[k - 1], rs[k], prev, d, boost::math::tools::eps_tolerance<double>(52), iters);
        rep.sign_change_radius = 0.5 * (root.first + root.second);
      }
    }
    prev = d;
  }
  return rep;
}

double caccioppoli_constant(double lambda, double Lambda) {
  const double q = Lambda / lambda;
  return 4.0 * q * q;
}

EnergyRow caccioppoli_ratio(const Field& field, double R, double C, double rel_tol) {
  if (!(R >= 10.0)) throw InvalidParams("caccioppoli_ratio needs R >= 10");
  const LogCutoff cut{R};
  EnergyRow row;
  row.R = R;
  const auto grad2 = [&](const Eigen::Vector2d& x) { return field(x).jacobian.squaredNorm(); };
  row.energy_B1 = polar_integral(grad2, 0.0, 1.0, rel_tol);
  row.weighted_energy = row.energy_B1 + polar_integral(
                                            [&](const Eigen::Vector2d& x) {
                                              const double w = cut.value(x.norm());
                                              return grad2(x) * w * w;
                                            },
                                            1.0, R, rel_tol);
  row.cutoff_energy = cut.energy_closed();
  row.bound = C * polar_integral(
                      [&](const Eigen::Vector2d& x) {
                        const double s = cut.slope(x.norm());
                        return field(x).value.squaredNorm() * s * s;
                      },
                      1.0, R, rel_tol);
  row.ratio = row.bound > 0.0 ? row.energy_B1 / row.bound : (row.energy_B1 > 0.0 ? INFINITY : 0.0);
  row.inequality_holds = row.energy_B1 <= row.bound;
  return row;
}

EnergyReport caccioppoli_report(const Field& field, const std::vector<double>& Rs, double C) {
  EnergyReport rep;
  rep.C = C;
  for (const double R : Rs) rep.rows.push_back(caccioppoli_ratio(field, R, C));
  const double e = rep.rows.empty() ? caccioppoli_ratio(field, 10.0, C).energy_B1
                                    : rep.rows.front().energy_B1;
  rep.crossover_R = e > 0.0 ? std::exp(C * 2.0 * std::numbers::pi / e) : INFINITY;
  return rep;
}

FieldResidual field_residual(const RadialProfiles& p, const Field& field, const ResidualGrid& grid,
                             const std::vector<double>& steps) {
  FieldResidual out;
  out.steps = steps;
  out.max_residual.assign(steps.size(), 0.0);
  const double eps = p.epsilon();
  const auto flux = [&](const Eigen::Vector2d& y) {
    const Eigen::Vector4d g = tensor_cartesian(p, y) * vec(field(y).jacobian);
    Eigen::Matrix2d f;
    f << g(0), g(1), g(2), g(3);
    return f;
  };
  for (const double r : grid.radii) {
    for (const double th : grid.angles) {
      const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
      const FieldSample s = field(x);
      const Eigen::Vector2d drift = 0.5 * (s.jacobian * x + eps * s.value);
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const double res = (frame_divergence<2>(flux, x, steps[k]) - drift).norm();
        out.max_residual[k] = std::max(out.max_residual[k], res);
      }
    }
  }
  const bool exact = std::all_of(out.max_residual.begin(), out.max_residual.end(),
                                 [](double v) { return v == 0.0; });
  out.order = exact ? INFINITY : fitted_order(steps, out.max_residual);
  return out;
}

namespace {

std::vector<double> witness_radii(const RadialProfiles& p) {
  const double r0 = p.params().r0;
  std::vector<double> radii;
  for (int k = 0; k < 400; ++k) radii.push_back(1e-3 * std::pow(1e7 * r0, k / 399.0));
  const double a = p.window().start;
  const double b = p.window().deficit_end();
  for (int k = 0; k < 400; ++k) radii.push_back(a + (b - a) * (k + 0.5) / 400.0);
  std::sort(radii.begin(), radii.end());
  return radii;
}

}  // namespace

ReportSection liouville_witness(const RadialProfiles& p, const Field& field) {
  ReportSection sec;
  sec.name = "liouville_witness";
  const double r0 = p.params().r0;

  const FieldResidual res = field_residual(p, field, default_residual_grid(p));
  const bool exact = std::isinf(res.order);
  const bool solves = exact || (res.order >= 1.9 && res.max_residual.back() <= 1e-4);
  sec.data["residual"] = {{"steps", res.steps},
                          {"max_residual", res.max_residual},
                          {"order", exact ? Json(nullptr) : Json(res.order)},
                          {"exact", exact}};
  sec.check("solves_system", solves);

  const std::vector<double> radii = witness_radii(p);
  double sup = 0.0, max_grad = 0.0;
  std::vector<double> tail_r, tail_m;
  for (const double r : radii) {
    const FieldSample s = field(Eigen::Vector2d(r, 0.0));
    sup = std::max(sup, s.value.norm());
    max_grad = std::max(max_grad, s.jacobian.norm());
    if (r >= 10.0 * r0 && r <= 1e4 * r0 && s.value.norm() > 0.0) {
      tail_r.push_back(r);
      tail_m.push_back(s.value.norm());
    }
  }
  const double tail_slope = tail_r.size() >= 2 ? fitted_order(tail_r, tail_m) : 0.0;
  const bool bounded = std::isfinite(sup) && tail_slope <= 0.01;
  const bool nonconstant = max_grad > 1e-8;
  sec.data["sup_modulus"] = sup;
  sec.data["tail_log_slope"] = tail_slope;
  sec.data["max_gradient"] = max_grad;
  sec.check("bounded_nonconstant", bounded && nonconstant);

  const MonotonicityReport mono = monotonicity_scan(field, radii);
  sec.data["monotone"] = mono.monotone;
  sec.data["sign_change_radius"] =
      mono.sign_change_radius ? Json(*mono.sign_change_radius) : Json(nullptr);
  sec.check("not_radially_increasing", !mono.monotone);
  return sec;
}

ReportSection liouville_witness(const RadialProfiles& p) {
  ReportSection sec = liouville_witness(p, profile_field(p));
  const MaxPrinciple mp = max_principle_probe(p);
  const Json& sc = sec.data["sign_change_radius"];
  const double gap = sc.is_number() ? std::abs(sc.get<double>() - mp.r_star) : INFINITY;
  sec.data["phi_prime_root"] = mp.r_star;
  sec.data["root_gap"] = gap;
  sec.check("sign_change_at_root", gap <= 1e-8);

  const Field phi1 = radial_field([](double r) { return phi_inner(r); },
                                  [](double r) { return std::pow(1.0 + r * r, -1.5); });
  const EnergyReport er = caccioppoli_report(phi1, {1e2, 1e3, 1e4}, caccioppoli_constant(1.0, 1.0));
  Json rows = Json::array();
  for (const EnergyRow& row : er.rows) {
    rows.push_back({{"R", row.R},
                    {"energy_B1", row.energy_B1},
                    {"cutoff_energy", row.cutoff_energy},
                    {"bound", row.bound},
                    {"ratio", row.ratio},
                    {"holds", row.inequality_holds}});
  }
  sec.data["caccioppoli_phi1"] = {{"C", er.C}, {"rows", rows}, {"crossover_R", er.crossover_R}};
  return sec;
}

}  // namespace blowup
