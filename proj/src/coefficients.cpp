#include "blowup/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"

namespace blowup {

FrameBasis frame_at(const Eigen::Vector2d& x) {
  const double r = x.norm();
  if (r == 0.0) throw OriginFrame("polar frame requested at the origin");
  FrameBasis b;
  b.r = r;
  b.nu = x / r;
  b.tau = Eigen::Vector2d(-b.nu.y(), b.nu.x());
  return b;
}

Eigen::Matrix2d scalar_block_M(const RadialProfiles& p, const Eigen::Vector2d& x) {
  const double r = x.norm();
  if (r < p.window().start) {
    return 0.5 * Eigen::Matrix2d::Identity() + p.beta(r) * x * x.transpose();
  }
  const FrameBasis b = frame_at(x);
  return p.f(r) * b.nu * b.nu.transpose() + p.h(r) * b.tau * b.tau.transpose();
}

Eigen::Matrix4d assemble_rotated(const RadialProfiles& p, double r) {
  return rotated_block(p.f(r), p.h(r), p.eta(r));
}

Eigen::Matrix4d tensor_cartesian(const RadialProfiles& p, const Eigen::Vector2d& x) {
  const double r = x.norm();
  const double eta = r <= p.window().start ? 0.0 : p.eta(r);
  return cartesian_block<double>(scalar_block_M(p, x), eta);
}

double quadratic_form(const Eigen::Matrix4d& a, const Eigen::Matrix2d& grad) {
  const Eigen::Vector4d v = vec(grad);
  return v.dot(a * v);
}

Eigen::Vector4d spectrum_closed(const RadialProfiles& p, double r) {
  const double f = p.f(r);
  const double h = p.h(r);
  const double eta = p.eta(r);
  const double mid = 0.5 * (f + h);
  const double rad = std::hypot(0.5 * (f - h), eta);
  return Eigen::Vector4d(mid - rad, mid - rad, mid + rad, mid + rad);
}

std::vector<double> default_scan_radii(const RadialProfiles& p, std::size_t n_log,
                                       std::size_t n_window) {
  const double r0 = p.params().r0;
  std::vector<double> radii;
  radii.reserve(n_log + n_window);
  const double lo = std::log(1e-3);
  const double hi = std::log(10.0 * r0);
  for (std::size_t k = 0; k < n_log; ++k) {
    radii.push_back(std::exp(lo + (hi - lo) * double(k) / double(n_log - 1)));
  }
  const double a = p.window().start;
  const double b = p.window().deficit_end();
  for (std::size_t k = 0; k < n_window; ++k) {
    radii.push_back(a + (b - a) * double(k) / double(n_window - 1));
  }
  std::sort(radii.begin(), radii.end());
  return radii;
}

namespace {

struct RadiusScan {
  double lo = 0.0;
  double hi = 0.0;
  double det_ratio = 0.0;
  double qmin = 0.0;  // min over samples of Q / |P|^2
  double qmax = 0.0;
};

}  // namespace

EllipticityReport ellipticity_scan(const RadialProfiles& p, const std::vector<double>& radii,
                                   double threshold, std::uint64_t seed, int form_samples) {
  std::vector<RadiusScan> rows(radii.size());
  parallel_for(radii.size(), [&](std::size_t k) {
    const double r = radii[k];
    const Eigen::Vector4d spec = spectrum_closed(p, r);
    const double f = p.f(r);
    const double h = p.h(r);
    const double eta = p.eta(r);
    RadiusScan row;
    row.lo = spec(0);
    row.hi = spec(3);
    row.det_ratio = (f * h - eta * eta) / (f * h);
    // Each radius gets its own stream so results do not depend on scheduling.
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * (k + 1));
    std::normal_distribution<double> gauss;
    const double theta = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const Eigen::Matrix4d a =
        tensor_cartesian(p, Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta)));
    row.qmin = INFINITY;
    row.qmax = -INFINITY;
    for (int s = 0; s < form_samples; ++s) {
      Eigen::Vector4d v(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
      v.normalize();
      const double q = v.dot(a * v);
      row.qmin = std::min(row.qmin, q);
      row.qmax = std::max(row.qmax, q);
    }
    rows[k] = row;
  });

  EllipticityReport rep;
  rep.threshold = threshold;
  rep.seed = seed;
  rep.n_radii = radii.size();
  rep.lambda_min = INFINITY;
  rep.lambda_max = -INFINITY;
  rep.min_det_ratio = INFINITY;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].lo < rep.lambda_min) {
      rep.lambda_min = rows[k].lo;
      rep.worst_radius = radii[k];
    }
    rep.lambda_max = std::max(rep.lambda_max, rows[k].hi);
    rep.min_det_ratio = std::min(rep.min_det_ratio, rows[k].det_ratio);
  }
  for (const auto& row : rows) {
    const double scale = std::max(1.0, rep.lambda_max);
    rep.form_violation = std::max(rep.form_violation, (rep.lambda_min - row.qmin) / scale);
    rep.form_violation = std::max(rep.form_violation, (row.qmax - rep.lambda_max) / scale);
  }
  rep.form_violation = std::max(rep.form_violation, 0.0);
  rep.margin = rep.lambda_min - threshold;
  rep.pass = rep.lambda_min > 0.0 && rep.margin >= 0.0 && rep.min_det_ratio > 0.0 &&
             rep.form_violation <= 1e-12;
  return rep;
}

}  // namespace blowup
