#pragma once

#include <vector>

#include <Eigen/Dense>

#include "blowup/coefficients.hpp"
#include "blowup/profiles.hpp"
#include "blowup/report.hpp"

namespace blowup {

/// U = phi(r) nu with its gradient (row alpha = grad u^alpha) and the drift
/// DU x + eps U appearing on the right of the stationary system.
struct MapSample {
  Eigen::Vector2d U;
  Eigen::Matrix2d DU;
  Eigen::Vector2d drift;
};

MapSample U_eval(const RadialProfiles& p, const Eigen::Vector2d& x);

/// Row alpha of the result is the flux (A DU)^alpha at y. With
/// `with_coupling` false the eta blocks are dropped.
Eigen::Matrix2d stationary_flux(const RadialProfiles& p, const Eigen::Vector2d& y,
                                bool with_coupling = true);

/// div F at x from central differences along the local polar frame, which
/// keeps the stencil equivariant under rotations about the origin.
template <int M, typename Flux>
Eigen::Matrix<double, M, 1> frame_divergence(const Flux& flux, const Eigen::Vector2d& x,
                                             double step) {
  const FrameBasis b = frame_at(x);
  const Eigen::Matrix<double, M, 2> fp_nu = flux(Eigen::Vector2d(x + step * b.nu));
  const Eigen::Matrix<double, M, 2> fm_nu = flux(Eigen::Vector2d(x - step * b.nu));
  const Eigen::Matrix<double, M, 2> fp_tau = flux(Eigen::Vector2d(x + step * b.tau));
  const Eigen::Matrix<double, M, 2> fm_tau = flux(Eigen::Vector2d(x - step * b.tau));
  return ((fp_nu - fm_nu) * b.nu + (fp_tau - fm_tau) * b.tau) / (2.0 * step);
}

struct ResidualSample {
  Eigen::Vector2d x;
  Eigen::Vector2d residual;
  double scheme_step = 0.0;
};

/// div(A DU) - (DU x + eps U) / 2 on a 5-point stencil of spacing `step`.
/// Throws OriginFrame if x lies within `step` of the origin.
ResidualSample elliptic_residual(const RadialProfiles& p, const Eigen::Vector2d& x, double step,
                                 bool with_coupling = true);

struct ResidualGrid {
  std::vector<double> radii;
  std::vector<double> angles;
};

/// 64 radii (32 log-spaced on [1, 10 r0] plus 32 in the transition region,
/// 8 of those inside the unit gluing windows) times 16 angles.
ResidualGrid default_residual_grid(const RadialProfiles& p, int n_log = 32, int n_window = 32,
                                   int n_angles = 16);

/// Least-squares slope of log(value) against log(step).
double fitted_order(const std::vector<double>& steps, const std::vector<double>& values);

/// Max residual per step and fitted orders, overall and split into points
/// inside the unit gluing windows of f and h versus the rest; also the
/// decoupled-probe identity at a fine step.
ReportSection residual_convergence(const RadialProfiles& p, const ResidualGrid& grid,
                                   const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3},
                                   double max_residual_bound = 1e-4, double min_order = 1.9);

/// Log-log slopes of |DU| and |DU x + eps U| over |x| in [10 r0, 1e4 r0],
/// plus the sup of |DU| |x| and |DU x + eps U| |x|^2 on [1, 100 r0].
ReportSection decay_audit(const RadialProfiles& p, double slope_tol = 0.05);

struct MaxPrinciple {
  double r_star = 0.0;
  double deficit_at_root = 0.0;
  double eta_jump = 0.0;  // eta(r* + delta) - eta(r* - delta)
};

/// Root of phi' on the phi gluing window by bisection. Throws RootNotBracketed
/// when phi' keeps its sign there.
MaxPrinciple max_principle_probe(const RadialProfiles& p);

/// Measured constants of the displayed profile estimates. Each passes when
/// the constant stays below `constant_cap` (the estimates hold with a
/// universal constant, which is what a single cap across r0 checks).
ReportSection profile_estimate_audit(const RadialProfiles& p, double constant_cap = 100.0);

}  // namespace blowup
