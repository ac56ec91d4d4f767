#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "blowup/profiles.hpp"
#include "blowup/report.hpp"
#include "blowup/verify.hpp"

namespace blowup {

/// psi = 1 on B_1, 1 - log r / log R on [1, R], 0 beyond.
struct LogCutoff {
  double R;

  double value(double r) const;
  /// d psi / dr.
  double slope(double r) const;
  /// int |grad psi|^2 = 2 pi / log R.
  double energy_closed() const;
  /// Same by quadrature on a polar grid with log-spaced radii.
  double energy_quadrature(double rel_tol = 1e-12) const;
};

struct FieldSample {
  Eigen::Vector2d value;
  Eigen::Matrix2d jacobian;  // row alpha = grad of component alpha
};

using Field = std::function<FieldSample(const Eigen::Vector2d&)>;

/// g(r) nu with its gradient.
Field radial_field(std::function<double(double)> g, std::function<double(double)> dg);
/// U = phi nu of the construction.
Field profile_field(const RadialProfiles& p);
/// phi replaced by its running maximum beyond r_star: radially increasing,
/// no longer a solution.
Field clamped_profile_field(const RadialProfiles& p, double r_star);
Field constant_field(const Eigen::Vector2d& c);

struct MonotonicityReport {
  bool monotone = true;
  /// First radius where d|F|/dr turns negative, refined to machine precision.
  std::optional<double> sign_change_radius;
  double min_derivative = 0.0;
  std::size_t samples = 0;
};

/// d|F|/dr along a ray from the analytic Jacobian.
MonotonicityReport monotonicity_scan(const Field& field, const std::vector<double>& radii,
                                     double angle = 0.3);

struct EnergyRow {
  double R = 0.0;
  double energy_B1 = 0.0;        // int_{B_1} |DF|^2
  double weighted_energy = 0.0;  // int |DF|^2 psi^2
  double cutoff_energy = 0.0;    // 2 pi / log R
  double bound = 0.0;            // C int |F|^2 |grad psi|^2
  double ratio = 0.0;            // energy_B1 / bound
  bool inequality_holds = false;
};

struct EnergyReport {
  double C = 0.0;
  std::vector<EnergyRow> rows;
  /// R beyond which int_{B_1}|DF|^2 <= C 2 pi / log R must fail for |F| <= 1.
  double crossover_R = 0.0;
};

/// Caccioppoli constant 4 (Lambda / lambda)^2 for ellipticity bounds lambda, Lambda.
double caccioppoli_constant(double lambda, double Lambda);

/// Throws InvalidParams for R < 10 and QuadratureFailure from the integrals.
EnergyRow caccioppoli_ratio(const Field& field, double R, double C, double rel_tol = 1e-10);
EnergyReport caccioppoli_report(const Field& field, const std::vector<double>& Rs, double C);

/// max over a grid of |div(A DF) - (DF x + eps F)/2| for the construction's
/// coefficients and any field, with the fitted order.
struct FieldResidual {
  std::vector<double> steps;
  std::vector<double> max_residual;
  double order = 0.0;
};
FieldResidual field_residual(const RadialProfiles& p, const Field& field, const ResidualGrid& grid,
                             const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3});

/// (a) F solves the system (order >= 1.9, finest residual <= 1e-4),
/// (b) F is bounded and non-constant, (c) |F| is not radially increasing.
ReportSection liouville_witness(const RadialProfiles& p, const Field& field);
/// The witness for U, plus agreement of the sign change with the root of phi'.
ReportSection liouville_witness(const RadialProfiles& p);

}  // namespace blowup
