#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "blowup/profiles.hpp"

namespace blowup {

/// Polar frame at a point away from the origin.
struct FrameBasis {
  Eigen::Vector2d nu;
  Eigen::Vector2d tau;  // nu rotated counterclockwise by pi/2
  double r = 0.0;
};

/// Throws OriginFrame at x = 0.
FrameBasis frame_at(const Eigen::Vector2d& x);

/// J = [[0, 1], [-1, 0]], the generator of the coupling block.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation_generator() {
  Eigen::Matrix<Scalar, 2, 2> j;
  j << Scalar(0), Scalar(1), Scalar(-1), Scalar(0);
  return j;
}

/// The frame matrix in coordinates c = (p1.nu, p1.tau, p2.nu, p2.tau):
/// [[f,0,0,eta],[0,h,-eta,0],[0,-eta,f,0],[eta,0,0,h]].
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> rotated_block(Scalar f, Scalar h, Scalar eta) {
  Eigen::Matrix<Scalar, 4, 4> a = Eigen::Matrix<Scalar, 4, 4>::Zero();
  a.diagonal() << f, h, f, h;
  a(0, 3) = a(3, 0) = eta;
  a(1, 2) = a(2, 1) = -eta;
  return a;
}

/// Cartesian coefficient matrix on vec(P) = (p1_x, p1_y, p2_x, p2_y), where
/// row alpha of P is the gradient of component alpha: [[M, eta J], [-eta J, M]].
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> cartesian_block(const Eigen::Matrix<Scalar, 2, 2>& m, Scalar eta) {
  Eigen::Matrix<Scalar, 4, 4> a;
  const Eigen::Matrix<Scalar, 2, 2> j = rotation_generator<Scalar>();
  a << m, eta * j, -eta * j, m;
  return a;
}

/// f nu nu + h tau tau; inside the inner region 1/2 I + beta(r) x x, which is
/// also the form used at the origin.
Eigen::Matrix2d scalar_block_M(const RadialProfiles& p, const Eigen::Vector2d& x);

Eigen::Matrix4d assemble_rotated(const RadialProfiles& p, double r);

/// Coefficients a^{ij}_{alpha beta}(x) as a symmetric 4x4 matrix on vec(P).
Eigen::Matrix4d tensor_cartesian(const RadialProfiles& p, const Eigen::Vector2d& x);

/// Quadratic form a^{ij}_{alpha beta} p^alpha_i p^beta_j; P rows are component gradients.
double quadratic_form(const Eigen::Matrix4d& a, const Eigen::Matrix2d& grad);

inline Eigen::Vector4d vec(const Eigen::Matrix2d& grad) {
  return Eigen::Vector4d(grad(0, 0), grad(0, 1), grad(1, 0), grad(1, 1));
}

/// Ascending eigenvalues (f+h)/2 -+ sqrt(((f-h)/2)^2 + eta^2), each twice.
Eigen::Vector4d spectrum_closed(const RadialProfiles& p, double r);

struct EllipticityReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double worst_radius = 0.0;
  double threshold = 0.25;
  double margin = 0.0;  // lambda_min - threshold
  /// min over radii of (f h - eta^2) / (f h); positive iff the block determinant is.
  double min_det_ratio = 0.0;
  /// Largest relative excursion of sampled quadratic forms outside
  /// [lambda_min, lambda_max] |P|^2; zero when the scan is consistent.
  double form_violation = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_radii = 0;
  bool pass = false;
};

/// Log-spaced radii on [1e-3, 10 r0] plus a uniform refinement of the
/// transition region [start, start + width + 1].
std::vector<double> default_scan_radii(const RadialProfiles& p, std::size_t n_log = 2000,
                                       std::size_t n_window = 2000);

/// Spectral scan of the frame matrix with random quadratic-form sampling
/// (`form_samples` unit gradient matrices per radius from `seed`).
EllipticityReport ellipticity_scan(const RadialProfiles& p, const std::vector<double>& radii,
                                   double threshold = 0.25, std::uint64_t seed = 20240611,
                                   int form_samples = 1000);

}  // namespace blowup
