#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "blowup/coefficients.hpp"

using namespace blowup;

namespace {

Eigen::Matrix2d rotation(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

TEST_CASE("closed spectrum matches a numeric eigensolver") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  for (double r : {0.5, 99.0, 150.0, 180.0, 201.5, 1000.0}) {
    const Eigen::Vector4d closed = spectrum_closed(p, r);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(assemble_rotated(p, r));
    const double scale = std::max(1.0, closed.cwiseAbs().maxCoeff());
    CAPTURE(r);
    CHECK((es.eigenvalues() - closed).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    Eigen::Vector2d x(r * std::cos(1.1), r * std::sin(1.1));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> ec(tensor_cartesian(p, x));
    CHECK((ec.eigenvalues() - closed).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("characteristic polynomial factors as a square") {
  const RadialProfiles p(ConstructionParams::make(Variant::unbounded, 50.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double r : {60.0, 75.0, 90.0}) {
    const double f = p.f(r), h = p.h(r), e = p.eta(r);
    const Eigen::Matrix4d a = assemble_rotated(p, r);
    for (int k = 0; k < 5; ++k) {
      const double lam = u(rng);
      const double lhs = (lam * Eigen::Matrix4d::Identity() - a).determinant();
      const double q = (lam - f) * (lam - h) - e * e;
      CHECK(lhs == doctest::Approx(q * q).epsilon(1e-9));
    }
  }
}

TEST_CASE("Cartesian tensor is symmetric and rotation equivariant") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 50.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), rad(0.0, 200.0), ang(0.0, 6.283);
  for (int k = 0; k < 100; ++k) {
    const double r = rad(rng), t = ang(rng), a = ang(rng);
    const Eigen::Vector2d x(r * std::cos(t), r * std::sin(t));
    const Eigen::Matrix4d A = tensor_cartesian(p, x);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * A.norm());
    Eigen::Matrix2d P;
    P << u(rng), u(rng), u(rng), u(rng);
    const Eigen::Matrix2d R = rotation(a);
    const double q0 = quadratic_form(A, P);
    const double q1 = quadratic_form(tensor_cartesian(p, R * x), R * P * R.transpose());
    CHECK(q1 == doctest::Approx(q0).epsilon(1e-9).scale(A.norm()));
  }
  CHECK((tensor_cartesian(p, Eigen::Vector2d::Zero()) - 0.5 * Eigen::Matrix4d::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
}

TEST_CASE("ellipticity scan at r0 = 100") {
  for (const Variant v : {Variant::bounded, Variant::unbounded}) {
    const RadialProfiles p(ConstructionParams::make(v, 100.0));
    const EllipticityReport e = ellipticity_scan(p, default_scan_radii(p, 400, 400), 0.25, 5, 50);
    CHECK(e.pass);
    CHECK(e.lambda_min >= 0.49);
    CHECK(e.min_det_ratio > 0.0);
    CHECK(e.form_violation == 0.0);
    CHECK(e.margin == doctest::Approx(e.lambda_min - 0.25));
  }
}

TEST_CASE("quadratic forms sit inside the pointwise spectrum") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (double r : {10.0, 150.0, 190.0, 400.0}) {
    const Eigen::Vector4d l = spectrum_closed(p, r);
    const Eigen::Matrix4d a = tensor_cartesian(p, Eigen::Vector2d(0.0, r));
    for (int k = 0; k < 50; ++k) {
      Eigen::Matrix2d P;
      P << g(rng), g(rng), g(rng), g(rng);
      const double q = quadratic_form(a, P), n2 = P.squaredNorm();
      CHECK(q >= l[0] * n2 * (1 - 1e-12));
      CHECK(q <= l[3] * n2 * (1 + 1e-12));
    }
  }
}

TEST_CASE("small r0 still yields a report") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 10.0));
  const EllipticityReport e = ellipticity_scan(p, default_scan_radii(p, 200, 200), 0.25, 1, 10);
  CHECK(e.n_radii == 400);
  CHECK(std::isfinite(e.lambda_min));
}
