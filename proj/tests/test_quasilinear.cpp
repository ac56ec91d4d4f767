#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "blowup/errors.hpp"
#include "blowup/quasilinear.hpp"

using namespace blowup;

namespace {

const PairedProfiles& pair50() {
  static const PairedProfiles pp = paired_profiles(ConstructionParams::make(Variant::bounded, 50.0));
  return pp;
}

}  // namespace

TEST_CASE("paired profiles need the bounded variant") {
  CHECK_THROWS_AS(paired_profiles(ConstructionParams::make(Variant::unbounded, 50.0)),
                  InvalidParams);
  CHECK_THROWS_AS(gamma_build(pair50(), 1000), InvalidParams);
}

TEST_CASE("state functions reproduce the radial coefficients on the curve") {
  const PairedProfiles& pp = pair50();
  const StateCoefficients c(pp);
  for (double r : {0.5, 20.0, 50.5, 75.0, 99.0, 120.0, 160.0, 175.0, 199.0, 260.0}) {
    const GammaValues g = coefficients_on_gamma(c, r);
    CAPTURE(r);
    CHECK(g.F == doctest::Approx(pp.base.f(r)).epsilon(1e-8));
    CHECK(g.H == doctest::Approx(pp.base.h(r)).epsilon(1e-8));
    CHECK(g.N == doctest::Approx(pp.base.eta(r)).epsilon(1e-8).scale(1.0));
    CHECK(g.F_tilde == doctest::Approx(pp.tilde.f(r)).epsilon(1e-8));
    CHECK(g.H_tilde == doctest::Approx(pp.tilde.h(r)).epsilon(1e-8));
    CHECK(g.N_tilde == doctest::Approx(pp.tilde.eta(r)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("state functions: parity and support") {
  const StateCoefficients c(pair50());
  for (double s : {0.1, 0.5, 0.9, 0.999}) {
    CHECK(c.F(s) == c.F(-s));
    CHECK(c.F_tilde(s) == c.F_tilde(-s));
  }
  const double far = 1.0 - 2.0 * c.delta_bar();
  CHECK(c.N(far, 1.0) == 0.0);
  CHECK(c.H(far, far) == 0.5);
  CHECK(c.N_tilde(1.0, far) == 0.0);
}

TEST_CASE("A(W(x)) matches the paired coefficients") {
  const PairedProfiles& pp = pair50();
  const StateCoefficients c(pp);
  for (double r : {3.0, 60.0, 110.0, 170.0, 400.0}) {
    const Eigen::Vector2d x(r * std::cos(2.0), r * std::sin(2.0));
    const WSample<quad> w = W_eval<quad>(pp, x);
    const Eigen::Matrix<quad, 2, 1> p = w.W.template head<2>(), q = w.W.template tail<2>();
    const Eigen::Matrix<double, 8, 8> a = A_of_state<quad>(c, p, q);
    const Eigen::Matrix<double, 8, 8> a0 = A0_tensor(pp, x);
    CAPTURE(r);
    CHECK((a - a0).norm() <= 1e-8 * std::max(1.0, a0.norm()));
  }
}

TEST_CASE("A(state) is symmetric and elliptic on random states") {
  const StateCoefficients c(pair50());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Vector2d p(u(rng), u(rng)), q(u(rng), u(rng));
    const Eigen::Matrix<double, 8, 8> a = A_of_state<double>(c, p, q);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(a, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()[0] > 0.25);
  }
}

TEST_CASE("reduced consistency check passes") {
  const PairedProfiles& pp = pair50();
  const StateCoefficients c(pp);
  ConsistencyOptions opt;
  opt.n_radii = 512;
  opt.n_angles = 4;
  opt.n_random_states = 1000;
  const ReportSection s = consistency_check(c, gamma_build(pp, 2048), opt);
  CHECK(s.pass);
  CHECK(s.data["max_gap"].get<double>() <= 1e-8);
}
