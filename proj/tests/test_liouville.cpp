#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "blowup/errors.hpp"
#include "blowup/liouville.hpp"
#include "blowup/verify.hpp"

using namespace blowup;
using boost::math::quadrature::gauss_kronrod;

TEST_CASE("log cutoff energy") {
  for (double R : {1e2, 1e3, 1e4}) {
    const LogCutoff c{R};
    CHECK(c.energy_closed() == doctest::Approx(2.0 * std::numbers::pi / std::log(R)).epsilon(1e-15));
    CHECK(std::abs(c.energy_quadrature() - c.energy_closed()) <= 1e-8);
    CHECK(c.value(0.5) == 1.0);
    CHECK(c.value(2.0 * R) == 0.0);
    const double r = std::sqrt(R), h = 1e-5;
    CHECK(c.slope(r) == doctest::Approx((c.value(r + h) - c.value(r - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("Caccioppoli constant and energy of phi_1 nu") {
  CHECK(caccioppoli_constant(1.0, 1.0) == 4.0);
  CHECK(caccioppoli_constant(0.5, 2.0) == 64.0);
  const Field f = radial_field([](double r) { return r / std::sqrt(1 + r * r); },
                               [](double r) { return std::pow(1 + r * r, -1.5); });
  // 2 pi int_0^1 (phi'^2 + phi^2 / r^2) r dr
  auto density = [](double r) {
    const double q = 1 + r * r;
    return (1.0 / (q * q * q) + 1.0 / q) * r;
  };
  const double oracle =
      2.0 * std::numbers::pi * gauss_kronrod<double, 61>::integrate(density, 0.0, 1.0, 15, 1e-14);
  const EnergyRow row = caccioppoli_ratio(f, 100.0, 4.0);
  CHECK(row.energy_B1 == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(row.cutoff_energy == doctest::Approx(2.0 * std::numbers::pi / std::log(100.0)));
  CHECK(row.weighted_energy >= row.energy_B1);
  CHECK_THROWS_AS(caccioppoli_ratio(f, 5.0, 4.0), InvalidParams);
}

TEST_CASE("monotone field has no sign change") {
  const Field f = radial_field([](double r) { return std::tanh(r); },
                               [](double r) { return 1.0 / (std::cosh(r) * std::cosh(r)); });
  std::vector<double> radii;
  for (int i = 1; i <= 200; ++i) radii.push_back(0.1 * i);
  const MonotonicityReport m = monotonicity_scan(f, radii);
  CHECK(m.monotone);
  CHECK_FALSE(m.sign_change_radius.has_value());
}

TEST_CASE("witness for the construction") {
  for (double r0 : {50.0, 100.0}) {
    const RadialProfiles p(ConstructionParams::make(Variant::bounded, r0));
    const ReportSection s = liouville_witness(p);
    CHECK(s.pass);
    const MaxPrinciple mp = max_principle_probe(p);
    const MonotonicityReport m = monotonicity_scan(profile_field(p), {0.5 * r0, r0, 1.5 * r0, 3 * r0});
    REQUIRE(m.sign_change_radius.has_value());
    CHECK(std::abs(*m.sign_change_radius - mp.r_star) <= 1e-8);
  }
}

TEST_CASE("clamped and constant fields fail the right prongs") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 50.0));
  const MaxPrinciple mp = max_principle_probe(p);
  const ReportSection clamped = liouville_witness(p, clamped_profile_field(p, mp.r_star));
  CHECK_FALSE(clamped.pass);
  CHECK_FALSE(clamped.data["checks"]["solves_system"].get<bool>());
  CHECK(clamped.data["checks"]["bounded_nonconstant"].get<bool>());
  CHECK_FALSE(clamped.data["checks"]["not_radially_increasing"].get<bool>());

  const ReportSection constant = liouville_witness(p, constant_field(Eigen::Vector2d(0.3, -0.2)));
  CHECK_FALSE(constant.pass);
  CHECK_FALSE(constant.data["checks"]["bounded_nonconstant"].get<bool>());
}
