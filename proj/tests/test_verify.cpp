#include <cmath>

#include <doctest.h>

#include "blowup/errors.hpp"
#include "blowup/suite.hpp"
#include "blowup/verify.hpp"

using namespace blowup;

TEST_CASE("fitted order of an exact power law") {
  const std::vector<double> h = {1e-2, 5e-3, 2.5e-3};
  std::vector<double> v;
  for (double x : h) v.push_back(3.0 * x * x);
  CHECK(fitted_order(h, v) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("residual converges at second order") {
  for (const Variant var : {Variant::bounded, Variant::unbounded}) {
    const RadialProfiles p(ConstructionParams::make(var, 50.0));
    const ReportSection s = residual_convergence(p, default_residual_grid(p, 16, 16, 4));
    CHECK(s.pass);
    CHECK(s.data["order"].get<double>() >= 1.9);
  }
}

TEST_CASE("the uncoupled system leaves exactly the deficit") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  for (double r : {130.0, 170.0}) {
    const Eigen::Vector2d x(r * std::cos(0.4), r * std::sin(0.4));
    const ResidualSample s = elliptic_residual(p, x, 1e-2, false);
    const Eigen::Vector2d expected = -p.deficit(r) * x / r;
    CAPTURE(r);
    CHECK((s.residual - expected).norm() <= 1e-6 * (1.0 + std::abs(p.deficit(r))));
  }
}

TEST_CASE("residual refuses the origin") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  CHECK_THROWS_AS(elliptic_residual(p, Eigen::Vector2d(1e-3, 0.0), 1e-2), OriginFrame);
}

TEST_CASE("decay audit and maximum principle probe") {
  for (double r0 : {50.0, 100.0, 200.0}) {
    const RadialProfiles p(ConstructionParams::make(Variant::unbounded, r0));
    CHECK(decay_audit(p).pass);
    const MaxPrinciple mp = max_principle_probe(p);
    CHECK(mp.r_star > r0);
    CHECK(mp.r_star < 2.0 * r0);
    CHECK(mp.deficit_at_root > 0.0);
    CHECK(std::abs(p.phi(mp.r_star, 1)) <= 1e-12);
  }
}

TEST_CASE("suite section selection") {
  const auto params = ConstructionParams::make(Variant::unbounded, 100.0);
  CHECK_THROWS_AS(run_verify_suite(params, {"quasilinear_consistency"}, 1), InvalidParams);
  CHECK_THROWS_AS(run_verify_suite(params, {"nonsense"}, 1), InvalidParams);
  const SuiteResult r = run_verify_suite(params, {"max_principle", "decay"}, 1);
  REQUIRE(r.sections.size() == 2);
  CHECK(r.sections[0].name == "decay");
  CHECK(r.sections[1].name == "max_principle");
  CHECK(r.pass);
}

TEST_CASE("estimate audit passes under the universal cap") {
  for (const Variant v : {Variant::bounded, Variant::unbounded}) {
    CHECK(profile_estimate_audit(RadialProfiles(ConstructionParams::make(v, 100.0))).pass);
  }
}
