#include <cmath>
#include <functional>
#include <random>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "blowup/cutoff.hpp"
#include "blowup/errors.hpp"
#include "blowup/profiles.hpp"

using namespace blowup;
using boost::math::quadrature::gauss_kronrod;

namespace {

// f from r phi1' f = int_0^r [s^2 phi1'/2 + eps s phi1/2 + phi1/(2s)] ds.
double f_oracle(double r, double eps) {
  auto integrand = [eps](double s) {
    const double q = 1.0 + s * s;
    const double dphi = 1.0 / (q * std::sqrt(q));
    return 0.5 * s * s * dphi + 0.5 * eps * s * s / std::sqrt(q) + 0.5 / std::sqrt(q);
  };
  const double I = gauss_kronrod<double, 61>::integrate(integrand, 0.0, r, 12, 1e-14);
  const double q = 1.0 + r * r;
  return I * q * std::sqrt(q) / r;
}

double central(auto&& fn, double r, double h) { return (fn(r + h) - fn(r - h)) / (2.0 * h); }

}  // namespace

TEST_CASE("params reject small r0 and fix epsilon") {
  CHECK_THROWS_AS(ConstructionParams::make(Variant::bounded, 5.0), InvalidParams);
  CHECK_THROWS_AS(ConstructionParams::make(Variant::bounded, 100.0, 0.0), InvalidParams);
  CHECK(ConstructionParams::make(Variant::bounded, 100.0).epsilon == 0.0);
  const auto u = ConstructionParams::make(Variant::unbounded, 100.0);
  CHECK(u.epsilon == doctest::Approx(1.0 / (1e4 * std::log(100.0))).epsilon(1e-15));
  CHECK(parse_variant("unbounded") == Variant::unbounded);
  CHECK_THROWS_AS(parse_variant("sideways"), InvalidParams);
}

TEST_CASE("cutoff is a monotone smooth step") {
  CHECK(cutoff_xi(-0.5) == 1.0);
  CHECK(cutoff_xi(1.5) == 0.0);
  double prev = 1.0;
  for (int i = 1; i <= 200; ++i) {
    const double s = i / 200.0;
    const double v = cutoff_xi(s);
    CHECK(v <= prev);
    prev = v;
    CHECK(cutoff_xi(s, 1) <= 0.0);
    CHECK(cutoff_xi(s) + cutoff_xi(1.0 - s) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("f0 closed form against quadrature of its integral") {
  for (double r : {1e-3, 5e-3, 2e-2, 0.1, 1.0, 3.7, 10.0, 100.0, 1000.0}) {
    CAPTURE(r);
    CHECK(f0_closed(r) == doctest::Approx(f_oracle(r, 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("unbounded f0 against quadrature") {
  const double eps = 1.0 / (50.0 * 50.0 * std::log(50.0));
  for (double r : {1e-3, 0.5, 7.0, 49.0}) {
    CAPTURE(r);
    CHECK(f0_jet<0>(r, eps, 1e-2).value() == doctest::Approx(f_oracle(r, eps)).epsilon(1e-12));
  }
}

TEST_CASE("profile derivatives match finite differences") {
  for (const Variant v : {Variant::bounded, Variant::unbounded}) {
    const RadialProfiles p(ConstructionParams::make(v, 50.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 160.0);
    for (int i = 0; i < 200; ++i) {
      const double r = u(rng);
      const double h = 1e-4 * std::max(1.0, r / 50.0);
      CAPTURE(r);
      auto near = [](double a, double b) { return std::abs(a - b) <= 1e-6 * (1.0 + std::abs(b)); };
      CHECK(near(p.phi(r, 1), central([&](double x) { return p.phi(x); }, r, h)));
      CHECK(near(p.phi(r, 2), central([&](double x) { return p.phi(x, 1); }, r, h)));
      CHECK(near(p.phi(r, 3), central([&](double x) { return p.phi(x, 2); }, r, h)));
      CHECK(std::abs(p.f(r, 1) - central([&](double x) { return p.f(x); }, r, h)) <=
            1e-6 * (1.0 + p.f(r)));
      CHECK(near(p.h(r, 1), central([&](double x) { return p.h(x); }, r, h)));
      CHECK(near(p.eta(r, 1), central([&](double x) { return p.eta(x); }, r, h)));
      CHECK(near(p.deficit_jet(r)[1], central([&](double x) { return p.deficit(x); }, r, h)));
    }
  }
}

TEST_CASE("deficit equals the equation evaluated by differences") {
  const RadialProfiles p(ConstructionParams::make(Variant::unbounded, 50.0));
  const double eps = p.epsilon();
  for (double r : {0.7, 20.0, 55.0, 75.0, 99.5, 100.6, 300.0}) {
    const double h = 1e-4;
    auto flux = [&](double x) { return x * p.phi(x, 1) * p.f(x); };
    const double e = 0.5 * (r * p.phi(r, 1) + eps * p.phi(r)) + p.h(r) * p.phi(r) / (r * r) -
                     central(flux, r, h) / r;
    CAPTURE(r);
    CHECK(std::abs(p.deficit(r) - e) <= 1e-7 * (1.0 + std::abs(p.f(r))));
  }
}

TEST_CASE("deficit vanishes outside the window") {
  for (const Variant v : {Variant::bounded, Variant::unbounded}) {
    const RadialProfiles p(ConstructionParams::make(v, 100.0));
    for (int i = 0; i < 2000; ++i) {
      const double r = std::exp(std::log(1e-3) + (std::log(1e4) - std::log(1e-3)) * i / 1999.0);
      if (r >= 100.0 && r <= 201.0) continue;
      CAPTURE(r);
      CHECK(std::abs(p.deficit(r)) <= 1e-10);
    }
  }
}

TEST_CASE("eta against independent quadrature of t E / phi") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  auto g = [&](double t) { return t * p.deficit(t) / p.phi(t); };
  const double knots[] = {100.0, 101.0, 200.0, 201.0};
  for (double r : {130.0, 150.0, 180.5, 201.0, 500.0}) {
    double I = 0.0;
    for (int k = 0; k + 1 < 4; ++k) {
      const double a = knots[k], b = std::min(r, knots[k + 1]);
      if (b > a) I += gauss_kronrod<double, 61>::integrate(g, a, b, 12, 1e-14);
    }
    CAPTURE(r);
    CHECK(p.eta(r) == doctest::Approx(I).epsilon(1e-10));
  }
  CHECK(p.eta(50.0) == 0.0);
  CHECK(p.eta(1e4) == p.eta_tail());
}

TEST_CASE("parity at the origin: phi odd, f and h even") {
  const RadialProfiles p(ConstructionParams::make(Variant::unbounded, 100.0));
  for (double r : {1e-4, 1e-3}) {
    CHECK(std::abs(p.phi(r, 2)) <= 10.0 * r);
    CHECK(std::abs(p.f(r, 1)) <= 10.0 * r);
    CHECK(std::abs(p.h(r, 1)) <= 10.0 * r);
  }
  CHECK(p.phi(1e-8) == doctest::Approx(1e-8).epsilon(1e-12));
  CHECK(p.f(1e-8) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.beta(1e-6) == doctest::Approx(p.beta(2e-6)).epsilon(1e-9));
}

TEST_CASE("quad evaluation agrees with double") {
  const RadialProfiles p(ConstructionParams::make(Variant::bounded, 100.0));
  for (double r : {0.3, 120.0, 150.0, 250.0}) {
    CHECK(value_of(p.phi_value<quad>(quad(r))) == doctest::Approx(p.phi(r)).epsilon(1e-15));
  }
}

TEST_CASE("f estimate between R^2 log R and 2 R^2 log R") {
  for (double R = 100.0; R <= 1000.0; R += 37.0) {
    const double L = R * R * std::log(R);
    CHECK(f0_closed(R) >= L);
    CHECK(f0_closed(R) <= 2.0 * L);
  }
}

TEST_CASE("derivative differences converge at second order") {
  const RadialProfiles p(ConstructionParams::make(Variant::unbounded, 50.0));
  // Base steps well above roundoff for the local scale of each region.
  const std::pair<double, double> probes[] = {
      {0.8, 0.05}, {50.4, 0.02}, {75.0, 0.5}, {100.5, 0.02}, {130.0, 0.5}};
  const std::function<double(double, int)> fns[] = {
      [&](double x, int k) { return p.phi(x, k + 1); },
      [&](double x, int k) { return p.f(x, k); },
      [&](double x, int k) { return p.h(x, k); },
      [&](double x, int k) { return p.eta(x, k); },
  };
  for (const auto& [r, h0] : probes) {
    for (const auto& fn : fns) {
      auto err = [&](double h) {
        return std::abs(fn(r, 1) - central([&](double x) { return fn(x, 0); }, r, h));
      };
      const double e1 = err(h0), e2 = err(h0 / 2), e3 = err(h0 / 4);
      CAPTURE(r);
      CAPTURE(e1);
      if (e1 <= 1e-12 * (1.0 + std::abs(fn(r, 1)))) continue;
      CHECK(std::log2(e1 / e2) >= 1.9);
      CHECK(std::log2(e2 / e3) >= 1.9);
    }
  }
}

TEST_CASE("tighter corrector tolerance moves eta by less than the looser one") {
  const RadialProfiles loose(ConstructionParams::make(Variant::bounded, 100.0, 1e-8));
  const RadialProfiles tight(ConstructionParams::make(Variant::bounded, 100.0, 1e-12));
  for (double r : {120.0, 150.0, 199.0, 300.0}) {
    CHECK(std::abs(loose.eta(r) - tight.eta(r)) <= 1e-8 * std::abs(tight.eta_tail()));
  }
}
