#pragma once

#include <string>
#include <string_view>

namespace blowup {

enum class Variant { bounded, unbounded };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// One counterexample instance. Build through make() so that epsilon is
/// always consistent with the variant.
struct ConstructionParams {
  Variant variant = Variant::bounded;
  double r0 = 100.0;
  /// Self-similar decay exponent: 0 when bounded, 1 / (r0^2 log r0) otherwise.
  double epsilon = 0.0;
  /// Relative tolerance for adaptive quadrature of the corrector.
  double quad_tol = 1e-12;
  /// Below this radius f is evaluated from its even power series.
  double series_switch_radius = 1e-2;

  static constexpr double min_r0 = 10.0;

  /// Throws InvalidParams for r0 < min_r0 or non-positive tolerances.
  static ConstructionParams make(Variant variant, double r0, double quad_tol = 1e-12);

  /// Same instance with epsilon overridden; used for the epsilon -> 0 consistency check.
  ConstructionParams with_epsilon(double eps) const;
};

}  // namespace blowup
