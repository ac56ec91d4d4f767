#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "blowup/coefficients.hpp"
#include "blowup/profiles.hpp"
#include "blowup/report.hpp"

namespace blowup {

/// The base profiles (phi glued on [r0, 2r0]) and the companion family
/// (phi~ glued on [3r0, 4r0]) with their own f~, h~, eta~.
struct PairedProfiles {
  RadialProfiles base;
  RadialProfiles tilde;
};

/// Bounded variant only; throws InvalidParams otherwise.
PairedProfiles paired_profiles(const ConstructionParams& params);

template <typename Scalar>
struct WSample {
  Eigen::Matrix<Scalar, 4, 1> W;  // (U, U~)
  Eigen::Matrix<double, 4, 2> DW;
};

template <Real Scalar>
WSample<Scalar> W_eval(const PairedProfiles& pp, const Eigen::Vector2d& x);

/// Block-diagonal pairing of the two 4x4 Cartesian coefficient matrices on
/// vec of a 4x2 gradient matrix.
Eigen::Matrix<double, 8, 8> A0_tensor(const PairedProfiles& pp, const Eigen::Vector2d& x);

/// Samples of r -> (phi(r), phi~(r)).
struct GammaCurve {
  std::vector<double> r;
  std::vector<double> x;
  std::vector<double> y;
  /// (1 - phi_1(r0)) + min over the outer diagonal branch of (phi - 1).
  double diagonal_gap = 0.0;
  double min_nonadjacent_distance = 0.0;
  bool injective = false;
};

/// Throws InvalidParams for n_samples < 2048 and InjectivityFailure if two
/// non-adjacent segments meet.
GammaCurve gamma_build(const PairedProfiles& pp, std::size_t n_samples = 4096);

/// Coefficient functions on state space: F(s) (even, from the base family),
/// H(x, y), N(x, y) with x = |p|, y = |q|, and the companion F~, H~, N~.
/// Outside the square of half-side delta_bar around (1, 1), N = N~ = 0 and
/// H = H~ = 1/2. Templated on the state scalar; a quad state keeps the round
/// trip through phi exact where dF/dphi ~ r^3 f' is large.
class StateCoefficients {
 public:
  /// Throws FactorizationFailure if phi is not increasing up to the end of
  /// the f window or returns below that level afterwards.
  explicit StateCoefficients(const PairedProfiles& pp);

  double delta_bar() const { return delta_bar_; }
  /// 1 - phi(r0 + 1): below this level F follows f through phi^-1.
  double delta() const { return 1.0 - top_[0]; }

  template <Real S>
  double F(S s) const {
    return branch_f(0, s);
  }
  template <Real S>
  double F_tilde(S s) const {
    return branch_f(1, s);
  }
  /// (F(s) - 1/2) / s^2, regular at s = 0.
  template <Real S>
  double F_excess(int family, S s) const;

  template <Real S>
  double H(S x, S y) const;
  template <Real S>
  double N(S x, S y) const;
  template <Real S>
  double H_tilde(S x, S y) const;
  template <Real S>
  double N_tilde(S x, S y) const;

  const PairedProfiles& profiles() const { return *pp_; }

 private:
  const RadialProfiles& family(int k) const { return k == 0 ? pp_->base : pp_->tilde; }
  template <Real S>
  double branch_f(int k, S s) const;
  template <Real S>
  S increasing_inverse(int k, S s) const;
  template <Real S>
  S collar(S t) const;

  const PairedProfiles* pp_;
  double a_ = 0.0;          // 1 - phi_1(r0)
  double delta_bar_ = 0.0;  // 4 a
  double top_[2] = {0, 0};  // phi at the end of each f window
  double kappa_[2] = {0, 0};
};

/// A(p, q) on vec of a 4x2 gradient matrix: for each pair, blocks
/// 1/2 I + (F - 1/2) p^ p^ + (H - 1/2) p^perp p^perp on the diagonal and
/// +-N J off it.
template <Real S>
Eigen::Matrix<double, 8, 8> A_of_state(const StateCoefficients& c,
                                       const Eigen::Matrix<S, 2, 1>& p,
                                       const Eigen::Matrix<S, 2, 1>& q);

struct GammaValues {
  double F = 0, H = 0, N = 0;
  double F_tilde = 0, H_tilde = 0, N_tilde = 0;
};

/// State functions evaluated at (phi(r), phi~(r)) with an extended-precision state.
GammaValues coefficients_on_gamma(const StateCoefficients& c, double r);

struct ConsistencyOptions {
  std::size_t n_radii = 4096;
  int n_angles = 8;
  std::size_t n_random_states = 10000;
  std::uint64_t seed = 20240611;
  double gap_tol = 1e-8;
  double roundtrip_tol = 1e-8;
  double lambda_threshold = 0.25;
};

/// A(W(x)) against A0(x) on a radial x angular grid over (0, 10 r0], round
/// trips of the state functions, Gamma injectivity, ellipticity of A(state)
/// over random states and of A0 over radii, support of N and H, and the
/// order of the stationary residual of W.
ReportSection consistency_check(const StateCoefficients& c, const GammaCurve& gamma,
                                const ConsistencyOptions& opt = {});

}  // namespace blowup
