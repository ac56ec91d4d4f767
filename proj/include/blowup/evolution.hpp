#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "blowup/params.hpp"
#include "blowup/profiles.hpp"
#include "blowup/quasilinear.hpp"
#include "blowup/report.hpp"

namespace blowup {

enum class ProfileSource { linear, quasilinear };

/// u(x, t) = (-t)^(-eps/2) U(x / sqrt(-t)) with a(x, t) = A(x / sqrt(-t)).
/// The quasilinear source uses W = (U, U~) and a = A(W) evaluated on a quad
/// state; it needs the bounded variant.
class SelfSimilarSolution {
 public:
  explicit SelfSimilarSolution(const ConstructionParams& params,
                               ProfileSource source = ProfileSource::linear);

  const ConstructionParams& params() const { return params_; }
  ProfileSource source() const { return source_; }
  /// 2 for the linear example, 4 for the quasilinear one.
  int components() const { return source_ == ProfileSource::linear ? 2 : 4; }
  /// Radial families: {base} or {base, companion}.
  std::vector<const RadialProfiles*> families() const;
  const RadialProfiles& profiles() const { return *base_; }
  const StateCoefficients* state() const { return state_.get(); }

 private:
  ConstructionParams params_;
  ProfileSource source_;
  std::shared_ptr<const RadialProfiles> base_;
  std::shared_ptr<const PairedProfiles> paired_;
  std::shared_ptr<const StateCoefficients> state_;
};

/// Throws TimeDomain for t >= 0.
Eigen::VectorXd selfsim_u(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t);
/// Rows are the gradients of the components.
Eigen::MatrixXd selfsim_Du(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t);
/// Coefficient matrix on vec of the m x 2 gradient (4 x 4 or 8 x 8).
Eigen::MatrixXd selfsim_a(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t);

/// u_t - div(a Du) with a central difference of half-width step_t in time and
/// the frame-aligned 5-point divergence of spacing step_x.
Eigen::VectorXd parabolic_residual(const SelfSimilarSolution& sol, const Eigen::Vector2d& x,
                                   double t, double step_x, double step_t);

/// Max residual over random spacetime points (-t log-uniform in [t_lo, t_hi],
/// |x| / sqrt(-t) log-uniform in [0.1, 10 r0]) for steps h sqrt(-t) in
/// space and h (-t) in time, and the fitted order.
ReportSection parabolic_convergence(const SelfSimilarSolution& sol, std::size_t n_points = 1000,
                                    std::uint64_t seed = 20240611,
                                    const std::vector<double>& h = {1e-2, 5e-3, 2.5e-3},
                                    double t_lo = 0.01, double t_hi = 1.0,
                                    double min_order = 1.9);

enum class SolverMode { radial_1d, cartesian_2d };

struct SolverConfig {
  SolverMode mode = SolverMode::radial_1d;
  double t_start = -1.0;
  double t_end = -0.01;
  /// Radial nodes including r = 0 and r = L.
  int n_r = 4096;
  /// Nodes per axis of the tensor grid.
  int n_x = 256;
  int n_y = 256;
  /// Domain radius (radial) or half-width (Cartesian); 0 picks 5 r0 sqrt(-t_start).
  double L = 0.0;
  /// Step in tau = -log(-t). Steps are geometric in -t.
  double dtau = 2e-3;
  /// Second order by default; 1 gives backward Euler throughout.
  int bdf_order = 2;
  /// Snapshots per decade of -t in the reported series.
  int snapshots_per_decade = 20;
  /// Zero initial and boundary data instead of the exact trace.
  bool homogeneous = false;
};

/// Invariant checks on a config; throws InvalidParams.
void validate(const SolverConfig& cfg, const ConstructionParams& params);

/// r_i = c sinh(i dxi) on [0, L]: uniform near 0, geometric beyond c, so the
/// moving profile is resolved at every scale without regridding.
struct RadialGrid {
  std::vector<double> r;    // nodes, r[0] = 0, r.back() = L
  std::vector<double> mid;  // mapped midpoints, mid[i] between r[i] and r[i+1]
  double c = 0.0;
  double dxi = 0.0;
};

RadialGrid make_radial_grid(double L, double c, int n);

/// Tridiagonal radial operator psi -> (1/r)(r f psi_r)_r - h psi / r^2 at
/// interior nodes, plus the coupling rate eta' / (s r) kept separate for
/// explicit treatment. Coefficients are taken at r / sqrt(-t).
struct RadialOperator {
  Eigen::VectorXd lower, diag, upper;
  Eigen::VectorXd coupling;
};

RadialOperator radial_operator(const RadialProfiles& p, const RadialGrid& g, double t);

/// One backward Euler step of psi_t = L psi (coupling dropped) with the given
/// boundary value at r = L; exposed for the energy check.
Eigen::VectorXd implicit_diffusion_step(const RadialOperator& op, const Eigen::VectorXd& psi,
                                        double dt, double boundary_value);

struct Snapshot {
  double t = 0.0;
  double sup_B1 = 0.0;  // sup over B_1 of |u|
  double lip_B1 = 0.0;  // sup over B_1 of |Du| (operator norm)
  double osc = 0.0;     // oscillation of u over B_sqrt(-t)
  double rel_error = 0.0;
  /// The sup over B_1 is attained strictly inside the ball.
  bool sup_interior = false;
};

struct Trajectory {
  SolverMode mode = SolverMode::radial_1d;
  double epsilon = 0.0;
  std::vector<Snapshot> series;
  double max_rel_error = 0.0;
  std::size_t steps = 0;
  /// Radial: grid and final psi per family (columns).
  RadialGrid grid;
  Eigen::MatrixXd psi;
  /// Cartesian: axes and the final components, u[k](i, j) at (x_i, y_j).
  std::vector<double> x_axis, y_axis;
  std::vector<Eigen::MatrixXd> u;
  double t_final = 0.0;
};

/// BDF2 with the stiff diffusion and h psi / r^2 implicit (tridiagonal) and
/// the eta coupling extrapolated explicitly. Throws StepRejection on a
/// non-finite step and Divergence when |psi| exceeds 10x the exact bound.
Trajectory solve_radial(const SelfSimilarSolution& sol, const SolverConfig& cfg);

/// Bilinear finite elements with lumped mass on a sinh-stretched tensor grid;
/// symmetric part implicit (conjugate gradients), the antisymmetric eta J
/// coupling explicit. Linear source only.
Trajectory solve_cartesian_2d(const SelfSimilarSolution& sol, const SolverConfig& cfg);

/// psi at r from a radial trajectory (family 0), by cubic interpolation.
double radial_value(const Trajectory& tr, double r, int family = 0);

struct ModeProjection {
  std::vector<double> radii;
  std::vector<double> amplitude;  // (1/2pi) int u . nu dtheta
  /// int |u - amplitude nu|^2 over all rings / int |u|^2.
  double leakage = 0.0;
};

/// Mode-1 projection of a Cartesian trajectory on rings (bilinear interpolation).
ModeProjection project_mode1(const Trajectory& cart, const std::vector<double>& radii,
                             int n_theta = 256);

/// Cartesian run against a radial run on the same window: relative mode-1
/// mismatch, leakage, and both errors against the exact solution.
ReportSection cross_validate(const SelfSimilarSolution& sol, const SolverConfig& cart_cfg,
                             const SolverConfig& radial_cfg, double tol = 2e-2,
                             double leakage_tol = 1e-3);
/// Same against an already computed Cartesian trajectory.
ReportSection cross_validate(const SelfSimilarSolution& sol, const Trajectory& cart,
                             const SolverConfig& cart_cfg, const SolverConfig& radial_cfg,
                             double tol = 2e-2, double leakage_tol = 1e-3);

struct ExponentFit {
  double slope = 0.0;
  double ci_half_width = 0.0;  // 95%
  std::size_t n = 0;
  double t_hi = 0.0, t_lo = 0.0;  // window in -t
};

struct BlowupReport {
  ExponentFit sup_fit;
  ExponentFit lip_fit;
  double min_osc = 0.0;
  double max_rel_error = 0.0;
  /// |expected sup exponent| exceeds the confidence half-width.
  bool sup_resolvable = false;
};

/// Least-squares log-log fits against -t. The sup fit uses the snapshots
/// whose maximum sits inside B_1 when there are at least eight of them.
/// Throws InsufficientSpan below two decades of -t.
BlowupReport blowup_metrics(const Trajectory& tr);

ExponentFit fit_exponent(const std::vector<double>& minus_t, const std::vector<double>& values);

Json to_json(const BlowupReport& r);

}  // namespace blowup
