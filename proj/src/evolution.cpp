#include "blowup/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <boost/math/distributions/students_t.hpp>

#include "blowup/coefficients.hpp"
#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"
#include "blowup/verify.hpp"

namespace blowup {

SelfSimilarSolution::SelfSimilarSolution(const ConstructionParams& params, ProfileSource source)
    : params_(params), source_(source) {
  if (source == ProfileSource::linear) {
    base_ = std::make_shared<const RadialProfiles>(params);
    return;
  }
  paired_ = std::make_shared<const PairedProfiles>(paired_profiles(params));
  base_ = std::shared_ptr<const RadialProfiles>(paired_, &paired_->base);
  state_ = std::make_shared<const StateCoefficients>(*paired_);
}

std::vector<const RadialProfiles*> SelfSimilarSolution::families() const {
  if (!paired_) return {base_.get()};
  return {&paired_->base, &paired_->tilde};
}

namespace {

double parabolic_scale(double t) {
  if (!(t < 0.0)) throw TimeDomain("self-similar quantities need t < 0");
  return std::sqrt(-t);
}

Eigen::VectorXd vec_rows(const Eigen::MatrixXd& g) {
  Eigen::VectorXd v(g.size());
  for (Eigen::Index a = 0; a < g.rows(); ++a) {
    v(2 * a) = g(a, 0);
    v(2 * a + 1) = g(a, 1);
  }
  return v;
}

}  // namespace

Eigen::VectorXd selfsim_u(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t) {
  const double s = parabolic_scale(t);
  const Eigen::Vector2d y = x / s;
  if (sol.source() == ProfileSource::quasilinear) {
    return W_eval<double>(sol.state()->profiles(), y).W;
  }
  return std::pow(s, -sol.params().epsilon) * U_eval(sol.profiles(), y).U;
}

Eigen::MatrixXd selfsim_Du(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t) {
  const double s = parabolic_scale(t);
  const Eigen::Vector2d y = x / s;
  if (sol.source() == ProfileSource::quasilinear) {
    return W_eval<double>(sol.state()->profiles(), y).DW / s;
  }
  return std::pow(s, -sol.params().epsilon - 1.0) * U_eval(sol.profiles(), y).DU;
}

Eigen::MatrixXd selfsim_a(const SelfSimilarSolution& sol, const Eigen::Vector2d& x, double t) {
  const double s = parabolic_scale(t);
  const Eigen::Vector2d y = x / s;
  if (sol.source() == ProfileSource::quasilinear) {
    const WSample<quad> w = W_eval<quad>(sol.state()->profiles(), y);
    return A_of_state<quad>(*sol.state(), Eigen::Matrix<quad, 2, 1>(w.W.head(2)),
                            Eigen::Matrix<quad, 2, 1>(w.W.tail(2)));
  }
  return tensor_cartesian(sol.profiles(), y);
}

Eigen::VectorXd parabolic_residual(const SelfSimilarSolution& sol, const Eigen::Vector2d& x,
                                   double t, double step_x, double step_t) {
  parabolic_scale(t + step_t);
  const Eigen::Index m = sol.components();
  const auto flux = [&](const Eigen::Vector2d& y) {
    const Eigen::VectorXd g = selfsim_a(sol, y, t) * vec_rows(selfsim_Du(sol, y, t));
    Eigen::Matrix<double, Eigen::Dynamic, 2> f(m, 2);
    for (Eigen::Index a = 0; a < m; ++a) f.row(a) << g(2 * a), g(2 * a + 1);
    return f;
  };
  const Eigen::VectorXd ut =
      (selfsim_u(sol, x, t + step_t) - selfsim_u(sol, x, t - step_t)) / (2.0 * step_t);
  return ut - frame_divergence<Eigen::Dynamic>(flux, x, step_x);
}

ReportSection parabolic_convergence(const SelfSimilarSolution& sol, std::size_t n_points,
                                    std::uint64_t seed, const std::vector<double>& h,
                                    double t_lo, double t_hi, double min_order) {
  ReportSection sec;
  sec.name = sol.source() == ProfileSource::linear ? "parabolic_linear" : "parabolic_quasilinear";
  const double r0 = sol.params().r0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Point {
    Eigen::Vector2d x;
    double t;
  };
  std::vector<Point> pts(n_points);
  for (auto& p : pts) {
    const double mt = t_lo * std::pow(t_hi / t_lo, unit(rng));
    const double rho = 0.1 * std::pow(100.0 * r0, unit(rng));
    const double th = 2.0 * std::numbers::pi * unit(rng);
    p = {std::sqrt(mt) * rho * Eigen::Vector2d(std::cos(th), std::sin(th)), -mt};
  }
  std::vector<double> res(pts.size() * h.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const double mt = -pts[i].t;
    for (std::size_t k = 0; k < h.size(); ++k) {
      res[i * h.size() + k] =
          parabolic_residual(sol, pts[i].x, pts[i].t, h[k] * std::sqrt(mt), h[k] * mt).norm();
    }
  });
  std::vector<double> worst(h.size(), 0.0);
  for (std::size_t i = 0; i < res.size(); ++i) {
    worst[i % h.size()] = std::max(worst[i % h.size()], res[i]);
  }
  const double order = fitted_order(h, worst);
  sec.data["points"] = pts.size();
  sec.data["seed"] = seed;
  sec.data["h"] = h;
  sec.data["max_residual"] = worst;
  sec.data["order"] = order;
  sec.check("order", order >= min_order);
  return sec;
}

void validate(const SolverConfig& cfg, const ConstructionParams& params) {
  if (!(cfg.t_start < cfg.t_end) || !(cfg.t_end < 0.0)) {
    throw InvalidParams("need t_start < t_end < 0");
  }
  if (cfg.L != 0.0 && cfg.L < 5.0 * params.r0 * std::sqrt(-cfg.t_start)) {
    throw InvalidParams("domain must reach 5 r0 sqrt(-t_start)");
  }
  if (cfg.n_r < 16 || cfg.n_x < 8 || cfg.n_y < 8) throw InvalidParams("resolution too small");
  if (!(cfg.dtau > 0.0)) throw InvalidParams("dtau must be positive");
  if (cfg.bdf_order != 1 && cfg.bdf_order != 2) throw InvalidParams("bdf_order is 1 or 2");
  if (cfg.snapshots_per_decade < 1) throw InvalidParams("snapshots_per_decade must be positive");
}

RadialGrid make_radial_grid(double L, double c, int n) {
  RadialGrid g;
  g.c = c;
  g.dxi = std::asinh(L / c) / (n - 1);
  g.r.resize(n);
  g.mid.resize(n - 1);
  for (int i = 0; i < n; ++i) g.r[i] = c * std::sinh(i * g.dxi);
  g.r.back() = L;
  for (int i = 0; i + 1 < n; ++i) g.mid[i] = c * std::sinh((i + 0.5) * g.dxi);
  return g;
}

RadialOperator radial_operator(const RadialProfiles& p, const RadialGrid& g, double t) {
  const double s = parabolic_scale(t);
  const std::size_t n = g.r.size();
  RadialOperator op;
  op.lower = op.diag = op.upper = op.coupling = Eigen::VectorXd::Zero(n);
  std::vector<double> face(n - 1);
  constexpr std::size_t chunk = 256;
  parallel_for((n - 1 + chunk - 1) / chunk, [&](std::size_t b) {
    for (std::size_t j = b * chunk; j < std::min(n - 1, (b + 1) * chunk); ++j) {
      face[j] = g.mid[j] * p.f(g.mid[j] / s) / (g.r[j + 1] - g.r[j]);
    }
  });
  parallel_for((n + chunk - 1) / chunk, [&](std::size_t b) {
    for (std::size_t i = std::max<std::size_t>(1, b * chunk); i < std::min(n - 1, (b + 1) * chunk);
         ++i) {
      const double r = g.r[i];
      const double w = r * (g.mid[i] - g.mid[i - 1]);
      op.lower(i) = face[i - 1] / w;
      op.upper(i) = face[i] / w;
      op.diag(i) = -(op.lower(i) + op.upper(i)) - p.h(r / s) / (r * r);
      op.coupling(i) = p.eta(r / s, 1) / (s * r);
    }
  });
  return op;
}

namespace {

// Solves (c0 - dt L) x = rhs at interior nodes with x(0) = 0, x(n-1) = right.
Eigen::VectorXd solve_tridiagonal(const RadialOperator& op, double c0, double dt,
                                  const Eigen::VectorXd& rhs, double right) {
  const Eigen::Index n = rhs.size();
  Eigen::VectorXd cp(n), dp(n), x(n);
  x(0) = 0.0;
  x(n - 1) = right;
  cp(0) = 0.0;
  dp(0) = 0.0;
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double a = -dt * op.lower(i);
    const double b = c0 - dt * op.diag(i);
    const double c = -dt * op.upper(i);
    double d = rhs(i);
    if (i == n - 2) d -= c * right;
    const double denom = b - a * cp(i - 1);
    cp(i) = i == n - 2 ? 0.0 : c / denom;
    dp(i) = (d - a * dp(i - 1)) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 1; --i) x(i) = dp(i) - cp(i) * x(i + 1);
  return x;
}

struct TimeGrid {
  std::vector<double> t;
};

TimeGrid make_time_grid(const SolverConfig& cfg) {
  const double tau0 = -std::log(-cfg.t_start);
  const double tau1 = -std::log(-cfg.t_end);
  const std::size_t n = static_cast<std::size_t>(std::ceil((tau1 - tau0) / cfg.dtau));
  TimeGrid g;
  for (std::size_t k = 0; k <= n; ++k) {
    g.t.push_back(-std::exp(-(tau0 + (tau1 - tau0) * double(k) / double(n))));
  }
  g.t.back() = cfg.t_end;
  return g;
}

// Snapshot indices: roughly snapshots_per_decade per decade, always the last.
std::vector<char> snapshot_mask(const TimeGrid& tg, int per_decade) {
  std::vector<char> mask(tg.t.size(), 0);
  double next = std::log10(-tg.t.front());
  for (std::size_t k = 0; k < tg.t.size(); ++k) {
    if (std::log10(-tg.t[k]) <= next + 1e-12) {
      mask[k] = 1;
      next -= 1.0 / per_decade;
    }
  }
  mask.back() = 1;
  return mask;
}

double domain_radius(const SolverConfig& cfg, const ConstructionParams& params) {
  return cfg.L > 0.0 ? cfg.L : 5.0 * params.r0 * std::sqrt(-cfg.t_start);
}

Eigen::MatrixXd exact_radial(const SelfSimilarSolution& sol, const std::vector<double>& r,
                             double t) {
  const auto fam = sol.families();
  const double s = std::sqrt(-t);
  const double amp = std::pow(s, -sol.params().epsilon);
  Eigen::MatrixXd out(r.size(), fam.size());
  for (std::size_t f = 0; f < fam.size(); ++f) {
    for (std::size_t i = 0; i < r.size(); ++i) out(i, f) = amp * fam[f]->phi(r[i] / s);
  }
  return out;
}

double interpolate_linear(const std::vector<double>& r, const Eigen::VectorXd& v, double x) {
  const auto it = std::upper_bound(r.begin(), r.end(), x);
  if (it == r.begin()) return v(0);
  if (it == r.end()) return v(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
  const double w = (x - r[i]) / (r[i + 1] - r[i]);
  return (1.0 - w) * v(i) + w * v(i + 1);
}

Snapshot radial_snapshot(const RadialGrid& g, const Eigen::MatrixXd& psi,
                         const Eigen::MatrixXd& exact, double t) {
  Snapshot snap;
  snap.t = t;
  const std::size_t n = g.r.size();
  const Eigen::VectorXd amp = psi.rowwise().norm();
  std::size_t last = 0;
  while (last + 1 < n && g.r[last + 1] <= 1.0) ++last;
  std::size_t k = 0;
  for (std::size_t i = 0; i <= last; ++i) {
    if (amp(i) > amp(k)) k = i;
  }
  const double edge = interpolate_linear(g.r, amp, 1.0);
  if (k > 0 && k < last && amp(k) >= edge) {
    const double curv = amp(k + 1) - 2.0 * amp(k) + amp(k - 1);
    const double d = amp(k + 1) - amp(k - 1);
    snap.sup_B1 = curv < 0.0 ? amp(k) - d * d / (8.0 * curv) : amp(k);
    snap.sup_interior = true;
  } else {
    snap.sup_B1 = std::max(amp(k), edge);
  }
  for (std::size_t i = 1; i <= last && i + 1 < n; ++i) {
    const double hm = g.r[i] - g.r[i - 1];
    const double hp = g.r[i + 1] - g.r[i];
    const Eigen::VectorXd dr = (-hp / (hm * (hm + hp))) * psi.row(i - 1).transpose() +
                               ((hp - hm) / (hm * hp)) * psi.row(i).transpose() +
                               (hm / (hp * (hm + hp))) * psi.row(i + 1).transpose();
    snap.lip_B1 = std::max({snap.lip_B1, dr.norm(), amp(i) / g.r[i]});
  }
  const double s = std::sqrt(-t);
  double inner = interpolate_linear(g.r, amp, s);
  for (std::size_t i = 0; i < n && g.r[i] <= s; ++i) inner = std::max(inner, amp(i));
  snap.osc = 2.0 * inner;
  const double scale = exact.cwiseAbs().maxCoeff();
  const double err = (psi - exact).cwiseAbs().maxCoeff();
  snap.rel_error = scale > 0.0 ? err / scale : err;
  return snap;
}

}  // namespace

Eigen::VectorXd implicit_diffusion_step(const RadialOperator& op, const Eigen::VectorXd& psi,
                                        double dt, double boundary_value) {
  return solve_tridiagonal(op, 1.0, dt, psi, boundary_value);
}

constexpr int kStartSubsteps = 16;

Trajectory solve_radial(const SelfSimilarSolution& sol, const SolverConfig& cfg) {
  validate(cfg, sol.params());
  const auto fam = sol.families();
  const std::size_t nf = fam.size();
  const double L = domain_radius(cfg, sol.params());
  const RadialGrid g = make_radial_grid(L, 0.05 * std::sqrt(-cfg.t_end), cfg.n_r);
  const TimeGrid tg = make_time_grid(cfg);
  const std::vector<char> mask = snapshot_mask(tg, cfg.snapshots_per_decade);

  Trajectory tr;
  tr.mode = SolverMode::radial_1d;
  tr.epsilon = sol.params().epsilon;
  tr.grid = g;

  const auto exact_at = [&](double t) {
    return cfg.homogeneous ? Eigen::MatrixXd::Zero(g.r.size(), nf).eval()
                           : exact_radial(sol, g.r, t);
  };
  Eigen::MatrixXd psi = exact_at(tg.t[0]);
  Eigen::MatrixXd prev = psi;
  double bound = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    bound = std::max(bound, exact_radial(sol, {L}, tg.t.back())(0, f));
  }
  bound = 10.0 * std::max({bound, psi.cwiseAbs().maxCoeff(), 1.0});
  tr.series.push_back(radial_snapshot(g, psi, psi, tg.t[0]));
  tr.max_rel_error = tr.series.back().rel_error;

  for (std::size_t k = 0; k + 1 < tg.t.size(); ++k) {
    const double t1 = tg.t[k + 1];
    const double dt = t1 - tg.t[k];
    const bool second = cfg.bdf_order == 2 && k > 0;
    const double w = second ? dt / (tg.t[k] - tg.t[k - 1]) : 0.0;
    const double c0 = (1.0 + 2.0 * w) / (1.0 + w);
    const Eigen::MatrixXd exact = exact_at(t1);
    Eigen::MatrixXd next(psi.rows(), nf);
    for (std::size_t f = 0; f < nf; ++f) {
      if (second) {
        const RadialOperator op = radial_operator(*fam[f], g, t1);
        Eigen::VectorXd rhs = (1.0 + w) * psi.col(f) - (w * w / (1.0 + w)) * prev.col(f);
        const Eigen::VectorXd star = (1.0 + w) * psi.col(f) - w * prev.col(f);
        rhs += dt * op.coupling.cwiseProduct(star);
        next.col(f) = solve_tridiagonal(op, c0, dt, rhs, exact(exact.rows() - 1, f));
        continue;
      }
      // Backward Euler, in substeps on the first step of a BDF2 run.
      const int sub = cfg.bdf_order == 2 ? kStartSubsteps : 1;
      Eigen::VectorXd cur = psi.col(f);
      for (int q = 1; q <= sub; ++q) {
        const double ta = tg.t[k] + dt * (q - 1) / sub;
        const double tb = q == sub ? t1 : tg.t[k] + dt * q / sub;
        const RadialOperator op = radial_operator(*fam[f], g, tb);
        const double right =
            cfg.homogeneous ? 0.0 : exact_radial(sol, {L}, tb)(0, static_cast<Eigen::Index>(f));
        const Eigen::VectorXd rhs = cur + (tb - ta) * op.coupling.cwiseProduct(cur);
        cur = solve_tridiagonal(op, 1.0, tb - ta, rhs, right);
      }
      next.col(f) = cur;
    }
    if (!next.allFinite()) throw StepRejection("non-finite radial step");
    if (next.cwiseAbs().maxCoeff() > bound) throw Divergence("radial solution exceeds 10x the exact bound");
    prev = std::move(psi);
    psi = std::move(next);
    const Snapshot snap = radial_snapshot(g, psi, exact, t1);
    tr.max_rel_error = std::max(tr.max_rel_error, snap.rel_error);
    if (mask[k + 1]) tr.series.push_back(snap);
  }
  tr.steps = tg.t.size() - 1;
  tr.psi = psi;
  tr.t_final = tg.t.back();
  return tr;
}

double radial_value(const Trajectory& tr, double r, int family) {
  const RadialGrid& g = tr.grid;
  const double xi = std::asinh(r / g.c) / g.dxi;
  const Eigen::Index n = static_cast<Eigen::Index>(g.r.size());
  Eigen::Index i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(xi)) - 1, 0, n - 4);
  // psi is odd in r; Lagrange in xi on four nodes.
  double v = 0.0;
  for (Eigen::Index a = i; a < i + 4; ++a) {
    double l = 1.0;
    for (Eigen::Index b = i; b < i + 4; ++b) {
      if (b != a) l *= (xi - double(b)) / double(a - b);
    }
    v += l * tr.psi(a, family);
  }
  return v;
}

namespace {

struct CartesianGrid {
  std::vector<double> x, y;
  int nx = 0, ny = 0;
  int id(int i, int j) const { return i + nx * j; }
  bool boundary(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
};

std::vector<double> stretched_axis(double L, double c, int n) {
  const double top = std::asinh(L / c);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = c * std::sinh(-top + 2.0 * top * i / (n - 1));
  x.front() = -L;
  x.back() = L;
  return x;
}

// Reference bilinear element on [0,1]^2, nodes (0,0), (1,0), (1,1), (0,1).
struct ReferenceElement {
  Eigen::Matrix4d sxx, syy, sxy;  // int dN_a/dX dN_b/dX etc.
  ReferenceElement() {
    sxx.setZero();
    syy.setZero();
    sxy.setZero();
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const double cx[4] = {0, 1, 1, 0};
    const double cy[4] = {0, 0, 1, 1};
    for (const double X : gp) {
      for (const double Y : gp) {
        Eigen::Vector4d dx, dy;
        for (int a = 0; a < 4; ++a) {
          const double sx = cx[a] == 1 ? 1.0 : -1.0;
          const double sy = cy[a] == 1 ? 1.0 : -1.0;
          dx(a) = sx * (cy[a] == 1 ? Y : 1.0 - Y);
          dy(a) = sy * (cx[a] == 1 ? X : 1.0 - X);
        }
        sxx += 0.25 * dx * dx.transpose();
        syy += 0.25 * dy * dy.transpose();
        sxy += 0.25 * dx * dy.transpose();
      }
    }
  }
};

struct CellCoefficients {
  Eigen::Matrix2d m;
  double eta;
};

// Monotone chain; the diameter of a point set is attained on its hull.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto turn = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && turn(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double exact_bound_2d(const SelfSimilarSolution& sol, const CartesianGrid& g, double t) {
  double m = 0.0;
  for (const double x : {g.x.front(), g.x.back()}) {
    m = std::max(m, selfsim_u(sol, Eigen::Vector2d(x, 0.0), t).norm());
  }
  return m;
}

}  // namespace

Trajectory solve_cartesian_2d(const SelfSimilarSolution& sol, const SolverConfig& cfg) {
  validate(cfg, sol.params());
  if (sol.source() != ProfileSource::linear) {
    throw InvalidParams("the Cartesian solver supports the linear source only");
  }
  const RadialProfiles& prof = sol.profiles();
  const double L = domain_radius(cfg, sol.params());
  const double c = std::sqrt(-cfg.t_end);
  CartesianGrid g;
  g.nx = cfg.n_x;
  g.ny = cfg.n_y;
  g.x = stretched_axis(L, c, g.nx);
  g.y = stretched_axis(L, c, g.ny);
  const int nn = g.nx * g.ny;
  const int ncx = g.nx - 1, ncy = g.ny - 1;
  const int ncell = ncx * ncy;

  std::vector<int> interior(nn, -1);
  int ni = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.boundary(i, j)) interior[g.id(i, j)] = ni++;
    }
  }
  const auto cell_nodes = [&](int ci, int cj) {
    return std::array<int, 4>{g.id(ci, cj), g.id(ci + 1, cj), g.id(ci + 1, cj + 1),
                              g.id(ci, cj + 1)};
  };

  Eigen::VectorXd mass = Eigen::VectorXd::Zero(nn);
  std::vector<Eigen::Triplet<double>> trip;
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      const double area = (g.x[ci + 1] - g.x[ci]) * (g.y[cj + 1] - g.y[cj]);
      const auto nodes = cell_nodes(ci, cj);
      for (int a = 0; a < 4; ++a) {
        mass(nodes[a]) += 0.25 * area;
        for (int b = 0; b < 4; ++b) {
          const int ia = interior[nodes[a]], ib = interior[nodes[b]];
          if (ia >= 0 && ib >= 0) trip.emplace_back(ia, ib, 1.0);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(ni, ni);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  // Position of each (cell, a, b) entry in K's value array.
  std::vector<std::array<int, 16>> slot(ncell);
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      const auto nodes = cell_nodes(ci, cj);
      auto& sl = slot[ci + ncx * cj];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const int ia = interior[nodes[a]], ib = interior[nodes[b]];
          sl[4 * a + b] = ia >= 0 && ib >= 0
                              ? static_cast<int>(&K.coeffRef(ia, ib) - K.valuePtr())
                              : -1;
        }
      }
    }
  }
  const ReferenceElement ref;

  const auto field_at = [&](double t) {
    std::vector<Eigen::VectorXd> u(2, Eigen::VectorXd::Zero(nn));
    if (cfg.homogeneous) return u;
    parallel_for(static_cast<std::size_t>(g.ny), [&](std::size_t j) {
      for (int i = 0; i < g.nx; ++i) {
        const Eigen::VectorXd v = selfsim_u(sol, Eigen::Vector2d(g.x[i], g.y[j]), t);
        u[0](g.id(i, int(j))) = v(0);
        u[1](g.id(i, int(j))) = v(1);
      }
    });
    return u;
  };

  const TimeGrid tg = make_time_grid(cfg);
  const std::vector<char> mask = snapshot_mask(tg, cfg.snapshots_per_decade);
  std::vector<Eigen::VectorXd> u = field_at(tg.t[0]);
  std::vector<Eigen::VectorXd> prev = u;
  const double bound =
      10.0 * std::max(1.0, std::max(exact_bound_2d(sol, g, tg.t.back()),
                                    std::max(u[0].cwiseAbs().maxCoeff(), u[1].cwiseAbs().maxCoeff())));

  Trajectory tr;
  tr.mode = SolverMode::cartesian_2d;
  tr.epsilon = sol.params().epsilon;
  tr.x_axis = g.x;
  tr.y_axis = g.y;

  const auto snapshot = [&](const std::vector<Eigen::VectorXd>& v, double t) {
    Snapshot snap;
    snap.t = t;
    const std::vector<Eigen::VectorXd> ex = field_at(t);
    double scale = 0.0, err = 0.0, edge = 0.0;
    std::vector<Eigen::Vector2d> inner;
    const double s = std::sqrt(-t);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int k = g.id(i, j);
        const Eigen::Vector2d val(v[0](k), v[1](k));
        scale = std::max(scale, std::hypot(ex[0](k), ex[1](k)));
        err = std::max(err, std::hypot(v[0](k) - ex[0](k), v[1](k) - ex[1](k)));
        const double rad = std::hypot(g.x[i], g.y[j]);
        if (rad <= 1.0) {
          if (val.norm() > snap.sup_B1) {
            snap.sup_B1 = val.norm();
            edge = rad;
          }
        }
        if (rad <= s) inner.push_back(val);
      }
    }
    snap.sup_interior = edge < 0.9;
    snap.rel_error = scale > 0.0 ? err / scale : err;
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        const auto nodes = cell_nodes(ci, cj);
        bool inside = true;
        for (const int a : {0, 1}) {
          for (const int b : {0, 1}) inside = inside && std::hypot(g.x[ci + a], g.y[cj + b]) <= 1.0;
        }
        if (!inside) continue;
        const double hx = g.x[ci + 1] - g.x[ci], hy = g.y[cj + 1] - g.y[cj];
        Eigen::Matrix2d du;
        for (int comp = 0; comp < 2; ++comp) {
          const Eigen::VectorXd& w = v[comp];
          du(comp, 0) = 0.5 * (w(nodes[1]) - w(nodes[0]) + w(nodes[2]) - w(nodes[3])) / hx;
          du(comp, 1) = 0.5 * (w(nodes[3]) - w(nodes[0]) + w(nodes[2]) - w(nodes[1])) / hy;
        }
        snap.lip_B1 = std::max(snap.lip_B1,
                               Eigen::JacobiSVD<Eigen::Matrix2d>(du).singularValues()(0));
      }
    }
    const std::vector<Eigen::Vector2d> hull = convex_hull(std::move(inner));
    for (std::size_t a = 0; a < hull.size(); ++a) {
      for (std::size_t b = a + 1; b < hull.size(); ++b) {
        snap.osc = std::max(snap.osc, (hull[a] - hull[b]).norm());
      }
    }
    return snap;
  };

  tr.series.push_back(snapshot(u, tg.t[0]));
  tr.max_rel_error = tr.series.back().rel_error;

  std::vector<CellCoefficients> coef(ncell);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>
      cg;
  cg.setTolerance(1e-11);
  cg.setMaxIterations(5000);

  for (std::size_t k = 0; k + 1 < tg.t.size(); ++k) {
    const double t1 = tg.t[k + 1];
    const double dt = t1 - tg.t[k];
    const double s = std::sqrt(-t1);
    const bool second = cfg.bdf_order == 2 && k > 0;
    const double w = second ? dt / (tg.t[k] - tg.t[k - 1]) : 0.0;
    const double c0 = second ? (1.0 + 2.0 * w) / (1.0 + w) : 1.0;

    parallel_for(static_cast<std::size_t>(ncy), [&](std::size_t cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        const Eigen::Vector2d ctr(0.5 * (g.x[ci] + g.x[ci + 1]), 0.5 * (g.y[cj] + g.y[cj + 1]));
        const Eigen::Matrix4d a = tensor_cartesian(prof, Eigen::Vector2d(ctr / s));
        coef[ci + ncx * cj] = {a.topLeftCorner<2, 2>(), a(0, 3)};
      }
    });

    std::vector<Eigen::VectorXd> star(2), hist(2);
    for (int comp = 0; comp < 2; ++comp) {
      star[comp] = second ? ((1.0 + w) * u[comp] - w * prev[comp]).eval() : u[comp];
      hist[comp] = second ? ((1.0 + w) * u[comp] - (w * w / (1.0 + w)) * prev[comp]).eval()
                          : u[comp];
    }
    const std::vector<Eigen::VectorXd> trace = field_at(t1);

    std::fill(K.valuePtr(), K.valuePtr() + K.nonZeros(), 0.0);
    std::vector<Eigen::VectorXd> rhs(2, Eigen::VectorXd::Zero(ni));
    for (int node = 0; node < nn; ++node) {
      const int ia = interior[node];
      if (ia < 0) continue;
      K.coeffRef(ia, ia) += c0 * mass(node);
      for (int comp = 0; comp < 2; ++comp) rhs[comp](ia) += mass(node) * hist[comp](node);
    }
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        const int cell = ci + ncx * cj;
        const double hx = g.x[ci + 1] - g.x[ci], hy = g.y[cj + 1] - g.y[cj];
        const CellCoefficients& cc = coef[cell];
        const Eigen::Matrix4d stiff = cc.m(0, 0) * (hy / hx) * ref.sxx +
                                      cc.m(1, 1) * (hx / hy) * ref.syy +
                                      cc.m(0, 1) * ref.sxy + cc.m(1, 0) * ref.sxy.transpose();
        const Eigen::Matrix4d couple = cc.eta * (ref.sxy - ref.sxy.transpose());
        const auto nodes = cell_nodes(ci, cj);
        const auto& sl = slot[cell];
        for (int a = 0; a < 4; ++a) {
          const int ia = interior[nodes[a]];
          if (ia < 0) continue;
          for (int b = 0; b < 4; ++b) {
            const int nb = nodes[b];
            if (sl[4 * a + b] >= 0) {
              K.valuePtr()[sl[4 * a + b]] += dt * stiff(a, b);
            } else {
              for (int comp = 0; comp < 2; ++comp) rhs[comp](ia) -= dt * stiff(a, b) * trace[comp](nb);
            }
            // Component 1 carries +eta J grad u^2, component 2 carries -eta J grad u^1.
            rhs[0](ia) -= dt * couple(a, b) * star[1](nb);
            rhs[1](ia) += dt * couple(a, b) * star[0](nb);
          }
        }
      }
    }
    cg.compute(K);
    if (cg.info() != Eigen::Success) throw StepRejection("preconditioner failed");
    std::vector<Eigen::VectorXd> next = trace;
    for (int comp = 0; comp < 2; ++comp) {
      Eigen::VectorXd guess(ni);
      for (int node = 0; node < nn; ++node) {
        if (interior[node] >= 0) guess(interior[node]) = star[comp](node);
      }
      const Eigen::VectorXd sol_i = cg.solveWithGuess(rhs[comp], guess);
      if (cg.info() != Eigen::Success || !sol_i.allFinite()) {
        throw StepRejection("conjugate gradients did not converge");
      }
      for (int node = 0; node < nn; ++node) {
        if (interior[node] >= 0) next[comp](node) = sol_i(interior[node]);
      }
    }
    if (std::max(next[0].cwiseAbs().maxCoeff(), next[1].cwiseAbs().maxCoeff()) > bound) {
      throw Divergence("Cartesian solution exceeds 10x the exact bound");
    }
    prev = std::move(u);
    u = std::move(next);
    if (mask[k + 1]) {
      tr.series.push_back(snapshot(u, t1));
      tr.max_rel_error = std::max(tr.max_rel_error, tr.series.back().rel_error);
    }
  }
  tr.steps = tg.t.size() - 1;
  tr.t_final = tg.t.back();
  for (int comp = 0; comp < 2; ++comp) {
    tr.u.push_back(Eigen::Map<const Eigen::MatrixXd>(u[comp].data(), g.nx, g.ny));
  }
  return tr;
}

ModeProjection project_mode1(const Trajectory& cart, const std::vector<double>& radii,
                             int n_theta) {
  if (cart.u.size() != 2) throw InvalidParams("project_mode1 needs a Cartesian trajectory");
  const auto& xs = cart.x_axis;
  const auto& ys = cart.y_axis;
  const auto locate = [](const std::vector<double>& ax, double v) {
    const auto it = std::upper_bound(ax.begin(), ax.end(), v);
    const int i = std::clamp(static_cast<int>(it - ax.begin()) - 1, 0, static_cast<int>(ax.size()) - 2);
    return std::pair<int, double>(i, (v - ax[i]) / (ax[i + 1] - ax[i]));
  };
  ModeProjection out;
  out.radii = radii;
  double total = 0.0, off = 0.0;
  for (const double r : radii) {
    std::vector<Eigen::Vector2d> vals(n_theta);
    double amp = 0.0;
    for (int k = 0; k < n_theta; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / n_theta;
      const auto [i, wx] = locate(xs, r * std::cos(th));
      const auto [j, wy] = locate(ys, r * std::sin(th));
      for (int comp = 0; comp < 2; ++comp) {
        const Eigen::MatrixXd& m = cart.u[comp];
        vals[k](comp) = (1 - wx) * (1 - wy) * m(i, j) + wx * (1 - wy) * m(i + 1, j) +
                        wx * wy * m(i + 1, j + 1) + (1 - wx) * wy * m(i, j + 1);
      }
      amp += vals[k].dot(Eigen::Vector2d(std::cos(th), std::sin(th)));
    }
    amp /= n_theta;
    out.amplitude.push_back(amp);
    for (int k = 0; k < n_theta; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / n_theta;
      total += vals[k].squaredNorm();
      off += (vals[k] - amp * Eigen::Vector2d(std::cos(th), std::sin(th))).squaredNorm();
    }
  }
  out.leakage = total > 0.0 ? off / total : 0.0;
  return out;
}

ReportSection cross_validate(const SelfSimilarSolution& sol, const SolverConfig& cart_cfg,
                             const SolverConfig& radial_cfg, double tol, double leakage_tol) {
  return cross_validate(sol, solve_cartesian_2d(sol, cart_cfg), cart_cfg, radial_cfg, tol,
                        leakage_tol);
}

ReportSection cross_validate(const SelfSimilarSolution& sol, const Trajectory& cart,
                             const SolverConfig& cart_cfg, const SolverConfig& radial_cfg,
                             double tol, double leakage_tol) {
  ReportSection sec;
  sec.name = "cross_validation";
  SolverConfig rc = radial_cfg;
  rc.t_start = cart_cfg.t_start;
  rc.t_end = cart_cfg.t_end;
  rc.L = domain_radius(cart_cfg, sol.params());
  const Trajectory rad = solve_radial(sol, rc);
  const double s = std::sqrt(-cart_cfg.t_end);
  std::vector<double> radii;
  for (int k = 0; k < 64; ++k) radii.push_back(0.05 * s * std::pow(0.5 * rc.L / (0.05 * s), k / 63.0));
  const ModeProjection proj = project_mode1(cart, radii);
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double v = radial_value(rad, radii[k]);
    diff = std::max(diff, std::abs(proj.amplitude[k] - v));
    scale = std::max(scale, std::abs(v));
  }
  const double rel = scale > 0.0 ? diff / scale : diff;
  sec.data["grid"] = {{"nx", cart_cfg.n_x}, {"ny", cart_cfg.n_y}, {"L", rc.L},
                      {"t_start", cart_cfg.t_start}, {"t_end", cart_cfg.t_end},
                      {"steps", cart.steps}};
  sec.data["mode1_relative_mismatch"] = rel;
  sec.data["leakage"] = proj.leakage;
  sec.data["cartesian_max_rel_error"] = cart.max_rel_error;
  sec.data["radial_max_rel_error"] = rad.max_rel_error;
  sec.check("mode1_agreement", rel <= tol);
  sec.check("mode_purity", proj.leakage <= leakage_tol);
  return sec;
}

ExponentFit fit_exponent(const std::vector<double>& minus_t, const std::vector<double>& values) {
  ExponentFit fit;
  fit.n = values.size();
  if (fit.n == 0) return fit;
  fit.t_hi = *std::max_element(minus_t.begin(), minus_t.end());
  fit.t_lo = *std::min_element(minus_t.begin(), minus_t.end());
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); }) ||
      fit.n < 3) {
    return fit;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    mx += std::log(minus_t[i]);
    my += std::log(values[i]);
  }
  mx /= fit.n;
  my /= fit.n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double dx = std::log(minus_t[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(values[i]) - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  double ssr = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double e = std::log(values[i]) - my - fit.slope * (std::log(minus_t[i]) - mx);
    ssr += e * e;
  }
  const boost::math::students_t dist(static_cast<double>(fit.n - 2));
  fit.ci_half_width =
      sxx > 0 ? boost::math::quantile(dist, 0.975) * std::sqrt(ssr / (fit.n - 2) / sxx) : 0.0;
  return fit;
}

BlowupReport blowup_metrics(const Trajectory& tr) {
  if (tr.series.size() < 3) throw InsufficientSpan("fewer than three snapshots");
  std::vector<double> mt, sup, lip, mt_in, sup_in;
  BlowupReport rep;
  rep.min_osc = INFINITY;
  for (const Snapshot& s : tr.series) {
    mt.push_back(-s.t);
    sup.push_back(s.sup_B1);
    lip.push_back(s.lip_B1);
    if (s.sup_interior) {
      mt_in.push_back(-s.t);
      sup_in.push_back(s.sup_B1);
    }
    rep.min_osc = std::min(rep.min_osc, s.osc);
  }
  const double span = *std::max_element(mt.begin(), mt.end()) / *std::min_element(mt.begin(), mt.end());
  if (span < 100.0 * (1.0 - 1e-9)) throw InsufficientSpan("trajectory spans less than two decades of -t");
  rep.lip_fit = fit_exponent(mt, lip);
  rep.sup_fit = mt_in.size() >= 8 ? fit_exponent(mt_in, sup_in) : fit_exponent(mt, sup);
  rep.max_rel_error = tr.max_rel_error;
  rep.sup_resolvable = 0.5 * tr.epsilon > rep.sup_fit.ci_half_width;
  return rep;
}

Json to_json(const BlowupReport& r) {
  const auto fit = [](const ExponentFit& f) {
    return Json{{"slope", f.slope},
                {"ci95_half_width", f.ci_half_width},
                {"n", f.n},
                {"minus_t_range", {f.t_lo, f.t_hi}}};
  };
  return Json{{"sup_exponent", fit(r.sup_fit)},
              {"lipschitz_exponent", fit(r.lip_fit)},
              {"min_oscillation", r.min_osc},
              {"max_rel_error", r.max_rel_error},
              {"sup_exponent_resolvable", r.sup_resolvable}};
}

}  // namespace blowup
