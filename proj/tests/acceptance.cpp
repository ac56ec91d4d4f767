// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "blowup/cli.hpp"
#include "blowup/coefficients.hpp"
#include "blowup/evolution.hpp"
#include "blowup/liouville.hpp"
#include "blowup/quasilinear.hpp"
#include "blowup/suite.hpp"
#include "blowup/verify.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int id, const char* title, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = seconds_since(t0);
  const bool in_time = time_limit <= 0.0 || t < time_limit;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::string limit = time_limit > 0.0 ? fmt(" (limit %.0f s)", time_limit) : "";
  std::printf("%s criterion %2d: %s | %s | %.2f s%s\n", pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), t, limit.c_str());
  std::fflush(stdout);
}

std::vector<double> log_space(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::exp(std::log(a) + (std::log(b) - std::log(a)) * i / (n - 1));
  return v;
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

const char* name(Variant v) { return v == Variant::bounded ? "bounded" : "unbounded"; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

int main() {
  const Variant variants[] = {Variant::bounded, Variant::unbounded};
  const double r0s[] = {50.0, 100.0, 200.0};

  criterion(1, "f0 closed form vs adaptive quadrature", 5.0, [] {
    const double r0 = 100.0;
    double worst = 0.0;
    for (const double r : log_space(1e-3, 10.0 * r0, 1000)) {
      auto integrand = [](double s) { return (1.0 + 2.0 * s * s) / std::pow(1.0 + s * s, 1.5); };
      const double I =
          boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, r, 12, 1e-14);
      const double oracle = std::pow(1.0 + r * r, 1.5) / (2.0 * r) * I;
      worst = std::max(worst, std::abs(f0_closed(r) - oracle) / oracle);
    }
    return Outcome{worst <= 1e-10, fmt("max rel diff %.3e over 1000 radii (tol 1e-10)", worst)};
  });

  criterion(2, "deficit support and scaling", 10.0, [&] {
    bool ok = true;
    std::string d;
    for (const Variant v : variants) {
      const RadialProfiles p(ConstructionParams::make(v, 100.0));
      double outside = 0.0;
      std::vector<double> radii = log_space(1e-3, 1e5, 20000);
      for (int i = 0; i <= 2000; ++i) {
        radii.push_back(100.0 - 1.0 + i * 0.5e-3);
        radii.push_back(201.0 + i * 0.5e-3);
      }
      for (const double r : radii) {
        if (r >= 100.0 && r <= 201.0) continue;
        outside = std::max(outside, std::abs(p.deficit(r)));
      }
      std::vector<double> scaled;
      for (const double r0 : r0s) {
        const RadialProfiles q(ConstructionParams::make(v, r0));
        double sup = 0.0;
        for (int i = 0; i <= 20000; ++i) {
          sup = std::max(sup, std::abs(q.deficit(r0 + (r0 + 1.0) * i / 20000.0)));
        }
        scaled.push_back(sup * r0 * r0 / std::log(r0));
      }
      ok = ok && outside <= 1e-10 && spread(scaled) <= 10.0;
      d += fmt("%s: outside %.1e, sup|E| r0^2/log r0 = %.3f/%.3f/%.3f; ", name(v), outside,
               scaled[0], scaled[1], scaled[2]);
    }
    return Outcome{ok, d + "tol 1e-10, factor 10"};
  });

  criterion(3, "ellipticity certification", 10.0, [&] {
    bool ok = true;
    std::string d;
    for (const Variant v : variants) {
      const RadialProfiles p(ConstructionParams::make(v, 100.0));
      const ReportSection s = ellipticity_section(p, 20240611);
      std::vector<double> lmax;
      for (const double r0 : r0s) {
        const RadialProfiles q(ConstructionParams::make(v, r0));
        double m = 0.0;
        for (const double r : default_scan_radii(q)) m = std::max(m, spectrum_closed(q, r)[3]);
        lmax.push_back(m / (r0 * r0 * std::log(r0)));
      }
      const double lmin = s.data["lambda_min"].get<double>();
      const double mismatch = s.data["closed_vs_numeric"].get<double>();
      ok = ok && s.pass && lmin >= 0.25 && mismatch <= 1e-10 && spread(lmax) <= 10.0;
      d += fmt("%s: lambda_min %.4f, closed vs numeric %.1e, lambda_max/(r0^2 log r0) "
               "%.3f/%.3f/%.3f; ",
               name(v), lmin, mismatch, lmax[0], lmax[1], lmax[2]);
    }
    return Outcome{ok, d + "need >= 0.25, <= 1e-10, factor 10"};
  });

  criterion(4, "elliptic residual convergence (64x16 points)", 60.0, [&] {
    bool ok = true;
    std::string d;
    for (const Variant v : variants) {
      const RadialProfiles p(ConstructionParams::make(v, 100.0));
      const ResidualGrid g = default_residual_grid(p);
      const ReportSection s = residual_convergence(p, g);
      const double order = s.data["order"].get<double>();
      const double finest = s.data["max_residual"].back().get<double>();
      ok = ok && g.radii.size() == 64 && g.angles.size() == 16 && order >= 1.9 && finest <= 1e-4;
      d += fmt("%s: order %.4f, finest max residual %.2e; ", name(v), order, finest);
    }
    return Outcome{ok, d + "need order >= 1.9, residual <= 1e-4"};
  });

  criterion(5, "decay audit", 0.0, [&] {
    bool ok = true;
    std::string d;
    for (const Variant v : variants) {
      const RadialProfiles p(ConstructionParams::make(v, 100.0));
      const ReportSection s = decay_audit(p, 0.05);
      const double eps = p.epsilon();
      const double s1 = s.data["slope_DU"].get<double>();
      const double s2 = s.data["slope_drift"].get<double>();
      ok = ok && s.pass && std::abs(s1 - (-1.0 - eps)) <= 0.05 && std::abs(s2 - (-2.0 - eps)) <= 0.05;
      d += fmt("%s: slopes %.5f (want %.5f), %.5f (want %.5f); ", name(v), s1, -1.0 - eps, s2,
               -2.0 - eps);
    }
    return Outcome{ok, d + "tol 0.05"};
  });

  criterion(6, "maximum principle probe", 0.0, [&] {
    bool ok = true;
    std::string d;
    for (const Variant v : variants) {
      for (const double r0 : r0s) {
        const MaxPrinciple mp = max_principle_probe(RadialProfiles(ConstructionParams::make(v, r0)));
        ok = ok && mp.r_star > r0 && mp.r_star < 2.0 * r0 && mp.deficit_at_root > 0.0;
        d += fmt("%s r0=%g: r*/r0 %.4f, E(r*) %.2e; ", name(v), r0, mp.r_star / r0,
                 mp.deficit_at_root);
      }
    }
    return Outcome{ok, d + "need r* in (r0, 2r0), E(r*) > 0"};
  });

  criterion(7, "quasilinear consistency", 120.0, [] {
    const PairedProfiles pp = paired_profiles(ConstructionParams::make(Variant::bounded, 100.0));
    const StateCoefficients c(pp);
    ConsistencyOptions opt;
    opt.n_radii = 4096;
    opt.n_angles = 8;
    opt.n_random_states = 10000;
    opt.gap_tol = 1e-8;
    opt.roundtrip_tol = 1e-8;
    const ReportSection s = consistency_check(c, gamma_build(pp), opt);
    const Json& rt = s.data["roundtrip"];
    double worst_rt = 0.0;
    for (const auto& [k, v] : rt.items()) worst_rt = std::max(worst_rt, v.get<double>());
    const bool ok = s.pass && s.data["max_gap"].get<double>() <= 1e-8 && worst_rt <= 1e-8 &&
                    s.data["checks"]["gamma_injective"].get<bool>() &&
                    s.data["checks"]["state_ellipticity"].get<bool>();
    return Outcome{ok, fmt("max gap %.2e, worst round trip %.2e, injective %s, state ellipticity "
                           "%s (4096x8 grid, 1e4 states); tol 1e-8",
                           s.data["max_gap"].get<double>(), worst_rt,
                           s.data["checks"]["gamma_injective"].get<bool>() ? "yes" : "no",
                           s.data["checks"]["state_ellipticity"].get<bool>() ? "yes" : "no")};
  });

  criterion(8, "parabolic residual convergence", 0.0, [] {
    bool ok = true;
    std::string d;
    const auto bounded = ConstructionParams::make(Variant::bounded, 100.0);
    const auto unbounded = ConstructionParams::make(Variant::unbounded, 100.0);
    const std::pair<const char*, SelfSimilarSolution> runs[] = {
        {"linear", SelfSimilarSolution(bounded, ProfileSource::linear)},
        {"linear unbounded", SelfSimilarSolution(unbounded, ProfileSource::linear)},
        {"quasilinear", SelfSimilarSolution(bounded, ProfileSource::quasilinear)},
    };
    for (const auto& [label, sol] : runs) {
      const ReportSection s = parabolic_convergence(sol, 1000);
      const double order = s.data["order"].get<double>();
      ok = ok && s.pass && order >= 1.9;
      d += fmt("%s: order %.4f; ", label, order);
    }
    return Outcome{ok, d + "1000 points, -t in [0.01, 1], need >= 1.9"};
  });

  criterion(9, "radial solver fidelity and exponents", 600.0, [] {
    const SelfSimilarSolution sol(ConstructionParams::make(Variant::bounded, 50.0));
    SolverConfig cfg;
    cfg.t_start = -1.0;
    cfg.t_end = -0.01;
    cfg.n_r = 4096;
    const Trajectory tr = solve_radial(sol, cfg);
    const BlowupReport b = blowup_metrics(tr);

    const SelfSimilarSolution usol(ConstructionParams::make(Variant::unbounded, 50.0));
    SolverConfig ucfg;
    ucfg.t_start = -1e-3;
    ucfg.t_end = -1e-6;
    ucfg.n_r = 4096;
    const Trajectory utr = solve_radial(usol, ucfg);
    const BlowupReport ub = blowup_metrics(utr);
    const double want = -usol.params().epsilon / 2.0;
    const double rel = std::abs(ub.sup_fit.slope - want) / std::abs(want);

    const bool ok = tr.max_rel_error <= 1e-3 && std::abs(b.lip_fit.slope + 0.5) <= 0.05 &&
                    rel <= 0.1 && utr.max_rel_error <= 1e-3;
    return Outcome{ok, fmt("bounded r0=50: max rel error %.2e, Lipschitz exponent %.6f +- %.1e; "
                           "unbounded r0=50 on -t in [1e-6, 1e-3]: sup exponent %.6e +- %.1e "
                           "(want %.6e, rel dev %.2e, %zu points), max rel error %.2e; "
                           "tol 1e-3, 0.05, 10%%",
                           tr.max_rel_error, b.lip_fit.slope, b.lip_fit.ci_half_width,
                           ub.sup_fit.slope, ub.sup_fit.ci_half_width, want, rel, ub.sup_fit.n,
                           utr.max_rel_error)};
  });

  criterion(10, "2D Cartesian vs radial mode-1 projection", 0.0, [] {
    const SelfSimilarSolution sol(ConstructionParams::make(Variant::bounded, 50.0));
    SolverConfig cart;
    cart.mode = SolverMode::cartesian_2d;
    cart.t_start = -1.0;
    cart.t_end = -0.1;
    cart.n_x = cart.n_y = 256;
    cart.dtau = 1e-2;
    SolverConfig radial;
    radial.t_start = -1.0;
    radial.t_end = -0.1;
    const ReportSection s = cross_validate(sol, cart, radial, 2e-2, 1e-3);
    const double mismatch = s.data["mode1_relative_mismatch"].get<double>();
    const double leakage = s.data["leakage"].get<double>();
    return Outcome{s.pass && mismatch <= 2e-2 && leakage <= 1e-3,
                   fmt("r0=50, 256^2, -1 -> -0.1: mode-1 mismatch %.2e (tol 2e-2), leakage %.2e "
                       "(tol 1e-3)",
                       mismatch, leakage)};
  });

  criterion(11, "Liouville suite", 0.0, [&] {
    bool ok = true;
    std::string d = "cutoff |quad - 2pi/log R|:";
    for (const double R : {1e2, 1e3, 1e4}) {
      const LogCutoff c{R};
      const double diff = std::abs(c.energy_quadrature() - 2.0 * std::numbers::pi / std::log(R));
      ok = ok && diff <= 1e-8;
      d += fmt(" %.1e", diff);
    }
    d += "; witness";
    for (const double r0 : r0s) {
      const RadialProfiles p(ConstructionParams::make(Variant::bounded, r0));
      const ReportSection s = liouville_witness(p);
      const MaxPrinciple mp = max_principle_probe(p);
      const MonotonicityReport m =
          monotonicity_scan(profile_field(p), log_space(1.0, 10.0 * r0, 400));
      const double gap = m.sign_change_radius ? std::abs(*m.sign_change_radius - mp.r_star) : INFINITY;
      ok = ok && s.pass && gap <= 1e-8;
      d += fmt(" r0=%g %s (root gap %.1e)", r0, s.pass ? "pass" : "fail", gap);
    }
    return Outcome{ok, d + "; tol 1e-8"};
  });

  criterion(12, "determinism of verify outputs", 0.0, [] {
    const fs::path dir = fs::temp_directory_path() / "blowuplab_acceptance_determinism";
    fs::remove_all(dir);
    const std::string out = dir.string();
    const char* argv[] = {"blowuplab", "verify", "--variant", "bounded", "--r0", "100",
                          "--seed", "17", "--out", out.c_str()};
    auto run = [&] {
      std::ostringstream o, e;
      const int code = run_cli(10, argv, o, e);
      std::vector<std::string> files = {slurp(dir / "checks.csv"), slurp(dir / "ellipticity.csv")};
      Json j = Json::parse(slurp(dir / "verify.json"));
      j["manifest"].erase("timestamp");
      files.push_back(j.dump());
      return std::make_pair(code, files);
    };
    const auto a = run();
    const auto b = run();
    const bool same = a.second == b.second;
    const bool ok = a.first == 0 && b.first == 0 && same && !a.second[0].empty();
    return Outcome{ok, fmt("two full verify runs (exit %d, %d): CSV bodies %s, JSON modulo "
                           "timestamp %s",
                           a.first, b.first, a.second[0] == b.second[0] && a.second[1] == b.second[1]
                                                 ? "identical" : "differ",
                           a.second[2] == b.second[2] ? "identical" : "differs")};
  });

  std::printf("%s: %d of 12 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
