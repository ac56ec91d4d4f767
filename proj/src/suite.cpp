#include "blowup/suite.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "blowup/coefficients.hpp"
#include "blowup/errors.hpp"
#include "blowup/liouville.hpp"
#include "blowup/quasilinear.hpp"
#include "blowup/verify.hpp"

namespace blowup {

const std::vector<std::string>& verify_section_names() {
  static const std::vector<std::string> names = {
      "estimates", "ellipticity",           "residual_convergence", "decay",
      "max_principle", "quasilinear_consistency", "liouville_witness"};
  return names;
}

ReportSection ellipticity_section(const RadialProfiles& p, std::uint64_t seed, double threshold) {
  ReportSection sec;
  sec.name = "ellipticity";
  const std::vector<double> radii = default_scan_radii(p);
  const EllipticityReport e = ellipticity_scan(p, radii, threshold, seed);
  double mismatch = 0.0;
  for (const double r : radii) {
    const Eigen::Vector4d closed = spectrum_closed(p, r);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(assemble_rotated(p, r),
                                                      Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, closed.cwiseAbs().maxCoeff());
    mismatch = std::max(mismatch, (es.eigenvalues() - closed).cwiseAbs().maxCoeff() / scale);
  }
  const double r0 = p.params().r0;
  sec.data["lambda_min"] = e.lambda_min;
  sec.data["lambda_max"] = e.lambda_max;
  sec.data["lambda_max_over_r0sq_log_r0"] = e.lambda_max / (r0 * r0 * std::log(r0));
  sec.data["worst_radius"] = e.worst_radius;
  sec.data["threshold"] = e.threshold;
  sec.data["margin"] = e.margin;
  sec.data["min_det_ratio"] = e.min_det_ratio;
  sec.data["form_violation"] = e.form_violation;
  sec.data["closed_vs_numeric"] = mismatch;
  sec.data["radii"] = e.n_radii;
  sec.data["seed"] = e.seed;
  sec.check("lambda_min", e.pass);
  sec.check("closed_form_spectrum", mismatch <= 1e-10);
  return sec;
}

ReportSection max_principle_section(const RadialProfiles& p) {
  ReportSection sec;
  sec.name = "max_principle";
  const double r0 = p.params().r0;
  try {
    const MaxPrinciple mp = max_principle_probe(p);
    sec.data["r_star"] = mp.r_star;
    sec.data["deficit_at_root"] = mp.deficit_at_root;
    sec.data["eta_jump"] = mp.eta_jump;
    sec.check("root_in_window", mp.r_star > r0 && mp.r_star < 2.0 * r0);
    sec.check("deficit_positive", mp.deficit_at_root > 0.0);
  } catch (const RootNotBracketed& e) {
    sec.data["error"] = e.what();
    sec.check("root_in_window", false);
  }
  return sec;
}

SuiteResult run_verify_suite(const ConstructionParams& params, std::vector<std::string> sections,
                             std::uint64_t seed) {
  const auto& names = verify_section_names();
  if (sections.empty()) {
    sections = names;
    if (params.variant != Variant::bounded) {
      std::erase(sections, std::string("quasilinear_consistency"));
    }
  }
  for (const auto& s : sections) {
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw InvalidParams("unknown section: " + s);
    }
    if (s == "quasilinear_consistency" && params.variant != Variant::bounded) {
      throw InvalidParams("quasilinear_consistency needs the bounded variant");
    }
  }
  const RadialProfiles p(params);
  SuiteResult out;
  for (const auto& name : names) {
    if (std::find(sections.begin(), sections.end(), name) == sections.end()) continue;
    ReportSection sec;
    if (name == "estimates") {
      sec = profile_estimate_audit(p);
    } else if (name == "ellipticity") {
      sec = ellipticity_section(p, seed);
    } else if (name == "residual_convergence") {
      sec = residual_convergence(p, default_residual_grid(p));
    } else if (name == "decay") {
      sec = decay_audit(p);
    } else if (name == "max_principle") {
      sec = max_principle_section(p);
    } else if (name == "quasilinear_consistency") {
      const PairedProfiles pp = paired_profiles(params);
      const StateCoefficients c(pp);
      ConsistencyOptions opt;
      opt.seed = seed;
      sec = consistency_check(c, gamma_build(pp), opt);
    } else {
      sec = liouville_witness(p);
    }
    sec.name = name;
    out.pass = out.pass && sec.pass;
    out.sections.push_back(std::move(sec));
  }
  return out;
}

}  // namespace blowup
