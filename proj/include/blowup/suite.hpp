#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blowup/params.hpp"
#include "blowup/profiles.hpp"
#include "blowup/report.hpp"

namespace blowup {

/// Section names of the verification report, in report order.
const std::vector<std::string>& verify_section_names();

/// Spectral scan plus agreement of the closed-form spectrum with a numeric
/// eigensolver on the same radii.
ReportSection ellipticity_section(const RadialProfiles& p, std::uint64_t seed,
                                  double threshold = 0.25);

/// Root r* of phi' in (r0, 2 r0) with E(r*) > 0.
ReportSection max_principle_section(const RadialProfiles& p);

struct SuiteResult {
  std::vector<ReportSection> sections;
  bool pass = true;
};

/// Runs the named sections (all when empty). quasilinear_consistency needs
/// the bounded variant; InvalidParams otherwise.
SuiteResult run_verify_suite(const ConstructionParams& params, std::vector<std::string> sections,
                             std::uint64_t seed);

}  // namespace blowup
