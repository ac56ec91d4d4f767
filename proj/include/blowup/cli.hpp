#pragma once

#include <iosfwd>

namespace blowup {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitConstruction = 3,
  kExitSolver = 4,
};

/// Entry point of blowuplab: construct, verify, simulate, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blowup
