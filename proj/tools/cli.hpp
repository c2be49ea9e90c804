#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace masep::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNoConvergence = 2,
  kVerificationFailed = 3,
  kLeakage = 4,
};

/// Relations must hold to this max-norm deviation.
inline constexpr double kRelationThreshold = 1e-12;
/// t = 0 probabilities and individual sigma terms.
inline constexpr double kInitialThreshold = 1e-8;

/// Runs one command line (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace masep::cli
