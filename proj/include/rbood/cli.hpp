#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rbood::cli {

/// Process exit codes.
inline constexpr int kExitInDistribution = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFingerprint = 2;
inline constexpr int kExitOutOfDistribution = 3;

/// Runs one command line (without the program name). Subcommands: induce, baseline,
/// detect, stream, eval, featurize.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace rbood::cli
