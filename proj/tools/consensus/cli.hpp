#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace consensus::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kToleranceFailure = 1;
inline constexpr int kUsageError = 2;

inline constexpr double kDefaultDensityTolerance = 0.02;
inline constexpr double kDefaultMixtureTolerance = 0.03;

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace consensus::cli
