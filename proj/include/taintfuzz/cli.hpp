#pragma once

#include <string>
#include <vector>

namespace taintfuzz::cli {

/// Exit codes: 0 success, 2 usage error, 3 infeasible experiment.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

/// Dispatches one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace taintfuzz::cli
