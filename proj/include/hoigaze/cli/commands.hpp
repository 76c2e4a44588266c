#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hoigaze::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Runs one `hoigaze` invocation. `args` excludes the program name.
/// Returns the process exit code; never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hoigaze::cli
