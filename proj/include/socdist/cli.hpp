#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace socdist {

inline constexpr const char* kVersion = "0.1.0";

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
}  // namespace exit_code

/// Entry point for the `socdist` tool. `args` excludes the program name.
/// Data goes to files (or `out`), diagnostics and progress to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace socdist
