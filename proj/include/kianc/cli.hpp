#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kianc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

inline constexpr const char* kVersion = "0.3.0";

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace kianc
