#pragma once

#include <iosfwd>

namespace persuade::cli {

// Stable exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kIo = 3;
inline constexpr int kSolver = 4;
inline constexpr int kOracle = 5;
inline constexpr int kSim = 6;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace persuade::cli
