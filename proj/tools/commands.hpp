#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace bassnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckFailed = 3;

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Runs the command-line tool. `args[0]` is the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bassnet::cli
