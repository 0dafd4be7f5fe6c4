#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace peeltrace::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";
// Default report directory when --out is not given.
inline constexpr const char *kOutputDirEnv = "PEELTRACE_OUT";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitLimit = 3;

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Full driver; argv[0] is the program name.
int run(int argc, const char *const *argv);

} // namespace peeltrace::cli
