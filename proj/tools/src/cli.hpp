#pragma once

#include <ostream>

namespace ldso::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInvariant = 2;
inline constexpr int kExitUsage = 64;

/// Environment variable that overrides the default output directory.
inline constexpr const char* kOutDirEnv = "LDSO_OUT_DIR";

/// Entry point with injectable streams so tests can drive it in-process.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ldso::cli
