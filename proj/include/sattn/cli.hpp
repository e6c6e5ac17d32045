#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sattn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerificationFailed = 2;

/// Default output directory when --out is absent. Unset means stdout.
inline constexpr const char* kOutDirEnv = "SATTN_OUT_DIR";

/// Runs the `sattn` command line. `args` excludes the program name. Reports go
/// to `out` (or to the selected file), diagnostics and usage text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sattn::cli
