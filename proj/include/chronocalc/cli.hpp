#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chronocalc::cli {

/// Environment variable naming the directory for relative --output paths.
inline constexpr const char* kOutputDirEnv = "CHRONOCALC_OUTPUT_DIR";

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 2 on usage or validation errors, 3 on numerical failure.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chronocalc::cli
