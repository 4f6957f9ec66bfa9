#pragma once

#include "probeforge/core/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace probeforge::cli {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitUsage = 2, kExitIo = 3 };

/// Validation failures map to 1, bad parameters to 2, I/O and network to 3.
int exit_code_for(ErrorCode code) noexcept;

/// Entry point. `args` excludes the program name. Reports go to `out`,
/// diagnostics and help to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace probeforge::cli
