#pragma once

#include <iosfwd>

namespace c2b {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one `c2b` subcommand. Results go to files or `out`, diagnostics to
/// `err`. Returns 0 on success, 1 on a usage error (unknown subcommand or
/// flag, missing required flag, invalid value), 2 on a runtime failure.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace c2b
