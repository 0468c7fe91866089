#pragma once

#include <iosfwd>

namespace transient::cli {

/// Subcommands: simulate, calibrate, table, monitor, rho, approx. Returns 0
/// on success, 1 on usage errors (bad flags, config keys or parameter
/// values) and 2 on runtime failures.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace transient::cli
