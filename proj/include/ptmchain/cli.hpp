#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ptmchain::cli {

/// Runs one command-line invocation. `args` excludes the program name.
/// Human-readable progress goes to `err`; the last line on `out` is a JSON
/// summary of what happened. Returns 0 on success, 1 on an operational
/// failure, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptmchain::cli
