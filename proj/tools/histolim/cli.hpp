#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace histolim::cli {

/// Runs one invocation; args excludes the program name. Returns the exit
/// status: 0 success, 1 validation or usage error, 2 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace histolim::cli
