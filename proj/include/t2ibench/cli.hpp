#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace t2ibench {

// Runs the command line; `args` excludes the program name. Returns 0 on
// success, 1 on a domain or validation error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace t2ibench
