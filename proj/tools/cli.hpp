#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vngender::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 on success, 2 for usage errors, 1 for anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vngender::cli
