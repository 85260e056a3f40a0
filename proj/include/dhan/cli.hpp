#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhan {

// Entry point of the `dhan` tool. `args` excludes the program name.
// Returns 0 on success, 2 on a command-line error (usage is printed) and 1
// on any other failure, reported as one line
//   error: code=<ErrorCode> message="<text>"
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dhan
