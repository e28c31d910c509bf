#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvqit::cli {

// args excludes the program name; returns the process exit code (0 ok, 1 numeric failure, 2 usage)
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// splices values from a --config JSON file in front of the command-line flags so flags win
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace cvqit::cli
