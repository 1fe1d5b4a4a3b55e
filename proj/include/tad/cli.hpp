#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tad::cli {

// Exit codes: 0 ok, 2 usage, 3 I/O, 4 parse, 5 validation, 6 degenerate input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace tad::cli
