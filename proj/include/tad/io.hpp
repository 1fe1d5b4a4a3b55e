#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tad::io {

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

std::vector<std::string> read_lines(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`, so a failed
// write never leaves a truncated file behind.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace tad::io
