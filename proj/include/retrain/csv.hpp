#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace retrain::csv {

std::vector<std::string> split_row(std::string_view line);
std::string trim(std::string_view s);

// Parses a full decimal/integer token; DataError on trailing garbage.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

// Shortest round-trippable decimal rendering.
std::string format_double(double v);

// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace retrain::csv
