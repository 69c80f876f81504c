#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace polishsense::io {

/// 17 significant digits; strtod of the result reproduces the double exactly.
std::string format_double(double v);

/// Parses a full token as a double; throws Error naming `context` otherwise.
double parse_double(std::string_view token, std::string_view context);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames over `path`, so readers
/// never observe a partial file.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace polishsense::io
