#pragma once

// Locale-independent text helpers for the TSV/CSV formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rankvec {

// Shortest representation that parses back to the same double, '.' decimal
// point.
std::string format_real(double v);

// Parses the whole field as a finite double or throws DataError mentioning
// `context`.
double parse_real(std::string_view field, std::string_view context);

std::vector<std::string_view> split(std::string_view s, char sep);

// Reads a text file as lines, accepting LF or CRLF endings. A trailing
// newline does not produce an empty final line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace rankvec
