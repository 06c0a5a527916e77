#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace distillbench {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// Strict parsers; `context` goes into the error message (e.g. "row 3").
double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::string> split(std::string_view text, char delim);
std::string trim(std::string_view text);

} // namespace distillbench
