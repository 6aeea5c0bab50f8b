#pragma once

#include <string>
#include <string_view>
#include <vector>

// Strict scalar parsing shared by config and checkpoint readers. Each
// function throws ConfigError naming `what` when the text is malformed.
namespace hit {

std::string trim(std::string_view text);
int parse_int(const std::string& text, const std::string& what);
long long parse_int64(const std::string& text, const std::string& what);
double parse_double(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

std::string format_double(double value);
std::string format_int_list(const std::vector<int>& values);

}  // namespace hit
