#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stormreach {

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

/// Full-string strict parse; nullopt-like behavior via bool return.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, int& out);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);

void write_text_file(const std::string& path, std::string_view contents);
std::string read_text_file(const std::string& path);

}  // namespace stormreach
