#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synthts {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Strict parse of a full token; throws FormatError.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace synthts
