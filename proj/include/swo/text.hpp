#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace swo::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double value, int digits);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace swo::text
