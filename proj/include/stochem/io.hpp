#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace stochem {

/// Shortest round-trip decimal representation ('.' radix, locale-free).
std::string format_double(double v);
/// Strict parse of a whole token; throws ParseError(line) on failure.
double parse_double(std::string_view token, std::size_t line = 0);
long long parse_integer(std::string_view token, std::size_t line = 0);

/// Writes `contents` to `path`, creating parent directories. Throws
/// std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path,
                     std::string_view contents);

}  // namespace stochem
