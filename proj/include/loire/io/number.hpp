#pragma once

// Locale-independent number text conversion. Doubles are written in the
// shortest form that parses back to the identical value.

#include <cstdint>
#include <string>
#include <string_view>

namespace loire::io {

std::string format_double(double v);

/// Parses the whole of `text` (surrounding spaces allowed); throws
/// std::invalid_argument otherwise.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace loire::io
