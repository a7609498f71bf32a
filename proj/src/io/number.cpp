#include "loire/io/number.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <system_error>

namespace loire::io {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc{}) throw std::invalid_argument("cannot format number");
  return std::string(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
  const std::string_view t = trim(text);
  // from_chars rejects a leading '+', which is common in hand-written data.
  const std::string_view body = !t.empty() && t.front() == '+' ? t.substr(1) : t;
  double v = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || res.ec != std::errc{} || res.ptr != body.data() + body.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

template <typename Int>
Int parse_integral(std::string_view text) {
  const std::string_view t = trim(text);
  Int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::int64_t parse_int(std::string_view text) { return parse_integral<std::int64_t>(text); }

std::uint64_t parse_uint(std::string_view text) { return parse_integral<std::uint64_t>(text); }

}  // namespace loire::io
