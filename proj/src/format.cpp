#include "metalens/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace metalens::fmt {

namespace {

std::string to_chars_string(double value, std::chars_format format, int precision) {
  std::array<char, 64> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, format,
                                 precision);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer.data(), end);
}

}  // namespace

std::string significant(double value, int digits) {
  return to_chars_string(value, std::chars_format::general, digits);
}

std::string fixed(double value, int decimals) {
  std::string out = to_chars_string(value, std::chars_format::fixed, decimals);
  // "-0.0000" reads as a sign flip in tables
  if (!out.empty() && out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

std::string scientific(double value, int digits) {
  return to_chars_string(value, std::chars_format::scientific, digits - 1);
}

std::string table_number(double value) {
  if (value == 0.0 || std::fabs(value) >= 1e-4) return fixed(value, 4);
  return scientific(value, 3);
}

}  // namespace metalens::fmt
