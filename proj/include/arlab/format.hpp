#pragma once

#include <charconv>
#include <string>

namespace arlab {

/// Shortest decimal that reads back exactly, always with a decimal point or
/// exponent ("1.0", not "1").
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace arlab
