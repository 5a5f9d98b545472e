#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace matpred {

// Shortest decimal string that parses back to the same double.
inline std::string format_shortest(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

// 17 significant digits; round-trips every finite double.
inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace matpred
