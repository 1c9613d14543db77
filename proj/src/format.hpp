#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace stochmatch {

// All user-facing numbers are written with 12 significant digits.
inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// x rounded to 12 significant digits, for JSON fields. Infinities and NaN pass
// through; callers decide how to encode them.
inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(fmt(x));
}

}  // namespace stochmatch
