#include "t2ibench/format.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

namespace t2ibench {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string_view s(buf);
  if (s == "-0.000000") return "0.000000";
  return std::string(s);
}

double round6(double v) {
  const double r = std::strtod(fixed6(v).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;
}

}  // namespace t2ibench
