#pragma once

#include <string>

namespace t2ibench {

// Fixed 6-decimal rendering used by every text output; never emits "-0.000000".
std::string fixed6(double v);

// v rounded to 6 decimals, for JSON numbers that must agree with fixed6().
double round6(double v);

}  // namespace t2ibench
