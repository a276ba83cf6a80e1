#pragma once
// Fixed-precision number formatting shared by every report writer.

#include <string>

namespace minpart {

/// x rounded to 12 significant digits (non-finite values pass through).
double round12(double x);

/// "%.12g" rendering.
std::string format12(double x);

}  // namespace minpart
