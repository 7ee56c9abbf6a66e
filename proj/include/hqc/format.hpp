#pragma once

#include <string>

namespace hqc {

// Fixed 12-significant-digit rendering shared by every CSV/JSON writer.
std::string format_number(double x);
// x rounded to 12 significant digits, so JSON serialization reproduces format_number.
double round_significant(double x);

}  // namespace hqc
