#include "hqc/format.hpp"

#include <cstdio>
#include <cstdlib>

namespace hqc {

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round_significant(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

}  // namespace hqc
