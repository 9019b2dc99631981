#pragma once

#include <cstdio>
#include <string>

namespace coplan {

// Nine significant digits: stable under text diffs without dumping full
// double precision into every cell that lands in a CSV or on stdout.
inline std::string format_sig9(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", v);
  return buffer;
}

}  // namespace coplan
