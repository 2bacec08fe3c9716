#pragma once

#include <cstdio>
#include <string>

namespace cppe {

/// Floating values in every CSV/JSON artifact use 9 significant digits.
inline std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

}  // namespace cppe
