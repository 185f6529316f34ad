/**
 * @file csv.hpp
 * @brief Minimal CSV emission helpers ('.' decimal separator, '\n' line endings)
 */

#pragma once

#include <cstdio>
#include <string>

namespace mvcone::csv {

/// Round-trippable shortest-ish decimal form, locale independent.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace mvcone::csv
