#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace ewclab {

inline std::string strf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list copy;
    va_copy(copy, args);
    int n = vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out(n > 0 ? static_cast<size_t>(n) : 0, '\0');
    if (n > 0) vsnprintf(out.data(), out.size() + 1, fmt, args);
    va_end(args);
    return out;
}

// Shortest round-trip formatting for doubles in metrics/manifest files:
// %.17g always round-trips, but prefer the shortest form that does.
inline std::string fmt_double(double v) {
    for (int prec = 1; prec <= 16; ++prec) {
        std::string s = strf("%.*g", prec, v);
        if (std::stod(s) == v) return s;
    }
    return strf("%.17g", v);
}

} // namespace ewclab
