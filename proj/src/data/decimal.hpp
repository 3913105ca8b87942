#pragma once

#include <optional>
#include <string>

#include "util/status.hpp"

namespace ewclab {

// Non-negative fixed-point decimal: value = units · 10^-places. All task
// arithmetic runs on the scaled integers; binary floating point never touches
// an operand or result.
struct Decimal {
    long long units = 0;
    int places = 2;

    double to_double() const;
    // Canonical rendering: exactly `places` fractional digits, no leading
    // zeros beyond a single integer digit of "0", no sign.
    std::string render() const;

    bool operator==(const Decimal& o) const = default;
};

long long pow10ll(int n);

// Strict parse of the canonical form at fixed decimal places; anything else
// (wrong fraction width, leading zeros, signs, stray characters) is rejected.
std::optional<Decimal> parse_canonical(const std::string& s, int places);

// Lenient numeric read used by the magnitude analysis: any digit run with at
// most one '.' and at least one digit yields a value and its decade.
struct LenientValue {
    double value = 0.0;
    int decade = 0;
};
std::optional<LenientValue> parse_lenient(const std::string& s);

// floor(log10(max(|v|, 1e-2))) computed digit-wise, so decade boundaries are
// exact (no libm rounding at powers of ten).
int decade_of(const Decimal& d);

} // namespace ewclab
